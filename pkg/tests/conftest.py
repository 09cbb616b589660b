import numpy as np
import pytest

from degengate import HamiltonianParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_params(rng, scale=2.0, t0=1.0):
    vals = rng.uniform(-scale, scale, size=7)
    return HamiltonianParams.from_array(vals, t0=t0)


def random_hermitian(rng, scale=np.pi):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = 0.5 * (a + a.conj().T)
    return scale * h


def random_unitary(rng, dim=4):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_local_unitary(rng):
    return np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
