"""Gate distance, Makhlin local invariants, and the combined gate report.

The deviation of an evolution U from a target X is the Frobenius norm
||X - U|| = sqrt(Tr[(X-U)^dag (X-U)]); the physically meaningful variant
minimizes over a global phase, with closed-form optimum

    min_phi ||X - e^{i phi} U|| = sqrt(8 - 2 |Tr(X^dag U)|).

Two gates are locally equivalent (equal up to single-qubit rotations
before and after) iff their Makhlin invariants coincide:

    G1 = tr^2[m] / (16 det X),   G2 = (tr^2[m] - tr[m^2]) / (4 det X),

with m = X_B^T X_B and X_B the gate rotated to the Bell (magic) basis.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NonUnitaryError
from .hamiltonian import HamiltonianParams
from .noise import NoiseModel

UNITARITY_TOL = 1e-8
DEFAULT_EQUIVALENCE_TOL = 1e-6

# Bell ("magic") basis change. The printed form of Q lacks the 1/sqrt(2)
# needed for unitarity; the invariants are insensitive to that scale
# because of the det[X] denominator, but the unitary version keeps the
# intermediate matrices well conditioned.
MAGIC_BASIS = (1.0 / np.sqrt(2.0)) * np.array(
    [
        [1, 0, 0, 1j],
        [0, 1j, 1, 0],
        [0, 1j, -1, 0],
        [1, 0, 0, -1j],
    ],
    dtype=complex,
)


def assert_unitary(u, tol=UNITARITY_TOL, name="matrix"):
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise NonUnitaryError(f"{name} must be 4x4")
    defect = np.max(np.abs(u.conj().T @ u - np.eye(4)))
    if defect > tol:
        raise NonUnitaryError(f"{name} is not unitary (defect {defect:.2e})")
    return u


@dataclass(frozen=True)
class GateTarget:
    """A named target unitary, with its known invariants when standard."""

    name: str
    matrix: np.ndarray
    known_invariants: tuple = None

    def __post_init__(self):
        object.__setattr__(
            self, "matrix", assert_unitary(self.matrix, name=f"target {self.name}")
        )


def gate_distance(u, x):
    """Frobenius distance of ``u`` to target ``x``, raw and phase-optimized.

    Returns
    -------
    (raw, phase_optimized) : tuple of float
        ``raw`` compares the matrices as given; ``phase_optimized``
        minimizes over a global phase of ``u`` and never exceeds ``raw``.
    """
    xm = x.matrix if isinstance(x, GateTarget) else np.asarray(x, dtype=complex)
    u = assert_unitary(u, name="gate")
    assert_unitary(xm, name="target")
    raw = float(np.linalg.norm(xm - u))
    overlap = abs(np.trace(xm.conj().T @ u))
    phase_opt = float(np.sqrt(max(8.0 - 2.0 * overlap, 0.0)))
    return raw, phase_opt


def fidelity_score(u, x):
    """Phase-insensitive overlap |Tr(X^dag U)| / 4, equal to 1 iff equivalent
    up to a global phase; related to the optimized distance by
    d^2 = 8 (1 - F)."""
    xm = x.matrix if isinstance(x, GateTarget) else np.asarray(x, dtype=complex)
    return float(abs(np.trace(xm.conj().T @ u)) / 4.0)


@dataclass(frozen=True)
class MakhlinInvariants:
    """The pair (G1, G2); G1 is genuinely complex, G2 real up to noise."""

    g1: complex
    g2: complex

    def distance(self, other):
        return float(max(abs(self.g1 - other.g1), abs(self.g2 - other.g2)))

    def as_tuple(self):
        return (self.g1, self.g2)


def makhlin_invariants(x):
    """Makhlin local invariants of a two-qubit unitary."""
    xm = x.matrix if isinstance(x, GateTarget) else np.asarray(x, dtype=complex)
    assert_unitary(xm, name="gate")
    xb = MAGIC_BASIS.conj().T @ xm @ MAGIC_BASIS
    det = np.linalg.det(xb)
    m = xb.T @ xb
    tr2 = np.trace(m) ** 2
    g1 = tr2 / (16.0 * det)
    g2 = (tr2 - np.trace(m @ m)) / (4.0 * det)
    return MakhlinInvariants(g1=complex(g1), g2=complex(g2))


def is_equivalent(u, x, tol=DEFAULT_EQUIVALENCE_TOL):
    """Local equivalence test by coincidence of Makhlin invariants."""
    gu = u if isinstance(u, MakhlinInvariants) else makhlin_invariants(u)
    gx = x if isinstance(x, MakhlinInvariants) else makhlin_invariants(x)
    return gu.distance(gx) < tol


@dataclass(frozen=True)
class GateReport:
    """Everything one wants to know about a candidate gate in one record."""

    target: str
    distance_raw: float
    distance_phase_opt: float
    fidelity: float
    g1: complex
    g2: complex
    equivalent: bool
    purity_loss: float
    decay_rate: float
    t0: float
    params: HamiltonianParams = None
    noise: NoiseModel = None
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "target": self.target,
            "distance_raw": self.distance_raw,
            "distance_phase_opt": self.distance_phase_opt,
            "fidelity": self.fidelity,
            "g1_re": self.g1.real,
            "g1_im": self.g1.imag,
            "g2_re": self.g2.real,
            "g2_im": self.g2.imag,
            "equivalent": self.equivalent,
            "purity_loss": self.purity_loss,
            "decay_rate": self.decay_rate,
            "t0": self.t0,
        }
        if self.params is not None:
            out["params"] = {
                name: getattr(self.params, name)
                for name in ("delta1", "delta2", "eps1", "eps2", "jx", "jy", "jz", "t0")
            }
        if self.noise is not None:
            out["noise"] = {
                "alpha": self.noise.alpha,
                "temperature": self.noise.temperature,
                "cutoff": self.noise.cutoff,
            }
        out.update(self.extras)
        return out


def report(params: HamiltonianParams, target: GateTarget, nm: NoiseModel,
           t0=None, equivalence_tol=DEFAULT_EQUIVALENCE_TOL):
    """Assemble distance, invariants, equivalence and purity into a GateReport."""
    from scipy.linalg import expm

    from .hamiltonian import build_hamiltonian
    from .redfield import gate_purity

    if t0 is None:
        t0 = params.t0
    u = expm(-1j * t0 * build_hamiltonian(params))
    raw, phase_opt = gate_distance(u, target)
    inv = makhlin_invariants(u)
    target_inv = makhlin_invariants(target)
    if nm.alpha == 0.0:
        purity_loss, rate = 0.0, 0.0
    else:
        trace = gate_purity(params, nm, t_final=t0)
        purity_loss, rate = trace.loss(), trace.decay_rate
    return GateReport(
        target=target.name,
        distance_raw=raw,
        distance_phase_opt=phase_opt,
        fidelity=fidelity_score(u, target),
        g1=inv.g1,
        g2=inv.g2,
        equivalent=inv.distance(target_inv) < equivalence_tol,
        purity_loss=purity_loss,
        decay_rate=rate,
        t0=t0,
        params=params,
        noise=nm,
    )
