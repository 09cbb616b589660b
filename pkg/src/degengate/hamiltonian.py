"""Two-qubit control Hamiltonian, its spectrum, and degeneracy diagnostics.

The Hamiltonian is

    H = sum_i B_i . sigma_i + sum_a J_a sigma^a_1 sigma^a_2,
    B_i = (Delta_i, 0, eps_i),

with seven real controls. Control values are stored in reduced units of
pi/t0; ``build_hamiltonian`` returns the matrix in physical angular units
(entries scaled by pi/t0), which is the unique convention under which the
published one-step CNOT parameters reproduce the gate exactly as
exp(-i pi/4 - i t0 H).
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameterError, NonHermitianError
from .pauli import pauli_tensor

PARAM_NAMES = ("delta1", "delta2", "eps1", "eps2", "jx", "jy", "jz")

HERMITICITY_TOL = 1e-10
DEFAULT_DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class HamiltonianParams:
    """The seven tunable controls, in reduced units of pi/t0.

    delta1, delta2 are the tunneling amplitudes, eps1, eps2 the biases,
    and (jx, jy, jz) the exchange couplings. ``t0`` is the pulse duration
    in the time unit of choice.
    """

    delta1: float = 0.0
    delta2: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0
    jx: float = 0.0
    jy: float = 0.0
    jz: float = 0.0
    t0: float = 1.0

    def __post_init__(self):
        values = self.as_array()
        if not np.all(np.isfinite(values)) or not np.isfinite(self.t0):
            raise InvalidParameterError("all control values and t0 must be finite")
        if self.t0 <= 0:
            raise InvalidParameterError("t0 must be positive")

    def as_array(self):
        """Controls as a float array ordered like PARAM_NAMES."""
        return np.array([getattr(self, name) for name in PARAM_NAMES], dtype=float)

    def replace(self, **changes):
        """Copy with some fields updated."""
        return replace(self, **changes)

    @property
    def angular_scale(self):
        """Physical angular frequency of one reduced unit, pi/t0."""
        return np.pi / self.t0

    @property
    def coupling_norm(self):
        """|J| = sqrt(jx^2 + jy^2 + jz^2) in reduced units."""
        return float(np.sqrt(self.jx**2 + self.jy**2 + self.jz**2))

    def check_bounds(self, bounds):
        """Raise unless |x_i| <= a_i for every control named in ``bounds``."""
        for name, limit in bounds.items():
            if name not in PARAM_NAMES:
                raise InvalidParameterError(f"unknown control {name!r}")
            if abs(getattr(self, name)) > limit:
                raise InvalidParameterError(
                    f"control {name}={getattr(self, name):g} exceeds bound {limit:g}"
                )

    @classmethod
    def from_array(cls, values, t0=1.0):
        if len(values) != len(PARAM_NAMES):
            raise InvalidParameterError("expected 7 control values")
        return cls(**dict(zip(PARAM_NAMES, map(float, values))), t0=t0)


def build_hamiltonian(p: HamiltonianParams):
    """Assemble the 4x4 two-qubit Hamiltonian in physical angular units.

    In the standard basis the matrix is

        [ Jz+e1+e2   D2          D1          Jx-Jy     ]
        [ D2         e1-e2-Jz    Jx+Jy       D1        ]
        [ D1         Jx+Jy       e2-e1-Jz    D2        ]
        [ Jx-Jy      D1          D2          -e1-e2+Jz ]

    times pi/t0. The result is real symmetric, hence Hermitian, and
    traceless for any parameter values.
    """
    s = p.angular_scale
    d1, d2, e1, e2, jx, jy, jz = p.as_array() * s
    h = np.array(
        [
            [jz + e1 + e2, d2, d1, jx - jy],
            [d2, e1 - e2 - jz, jx + jy, d1],
            [d1, jx + jy, e2 - e1 - jz, d2],
            [jx - jy, d1, d2, -e1 - e2 + jz],
        ],
        dtype=complex,
    )
    return h


def build_hamiltonian_from_paulis(p: HamiltonianParams):
    """Independent assembly from explicit Kronecker products (cross-check)."""
    s = p.angular_scale
    h = np.zeros((4, 4), dtype=complex)
    h += p.delta1 * s * pauli_tensor("x", "0")
    h += p.eps1 * s * pauli_tensor("z", "0")
    h += p.delta2 * s * pauli_tensor("0", "x")
    h += p.eps2 * s * pauli_tensor("0", "z")
    for axis, coupling in (("x", p.jx), ("y", p.jy), ("z", p.jz)):
        h += coupling * s * pauli_tensor(axis, axis)
    return h


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues and eigenvectors of a 4x4 Hermitian matrix.

    ``energies`` are ascending, in the units of the input matrix.
    ``vectors`` holds orthonormal eigenvectors as columns, with a
    deterministic phase convention (see :func:`eigensystem`).
    ``omega[n, m] = energies[n] - energies[m]`` are the transition
    frequencies.
    """

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def omega(self):
        return self.energies[:, None] - self.energies[None, :]

    def gaps(self):
        """All 12 ordered-pair transition frequencies as a dict."""
        w = self.omega
        return {
            (n + 1, m + 1): float(w[n, m])
            for n in range(4)
            for m in range(4)
            if n != m
        }

    def to_eigenbasis(self, op):
        """Matrix elements of ``op`` (standard basis) in the eigenbasis."""
        return self.vectors.conj().T @ op @ self.vectors

    def to_standard(self, op):
        """Inverse transformation of :meth:`to_eigenbasis`."""
        return self.vectors @ op @ self.vectors.conj().T


def _fix_phases(vectors):
    """Make the largest-magnitude component of each column real positive."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col)))
        pivot = col[idx]
        if np.abs(pivot) > 0:
            out[:, k] = col * (np.abs(pivot) / pivot)
    return out


def _canonicalize_degenerate(energies, vectors, tol):
    """Re-span exactly/nearly degenerate clusters deterministically.

    Within each cluster (successive gaps below ``tol``) the subspace basis
    is rebuilt by projecting the standard basis vectors e1..e4 in index
    order and Gram-Schmidt orthonormalizing, which removes the arbitrary
    rotation returned by the eigensolver.
    """
    out = vectors.copy()
    start = 0
    while start < 4:
        stop = start + 1
        while stop < 4 and energies[stop] - energies[stop - 1] < tol:
            stop += 1
        size = stop - start
        if size > 1:
            block = out[:, start:stop]
            proj = block @ block.conj().T
            basis = []
            for i in range(4):
                cand = proj[:, i].copy()
                for prev in basis:
                    cand -= prev * (prev.conj() @ cand)
                norm = np.linalg.norm(cand)
                if norm > 1e-8:
                    basis.append(cand / norm)
                if len(basis) == size:
                    break
            if len(basis) == size:
                out[:, start:stop] = np.column_stack(basis)
        start = stop
    return out


def eigensystem(h, degeneracy_tol=DEFAULT_DEGENERACY_TOL):
    """Diagonalize a Hermitian 4x4 matrix with a reproducible convention.

    Eigenvalues come out ascending. Degenerate clusters (successive gap
    below ``degeneracy_tol``) are re-orthonormalized by deterministic
    projection of the standard basis, then every eigenvector's
    largest-magnitude component is made real and positive. Both steps are
    needed so that downstream relaxation tensors do not depend on LAPACK
    internals.

    Raises
    ------
    NonHermitianError
        If ``max|h - h^dagger|`` exceeds 1e-10.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (4, 4):
        raise InvalidParameterError("expected a 4x4 matrix")
    if np.max(np.abs(h - h.conj().T)) > HERMITICITY_TOL:
        raise NonHermitianError("input matrix is not Hermitian within 1e-10")
    energies, vectors = np.linalg.eigh(h)
    vectors = _canonicalize_degenerate(energies, vectors, degeneracy_tol)
    vectors = _fix_phases(vectors)
    return EigenSystem(energies=energies, vectors=vectors)


def spectrum_optimal_point(p: HamiltonianParams):
    """Closed-form spectrum at the qubits' optimal points (eps1 = eps2 = 0).

    Returns the four energies, ascending, in physical angular units:

        E_{1,2} = Jx -/+ sqrt((D1+D2)^2 + (Jy-Jz)^2)
        E_{3,4} = -Jx +/- sqrt((D1-D2)^2 + (Jy+Jz)^2)
    """
    if abs(p.eps1) > 0 or abs(p.eps2) > 0:
        raise InvalidParameterError("closed form requires eps1 = eps2 = 0")
    s = p.angular_scale
    lower = np.sqrt((p.delta1 + p.delta2) ** 2 + (p.jy - p.jz) ** 2)
    upper = np.sqrt((p.delta1 - p.delta2) ** 2 + (p.jy + p.jz) ** 2)
    energies = np.array(
        [p.jx - lower, p.jx + lower, -p.jx + upper, -p.jx - upper]
    ) * s
    return np.sort(energies)


@dataclass(frozen=True)
class DegeneracyReport:
    """Degeneracy diagnostics for a spectrum.

    ``classification`` is 'none', 'single' or 'double'. 'double' means the
    ascending spectrum splits into two pairs, each internally degenerate
    within the tolerance (the E1=E4, E2=E3 pattern after sorting);
    'single' means exactly one degenerate cluster of two (or three)
    levels. ``pair_gaps`` are the internal gaps of the lower and upper
    pair; ``pair_gap_measure`` is their maximum, the scalar used as a
    double-degeneracy violation measure.
    """

    min_gap: float
    pair_gaps: tuple
    classification: str
    tol: float

    @property
    def pair_gap_measure(self):
        return max(self.pair_gaps)


def classify_degeneracy(es, tol=DEFAULT_DEGENERACY_TOL):
    """Classify the degeneracy structure of an EigenSystem or energy array."""
    if tol <= 0:
        raise InvalidParameterError("tolerance must be positive")
    energies = es.energies if isinstance(es, EigenSystem) else np.sort(np.asarray(es, dtype=float))
    adjacent = np.diff(energies)
    pair_gaps = (float(adjacent[0]), float(adjacent[2]))
    min_gap = float(np.min(adjacent))

    degenerate = adjacent < tol
    if degenerate[0] and degenerate[2]:
        classification = "double"
    elif np.any(degenerate):
        classification = "single"
    else:
        classification = "none"
    return DegeneracyReport(
        min_gap=min_gap, pair_gaps=pair_gaps, classification=classification, tol=tol
    )
