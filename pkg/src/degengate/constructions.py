"""Target gates, the CNOT matrix-log family, and the one-step constructions.

The one-step constructions realize a target gate (or its local-equivalence
class) with a single constant-Hamiltonian pulse whose parameters sit at a
spectral-degeneracy point, which is what suppresses relaxation:

* ``onestep_cnot``   - exact CNOT under a single degeneracy,
* ``cnot_class_pulse`` - CNOT equivalence class under double degeneracy,
* ``onestep_bgate``  - B-gate equivalence class under double degeneracy.

``standard_cnot_protocol`` builds the conventional five-pulse CNOT used as
the comparison baseline.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize, minimize_scalar

from .errors import InvalidParameterError
from .hamiltonian import HamiltonianParams, build_hamiltonian
from .metrics import GateTarget, MakhlinInvariants, makhlin_invariants
from .pauli import SIGMA_X, SIGMA_Y, SIGMA_Z, SX2, SZ1, SZ2, pauli_tensor

SQRT7_OVER_4 = np.sqrt(7.0) / 4.0

_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
_SQRT_SWAP = np.array(
    [
        [1, 0, 0, 0],
        [0, 0.5 + 0.5j, 0.5 - 0.5j, 0],
        [0, 0.5 - 0.5j, 0.5 + 0.5j, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)
_SQRT_X = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex)
# Controlled root-NOT, same control convention as the CNOT above.
_SQRT_CNOT = np.block(
    [[np.eye(2, dtype=complex), np.zeros((2, 2))], [np.zeros((2, 2)), _SQRT_X]]
)
# Two-qubit discrete Fourier transform.
_QFT2 = 0.5 * np.array(
    [[1j ** (j * k) for k in range(4)] for j in range(4)], dtype=complex
)
# Canonical B-gate representative: the nonlocal kernel at Cartan angles
# (pi/4, pi/8, 0), whose invariants are G1 = G2 = 0.
_BGATE = expm(
    1j * (np.pi / 4.0 * pauli_tensor("x", "x") + np.pi / 8.0 * pauli_tensor("y", "y"))
)

_TARGETS = {
    "CNOT": (_CNOT, (0.0 + 0.0j, 3.0)),
    "SWAP": (_SWAP, (-1.0 + 0.0j, -3.0)),
    "SQRT_SWAP": (_SQRT_SWAP, None),
    "B": (_BGATE, (0.0 + 0.0j, 0.0)),
    "IDENTITY": (np.eye(4, dtype=complex), (1.0 + 0.0j, 3.0)),
    "SQRT_CNOT": (_SQRT_CNOT, None),
    "QFT2": (_QFT2, None),
}


def target_gate(name):
    """Return the named :class:`GateTarget`.

    Known names: CNOT, SWAP, SQRT_SWAP, B, IDENTITY, SQRT_CNOT, QFT2.
    """
    key = str(name).upper()
    if key not in _TARGETS:
        raise InvalidParameterError(
            f"unknown gate {name!r}; known: {', '.join(sorted(_TARGETS))}"
        )
    matrix, invariants = _TARGETS[key]
    return GateTarget(name=key, matrix=matrix.copy(), known_invariants=invariants)


# ---------------------------------------------------------------------------
# Matrix-log family of CNOT generators


@dataclass(frozen=True)
class LogBranch:
    """One branch of the multi-valued logarithm of CNOT.

    Integers (n1, n2, n3) select the discrete branch, ``phi0`` the global
    phase, and the continuous (phi_vec, phi1) parameters conjugate the
    generator inside the invariant subspace of the gate.
    """

    n1: int = 0
    n2: int = 0
    n3: int = 0
    phi0: float = 0.0
    phi_vec: tuple = (0.0, 0.0, 0.0)
    phi1: float = 0.0


def _branch_blocks(branch: LogBranch):
    a = np.zeros((4, 4), dtype=complex)
    a[2:, 2:] = np.array([[-np.pi / 2, np.pi / 2], [np.pi / 2, -np.pi / 2]])
    a += branch.phi0 * np.eye(4)

    ones = np.ones((2, 2))
    b = np.zeros((4, 4), dtype=complex)
    b[:2, :2] += 2.0 * np.pi * branch.n1 * ones
    b[2:, 2:] += 2.0 * np.pi * branch.n1 * ones
    b[:2, 2:] += 2.0 * np.pi * branch.n2 * ones
    b[2:, :2] += 2.0 * np.pi * branch.n2 * ones
    b += 2.0 * np.pi * branch.n3 * np.eye(4)

    phi = np.asarray(branch.phi_vec, dtype=float)
    upper = expm(1j * (phi[0] * SIGMA_X + phi[1] * SIGMA_Y + phi[2] * SIGMA_Z))
    lower = expm(1j * branch.phi1 * SIGMA_X)
    c = np.zeros((4, 4), dtype=complex)
    c[:2, :2] = upper
    c[2:, 2:] = lower
    return a, b, c


def cnot_log_family(branch: LogBranch, t0=1.0):
    """Hermitian generator H with exp(-i t0 H) = e^{-i phi0} CNOT.

    Every integer branch (n1, n2, n3) and every continuous (phi_vec, phi1)
    yields the same gate up to the phase; the A and B pieces commute for
    all branches.
    """
    a, b, c = _branch_blocks(branch)
    h = c @ (a + b) @ c.conj().T / t0
    return h


def log_branch_commutator(branch: LogBranch):
    """max|[A, B]| for the branch pieces; zero for every branch."""
    a, b, _ = _branch_blocks(branch)
    return float(np.max(np.abs(a @ b - b @ a)))


# ---------------------------------------------------------------------------
# One-step constructions


@dataclass(frozen=True)
class OneStepGate:
    """A one-step construction: parameters plus what it promises.

    ``gate_time`` is the pulse duration; it defaults to the parameters'
    t0 but class constructions that land on their target at a rescaled
    time keep the couplings fixed and stretch the duration instead.
    """

    name: str
    params: HamiltonianParams
    target: str
    global_phase: float = None
    expected_degeneracy: str = None
    refined: bool = True
    gate_time: float = None
    notes: dict = field(default_factory=dict)

    @property
    def duration(self):
        return self.gate_time if self.gate_time is not None else self.params.t0

    def unitary(self):
        return expm(-1j * self.duration * build_hamiltonian(self.params))


def onestep_cnot(refined=True):
    """The single-degeneracy one-step CNOT construction.

    ``refined=True`` uses eps2 = Jz = -sqrt(7)/4, which makes the
    construction exact (the published value -0.66 is that number rounded).
    The gate satisfies exp(-i pi/4 - i t0 H) = CNOT with expected spectrum
    (-2.25, -1.25, 1.75, 1.75) in units of pi/t0, one doubly degenerate
    level.
    """
    value = -SQRT7_OVER_4 if refined else -0.66
    params = HamiltonianParams(
        delta1=0.0, delta2=1.5, eps1=-0.25, eps2=value, jx=0.0, jy=0.0, jz=value
    )
    return OneStepGate(
        name="cnot_onestep_refined" if refined else "cnot_onestep_printed",
        params=params,
        target="CNOT",
        global_phase=-np.pi / 4.0,
        expected_degeneracy="single",
        refined=refined,
        notes={"expected_energies_reduced": (-2.25, -1.25, 1.75, 1.75)},
    )


def _invariant_gap(u, target_inv: MakhlinInvariants):
    inv = makhlin_invariants(u)
    return abs(inv.g1 - target_inv.g1) + abs(inv.g2 - target_inv.g2)


def find_class_time_scale(params: HamiltonianParams, target: GateTarget,
                          scale_max=4.0, samples=2000):
    """Smallest time scale s > 0 with exp(-i s t0 H) in the target's class.

    One-dimensional scan over s followed by local refinement of the
    Makhlin-invariant gap. Returns (s, gap at s).
    """
    h = build_hamiltonian(params) * params.t0
    target_inv = makhlin_invariants(target)
    scales = np.linspace(scale_max / samples, scale_max, samples)
    gaps = np.array([_invariant_gap(expm(-1j * s * h), target_inv) for s in scales])
    order = np.argsort(gaps)
    best_s, best_gap = None, np.inf
    for idx in order[:5]:
        lo = scales[max(idx - 1, 0)]
        hi = scales[min(idx + 1, samples - 1)]
        res = minimize_scalar(
            lambda s: _invariant_gap(expm(-1j * s * h), target_inv),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if res.fun < best_gap:
            best_s, best_gap = float(res.x), float(res.fun)
    return best_s, best_gap


def cnot_class_pulse(j, delta, printed_signs=False):
    """Double-degeneracy rectangular pulse in the CNOT equivalence class.

    Couplings (units pi/t0):

        Jx = 0,
        Jy = (sqrt(J^2+D^2) + sqrt(J^2-D^2)) / sqrt(2),
        Jz = (sqrt(J^2+D^2) - sqrt(J^2-D^2)) / sqrt(2),

    so that Jy Jz = Delta^2 exactly, the double-degeneracy condition at
    the optimal point with Delta1 = Delta2 = Delta. The printed equation
    has a minus sign in both components, which violates the degeneracy it
    is meant to enforce; pass ``printed_signs=True`` to audit that
    variant. The pulse lands in the CNOT class at the returned time
    scale, found by a one-dimensional Makhlin-invariant search; the
    returned parameters are already rescaled by it.
    """
    if delta <= 0 or j < delta:
        raise InvalidParameterError("need J >= Delta > 0")
    plus = np.sqrt(j**2 + delta**2)
    minus = np.sqrt(j**2 - delta**2)
    if printed_signs:
        jy = jz = (plus - minus) / np.sqrt(2.0)
    else:
        jy = (plus + minus) / np.sqrt(2.0)
        jz = (plus - minus) / np.sqrt(2.0)
    base = HamiltonianParams(delta1=delta, delta2=delta, jy=jy, jz=jz)
    scale, gap = find_class_time_scale(base, target_gate("CNOT"))
    return OneStepGate(
        name="cnot_class_pulse",
        params=base,
        target="CNOT",
        expected_degeneracy="double",
        gate_time=scale * base.t0,
        notes={"time_scale": scale, "invariant_gap": gap, "j": j, "delta": delta},
    )


def onestep_bgate(refined=True):
    """The double-degeneracy one-step B-class construction.

    Printed parameters: Delta1 = Delta2 = 1, eps = Jx = 0, Jy = 0.58,
    Jz = 1.71 (units pi/t0). The refined variant enforces the double
    degeneracy Jy Jz = Delta^2 exactly by fixing Jz = 1/0.58.
    """
    jz = 1.0 / 0.58 if refined else 1.71
    params = HamiltonianParams(delta1=1.0, delta2=1.0, jy=0.58, jz=jz)
    return OneStepGate(
        name="bgate_onestep_refined" if refined else "bgate_onestep_printed",
        params=params,
        target="B",
        expected_degeneracy="double",
        refined=refined,
    )


def refine_bgate(start=None, invariant_tol=1e-10):
    """Polish (Jy, time scale) so the invariants hit (0, 0) exactly.

    Keeps the double degeneracy exact by tying Jz = Delta^2/Jy throughout.
    Returns (OneStepGate, invariant gap achieved).
    """
    if start is None:
        start = onestep_bgate(refined=True)
    target_inv = makhlin_invariants(target_gate("B"))
    delta = start.params.delta1

    def objective(x):
        jy, scale = x
        if jy <= 0 or scale <= 0:
            return 1e6
        p = HamiltonianParams(delta1=delta, delta2=delta, jy=jy, jz=delta**2 / jy)
        u = expm(-1j * scale * build_hamiltonian(p))
        return _invariant_gap(u, target_inv)

    res = minimize(
        objective,
        x0=[start.params.jy, 1.0],
        method="Nelder-Mead",
        options={"xatol": 1e-13, "fatol": 1e-14, "maxiter": 4000},
    )
    jy, scale = res.x
    params = HamiltonianParams(delta1=delta, delta2=delta, jy=jy, jz=delta**2 / jy)
    gate = OneStepGate(
        name="bgate_onestep_polished",
        params=params,
        target="B",
        expected_degeneracy="double",
        gate_time=float(scale) * params.t0,
        notes={"invariant_gap": float(res.fun), "jy": float(jy), "time_scale": float(scale)},
    )
    return gate, float(res.fun)


# ---------------------------------------------------------------------------
# Five-step reference protocol


@dataclass(frozen=True)
class PulseStep:
    """One constant pulse: unitary = exp(-i angle * generator)."""

    label: str
    generator: np.ndarray
    angle: float
    duration: float

    def unitary(self):
        return expm(-1j * self.angle * self.generator)

    def hamiltonian(self):
        """Physical Hamiltonian realizing the step over its duration."""
        return (self.angle / self.duration) * self.generator


@dataclass(frozen=True)
class PulseSequence:
    """Time-ordered non-overlapping pulses; first step listed first."""

    steps: tuple
    amplitude_bound: float

    @property
    def total_duration(self):
        return float(sum(step.duration for step in self.steps))

    def unitary(self):
        u = np.eye(4, dtype=complex)
        for step in self.steps:
            u = step.unitary() @ u
        return u

    def segments(self):
        """(hamiltonian, duration) pairs for master-equation propagation."""
        return [(step.hamiltonian(), step.duration) for step in self.steps]


#: Spectral-norm amplitude every pulse of the reference protocol runs at,
#: in units of pi/t0. The sequenced protocol is assumed to run its pulses
#: at a common weak field comparable to the smallest control the one-step
#: construction uses (|eps1| = 0.25); the default places the one-step
#: gate at ~11% of the sequence duration, inside the published
#: "about 15% of the time" band.
DEFAULT_PROTOCOL_AMPLITUDE = 0.2


#: Reservoir temperature (reduced units) the protocol comparison runs at
#: by default. The relative standing of the two protocols depends on how
#: much thermal dephasing the idling z-type pulses of the sequence pick
#: up; at this temperature (still below the inter-pair gaps of the
#: one-step gate) the one-step construction keeps roughly an order of
#: magnitude of purity advantage, as published.
COMPARISON_TEMPERATURE = 1.5


def protocol_comparison(nm=None, amplitude_bound=None, steps_per_segment=300):
    """One-step CNOT vs the five-step protocol under the same noise.

    Returns a dict with both purity traces, the duration ratio (one-step
    over sequence) and the purity-loss ratio (sequence over one-step).
    """
    from .noise import NoiseModel
    from .redfield import gate_purity, sequence_gate_purity

    if nm is None:
        nm = NoiseModel.from_reduced(alpha=0.01, temperature=COMPARISON_TEMPERATURE)
    if amplitude_bound is None:
        amplitude_bound = DEFAULT_PROTOCOL_AMPLITUDE
    gate = onestep_cnot(refined=True)
    seq = standard_cnot_protocol(amplitude_bound)
    one = gate_purity(gate.params, nm)
    five = sequence_gate_purity(seq.segments(), nm, steps_per_segment=steps_per_segment)
    return {
        "onestep_trace": one,
        "fivestep_trace": five,
        "onestep_loss": one.loss(),
        "fivestep_loss": five.loss(),
        "duration_ratio": gate.params.t0 / seq.total_duration,
        "loss_ratio": five.loss() / one.loss() if one.loss() > 0 else np.inf,
        "sequence": seq,
        "noise": nm,
    }


def standard_cnot_protocol(amplitude_bound=DEFAULT_PROTOCOL_AMPLITUDE):
    """The standard five-pulse CNOT decomposition as a timed sequence.

    Time-ordered steps (first applied first):

        exp(-i pi/2 (sx2+sz2)/sqrt2), exp(-i pi/4 sz1 sz2),
        exp(+i pi/4 sz2), exp(+i pi/4 sz1), exp(-i pi/2 (sx2+sz2)/sqrt2).

    The single-qubit z rotations carry angle pi/4 (not the pi/2 that
    appears in print, which does not multiply to CNOT); the product is
    CNOT up to a global phase for any amplitude. Each step's duration is
    |angle| / (pi * amplitude_bound), i.e. every pulse runs at the same
    maximum generator norm ``amplitude_bound`` in units of pi/t0.
    """
    if amplitude_bound <= 0:
        raise InvalidParameterError("amplitude bound must be positive")
    amp = np.pi * amplitude_bound
    hadamard2 = (SX2 + SZ2) / np.sqrt(2.0)
    zz = SZ1 @ SZ2
    spec = [
        ("hadamard_q2", hadamard2, np.pi / 2.0),
        ("zz_quarter", zz, np.pi / 4.0),
        ("z_q2", -SZ2, np.pi / 4.0),
        ("z_q1", -SZ1, np.pi / 4.0),
        ("hadamard_q2", hadamard2, np.pi / 2.0),
    ]
    steps = tuple(
        PulseStep(label=label, generator=gen, angle=angle, duration=angle / amp)
        for label, gen, angle in spec
    )
    return PulseSequence(steps=steps, amplitude_bound=amplitude_bound)
