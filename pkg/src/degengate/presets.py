"""Bundled experiment configurations.

Each named experiment is a complete config; running it is a single CLI
invocation, e.g. ``degengate sweep --experiment paper:fig1``.
"""

import copy

from .errors import ConfigError

EXPERIMENTS = {
    # Exact one-step CNOT at its single-degeneracy point, desk-scale noise.
    "paper:cnot": {
        "experiment": "paper:cnot",
        "hamiltonian": {"construction": "cnot_onestep_refined"},
        "target": "CNOT",
        "noise": {"alpha": 0.01, "temperature": 0.2, "cutoff": 20.0},
        "seed": 1,
    },
    # One-step B-class gate at its double-degeneracy point.
    "paper:bgate": {
        "experiment": "paper:bgate",
        "hamiltonian": {"construction": "bgate_onestep_refined"},
        "target": "B",
        "noise": {"alpha": 0.01, "temperature": 0.2, "cutoff": 20.0},
        "seed": 1,
    },
    # Purity-decay-rate landscape over (Jy, Jz) at fixed |J| and locals,
    # zero temperature: the minimum sits on the double-degeneracy point.
    "paper:fig1": {
        "experiment": "paper:fig1",
        "sweep": {
            "param1": "jy",
            "param2": "jz",
            "start1": 0.10,
            "stop1": 1.70,
            "n1": 41,
            "start2": 0.48,
            "stop2": 2.08,
            "n2": 41,
            "fixed": {"delta1": 1.0, "delta2": 1.0},
            "closure": "jx_from_norm",
            "coupling_norm": 2.0615528128088303,
            "degeneracy_tol": 0.1,
        },
        "noise": {"alpha": 0.01, "temperature": 0.0, "cutoff": 20.0},
        "seed": 1,
    },
    # One-step CNOT vs the standard five-pulse protocol, equal pulse
    # amplitude, traces aligned on absolute time.
    "paper:fig2": {
        "experiment": "paper:fig2",
        "comparison": {
            "amplitude_bound": 0.2,
            "alpha": 0.01,
            "temperature": 1.5,
            "cutoff": 20.0,
        },
        "seed": 1,
    },
    # Device-parameter calibration and the resulting purity-loss estimates
    # for the B-class gate and the CNOT-class rectangular pulse.
    "paper:calibration": {
        "experiment": "paper:calibration",
        "calibrate": {
            "delta_ghz": 10.0,
            "j_ghz": 20.0,
            "t1_inverse_ghz": 0.1,
            "temperature_kelvin": None,
        },
        "seed": 1,
    },
}


def experiment_config(name):
    if name not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {name!r}; known: {', '.join(sorted(EXPERIMENTS))}"
        )
    return copy.deepcopy(EXPERIMENTS[name])
