"""Kalman filtering with a linearly reconfigurable observation matrix.

The observation matrix is constrained to the affine family
vec[C] = G a; at every filter step the parameters a are chosen under the
quadratic power constraint a^H G^H G a <= P to minimize either the sum
or the maximum per-component MSE of the state estimate.

Modules:

* :mod:`reconfigkf.linalg` — complex linear-algebra primitives;
* :mod:`reconfigkf.kalman` — MSE recursions and steady-state iteration;
* :mod:`reconfigkf.sdp` — small dense barrier-method SDP engine;
* :mod:`reconfigkf.vector_design` — two-stage vector-observation design;
* :mod:`reconfigkf.scalar_design` — Rayleigh / bisection scalar design;
* :mod:`reconfigkf.oracles` — independent brute-force validators;
* :mod:`reconfigkf.harness` — seeded experiments, sweeps, CSV/SVG;
* :mod:`reconfigkf.cli` — the ``reconfigkf`` command-line tool.
"""

from . import harness, kalman, linalg, oracles, policies, scalar_design, sdp, \
    vector_design
from .harness import ExperimentConfig, generate_system, run_sweep
from .kalman import (SystemModel, predict_mse, kalman_gain, update_mse,
                     update_mse_scalar, run_to_steady_state, simulate_trace)
from .scalar_design import minsum_scalar, minmax_scalar_bisection
from .vector_design import reconfigure, minsum_sdp, minmax_sdp

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "SystemModel",
    "generate_system",
    "run_sweep",
    "predict_mse",
    "kalman_gain",
    "update_mse",
    "update_mse_scalar",
    "run_to_steady_state",
    "simulate_trace",
    "reconfigure",
    "minsum_sdp",
    "minmax_sdp",
    "minsum_scalar",
    "minmax_scalar_bisection",
]
