"""Cascaded-SPDC multi-photon hyperentanglement: exact circuit simulation and
generation-rate statistics."""

from .circuits import (
    CascadeSpec,
    Circuit,
    Scheme,
    build_cascade,
    expected_state,
    simulate_stochastic,
    simulate_symbolic,
)
from .kernels import BACKEND
from .state import Amplitude, Photon, PhotonState, Pol, TimeBin, states_equal, tensor_factor_check
from .stats import SourceModel, n_tot, oracle_success, p_success, pr_pairs

__version__ = "0.1.0"

__all__ = [
    "Amplitude",
    "BACKEND",
    "CascadeSpec",
    "Circuit",
    "Photon",
    "PhotonState",
    "Pol",
    "Scheme",
    "SourceModel",
    "TimeBin",
    "build_cascade",
    "expected_state",
    "n_tot",
    "oracle_success",
    "p_success",
    "pr_pairs",
    "simulate_stochastic",
    "simulate_symbolic",
    "states_equal",
    "tensor_factor_check",
]
