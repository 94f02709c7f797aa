"""Gate-level simulation of the quantum sawtooth map under per-gate amplitude damping."""

__version__ = "0.1.0"

from .state import MapParams, make_params, basis_state, inner
from .circuit import Gate, GateSequence, build_map_sequence, apply_gate, apply_map_oracle
from .noise import NoiseModel, apply_channel_exact, stochastic_step, apply_noise_after_gate
from .engines import RunRecord, TrajectoryEnsemble, run_exact, run_trajectories, reconstruct_density
from .observables import (
    momentum_distribution,
    fidelity,
    fit_decay_rate,
    fidelity_timescale,
    ipr,
    ipr_ratio,
    husimi,
    PhaseSpaceDistribution,
)

__all__ = [
    "MapParams",
    "make_params",
    "basis_state",
    "inner",
    "Gate",
    "GateSequence",
    "build_map_sequence",
    "apply_gate",
    "apply_map_oracle",
    "NoiseModel",
    "apply_channel_exact",
    "stochastic_step",
    "apply_noise_after_gate",
    "RunRecord",
    "TrajectoryEnsemble",
    "run_exact",
    "run_trajectories",
    "reconstruct_density",
    "momentum_distribution",
    "fidelity",
    "fit_decay_rate",
    "fidelity_timescale",
    "ipr",
    "ipr_ratio",
    "husimi",
    "PhaseSpaceDistribution",
]
