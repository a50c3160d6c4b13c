"""Event-triggered boundary control of axon growth on a moving domain."""

from .backstepping import ControllerGains, build_gain_artifacts, control_law, validate_gains
from .config import ExperimentConfig, build_config, load_config
from .model import PhysicalParams, derive_constants
from .simulation import RunResult, run_simulation
from .solver import SimState, SolverConfig
from .triggering import TriggerParams, dwell_time

__all__ = [
    "ControllerGains",
    "ExperimentConfig",
    "PhysicalParams",
    "RunResult",
    "SimState",
    "SolverConfig",
    "TriggerParams",
    "build_config",
    "build_gain_artifacts",
    "control_law",
    "derive_constants",
    "dwell_time",
    "load_config",
    "run_simulation",
    "validate_gains",
]
