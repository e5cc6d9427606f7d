"""Rigid-body pose estimation on SE(3) with prescribed-performance envelopes."""

from .filter import FilterGains, FilterState, error_state, filter_step, lyapunov
from .liegroup import Pose, Twist
from .ppf import PpfChannelConfig, PpfState, TransformedError
from .recon import ReferenceSet, reconstruct_pose
from .sim import RunRecord, ScenarioConfig, paper_scenario, run_scenario

__version__ = "0.1.0"

__all__ = [
    "FilterGains",
    "FilterState",
    "Pose",
    "PpfChannelConfig",
    "PpfState",
    "ReferenceSet",
    "RunRecord",
    "ScenarioConfig",
    "TransformedError",
    "Twist",
    "__version__",
    "error_state",
    "filter_step",
    "lyapunov",
    "paper_scenario",
    "reconstruct_pose",
    "run_scenario",
]
