from .orchestrator import OrchestratorOptions, run_partially_distributed, signaling_formula, admm_signaling_formula, complexity_estimate
from .baselines import run_baseline, mrt_beamformers, zf_beamformers
from .experiments import SweepResult, sweep

__all__ = [
    "OrchestratorOptions",
    "run_partially_distributed",
    "signaling_formula",
    "admm_signaling_formula",
    "complexity_estimate",
    "run_baseline",
    "mrt_beamformers",
    "zf_beamformers",
    "SweepResult",
    "sweep",
]
