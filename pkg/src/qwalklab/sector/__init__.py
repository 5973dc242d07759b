"""Sector walk: exact transition laws, exact evolution, and Monte Carlo."""

from .core import (
    EvolveResult,
    SectorPoint,
    StepLaw,
    bias_check,
    evolve_exact,
    fold,
    transition_distribution,
)
from .walk import (
    HAVE_KERNEL,
    TailExperiment,
    WalkStats,
    clt_summary,
    simulate,
    tail_experiment,
    trajectory_generator,
)

__all__ = [
    "EvolveResult",
    "SectorPoint",
    "StepLaw",
    "bias_check",
    "evolve_exact",
    "fold",
    "transition_distribution",
    "HAVE_KERNEL",
    "TailExperiment",
    "WalkStats",
    "clt_summary",
    "simulate",
    "tail_experiment",
    "trajectory_generator",
]
