"""Exact simulation and stability analysis of chunk-based file-sharing networks."""

from .kernel import (
    EstimateSummary,
    InvalidParameterError,
    ModelError,
    ReplicationError,
    RngStream,
    StoppingRule,
    Trajectory,
    replicate,
    run_ctmc,
    summarize,
)

__version__ = "0.1.0"
