"""
Kernel-convolved order-based dependent Dirichlet process models for
nonstationary, nonseparable space-time data, fitted with transdimensional
transformation-based MCMC.
"""

from .config import RunConfig
from .geometry import ComputationalBox, InvalidParameter, SpaceTimePoint, computational_region
from .model import Dataset, FixedState, VariableState, log_posterior
from .oddp import stick_weights, truncation_bound
from .synthgen import generate_synthetic
from .ttmcmc import SampleArchive, run, run_chains

__version__ = "0.1.0"

__all__ = [
    "ComputationalBox",
    "Dataset",
    "FixedState",
    "InvalidParameter",
    "RunConfig",
    "SampleArchive",
    "SpaceTimePoint",
    "VariableState",
    "computational_region",
    "generate_synthetic",
    "log_posterior",
    "run",
    "run_chains",
    "stick_weights",
    "truncation_bound",
]
