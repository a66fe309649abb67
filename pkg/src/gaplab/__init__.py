"""Numerical checks of eigenvalue-gap estimates for Schrodinger operators -Laplacian + V."""

from .eigen import SpectrumResult, dense_oracle, smallest_two, weighted_rayleigh
from .errors import (ConfigError, DomainError, EmptyMask, ExtrapolationUnstable, GapLabError,
                     HypothesisFailed, NoConvergence, NotADisk, ZeroDenominator)
from .geometry import DomainGrid, DomainMetrics, DomainSpec, build_grid, metrics, refine
from .operator import DiscreteOperator, apply, assemble, dump_matrix
from .potential import PotentialField, PotentialSpec, sample
from .runner import RunConfig, converge, oracle, parse_config, run, sweep

__all__ = [
    "SpectrumResult", "dense_oracle", "smallest_two", "weighted_rayleigh", "ConfigError", "DomainError",
    "EmptyMask", "ExtrapolationUnstable", "GapLabError", "HypothesisFailed", "NoConvergence", "NotADisk",
    "ZeroDenominator", "DomainGrid", "DomainMetrics", "DomainSpec", "build_grid", "metrics", "refine",
    "DiscreteOperator", "apply", "assemble", "dump_matrix", "PotentialField", "PotentialSpec", "sample",
    "RunConfig", "converge", "oracle", "parse_config", "run", "sweep",
]
