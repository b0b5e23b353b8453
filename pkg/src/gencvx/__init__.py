"""Sampled second-order checks of quasiconvexity and pseudoconvexity for C^{1,1} functions."""

from .config import AnalysisConfig, load_config, parse_config
from .errors import (
    ConfigError,
    DegenerateSampling,
    DomainError,
    GencvxError,
    GradientMismatch,
    ParseError,
    QuadratureError,
)
from .expr import evaluate, parse, to_source
from .model import FunctionSpec
from .report import AnalysisReport, emit, run_analysis
from .settings import DEFAULT_SAMPLING, DEFAULT_TOLERANCES, SamplingConfig, Tolerances
from .types import ConditionStatus, Consistency, OracleStatus, Property, Witness

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "AnalysisReport", "ConditionStatus", "ConfigError", "Consistency",
    "DEFAULT_SAMPLING", "DEFAULT_TOLERANCES", "DegenerateSampling", "DomainError", "FunctionSpec",
    "GencvxError", "GradientMismatch", "OracleStatus", "ParseError", "Property", "QuadratureError",
    "SamplingConfig", "Tolerances", "Witness", "emit", "evaluate", "load_config", "parse",
    "parse_config", "run_analysis", "to_source",
]
