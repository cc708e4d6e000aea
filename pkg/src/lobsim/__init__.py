"""Markovian limit-order-book simulation and analysis toolkit."""

from .book import BookParams, Event, LobState, MidSpread, mid_and_spread, validate_state
from .config import RunConfig, TOOL_VERSION, config_hash, load_config
from .distributions import GeometricBook, GeometricBoundary
from .drift import (
    AssumptionReport,
    DriftCertificate,
    check_assumptions,
    drift_check_ctmc,
    drift_check_embedded,
    lyapunov,
    scan_states,
)
from .errors import (
    AbsorbingStateError,
    ConfigError,
    DivergentBoundaryMomentError,
    EmptyScanError,
    IllConditionedError,
    InvalidEventError,
    LobsimError,
    RadiusExceededError,
    ReducibleError,
    SignPatternViolation,
    StateSpaceTooLargeError,
    WindowTooLargeError,
)
from .models import (
    PoissonK1Model,
    PoissonK1Params,
    PoissonKModel,
    PoissonKParams,
    QueueReactiveModel,
    QueueReactiveParams,
    RateModel,
    ZeroIntelligenceModel,
    ZeroIntelligenceParams,
    build_model,
    default_model,
    generating_function,
    validate_params,
)
from .oracle import (
    ShapeStatistics,
    TruncatedGenerator,
    shape_statistics,
    stationary_solve,
    truncated_generator,
    tv_distance,
)
from .scaling import ScalingReport, scaling_report, sigma2_series
from .simulate import CsvEventSink, PathSummary, batch_simulate, simulate

__version__ = TOOL_VERSION

__all__ = [
    "AbsorbingStateError",
    "AssumptionReport",
    "BookParams",
    "CsvEventSink",
    "ConfigError",
    "DivergentBoundaryMomentError",
    "DriftCertificate",
    "EmptyScanError",
    "Event",
    "GeometricBook",
    "GeometricBoundary",
    "IllConditionedError",
    "InvalidEventError",
    "LobsimError",
    "LobState",
    "MidSpread",
    "PathSummary",
    "PoissonK1Model",
    "PoissonK1Params",
    "PoissonKModel",
    "PoissonKParams",
    "QueueReactiveModel",
    "QueueReactiveParams",
    "RadiusExceededError",
    "RateModel",
    "ReducibleError",
    "RunConfig",
    "ScalingReport",
    "ShapeStatistics",
    "SignPatternViolation",
    "StateSpaceTooLargeError",
    "TruncatedGenerator",
    "WindowTooLargeError",
    "ZeroIntelligenceModel",
    "ZeroIntelligenceParams",
    "batch_simulate",
    "build_model",
    "check_assumptions",
    "config_hash",
    "default_model",
    "drift_check_ctmc",
    "drift_check_embedded",
    "generating_function",
    "load_config",
    "lyapunov",
    "mid_and_spread",
    "scaling_report",
    "scan_states",
    "shape_statistics",
    "sigma2_series",
    "simulate",
    "stationary_solve",
    "truncated_generator",
    "tv_distance",
    "validate_params",
    "validate_state",
]
