"""Deterministic small-arena locating system: simulator, solvers, evaluation.

The package models a rectangular desk-scale arena ringed by fixed
anchors, a tag ranging against them one slot at a time over a TDMA
superframe, and the downstream position solving and error evaluation.
Every stochastic step derives from a single integer seed.
"""

from .constants import SPEED_OF_LIGHT_M_S
from .errors import (
    CapacityExceededError,
    ConfigError,
    DegenerateGeometryError,
    DegenerateInputError,
    DomainError,
    InsufficientDataError,
    NoOverlapError,
    SchemaError,
    UwbError,
)
from .evaluation import (
    Alignment,
    ErrorStats,
    GroundTruthTrack,
    align,
    error_stats,
    gaussian_pdf,
    percent_distance_error,
)
from .localization import (
    AnchorSet,
    Multilaterator,
    PositionFix,
    combine_uncertainty,
    multilaterate_ls,
    trilaterate,
)
from .config import RunConfig
from .ranging import (
    ClockModel,
    RangingExchange,
    apply_clock_model,
    distance_from_tof,
    exchange_from_distance,
    exchange_from_tof,
    normalized_distance,
    tof_from_distance,
    tof_from_exchange,
)
from .rf import (
    ChannelParams,
    LinkBudget,
    channel_capacity_bps,
    db_to_linear,
    free_space_range,
    linear_to_db,
    link_budget,
    path_loss_db,
    penetration_depth_m,
    range_resolution_m,
    snr_db,
    wavelength,
)
from .sim import (
    ArenaConfig,
    Measurement,
    NoiseModel,
    Rect,
    Trajectory,
    classify_los,
    fixes_from_measurements,
    simulate,
    success_ratio,
)
from .tdma import (
    Assignment,
    Schedule,
    SuperframeConfig,
    build_schedule,
    rotate_anchor,
    validate_schedule,
)

__version__ = "0.1.0"

__all__ = [
    "SPEED_OF_LIGHT_M_S",
    "UwbError",
    "DomainError",
    "DegenerateGeometryError",
    "DegenerateInputError",
    "InsufficientDataError",
    "CapacityExceededError",
    "NoOverlapError",
    "SchemaError",
    "ConfigError",
    "ChannelParams",
    "LinkBudget",
    "wavelength",
    "free_space_range",
    "path_loss_db",
    "snr_db",
    "linear_to_db",
    "db_to_linear",
    "channel_capacity_bps",
    "range_resolution_m",
    "penetration_depth_m",
    "link_budget",
    "RangingExchange",
    "ClockModel",
    "exchange_from_tof",
    "exchange_from_distance",
    "tof_from_exchange",
    "distance_from_tof",
    "tof_from_distance",
    "normalized_distance",
    "apply_clock_model",
    "SuperframeConfig",
    "Assignment",
    "Schedule",
    "build_schedule",
    "validate_schedule",
    "rotate_anchor",
    "AnchorSet",
    "PositionFix",
    "trilaterate",
    "multilaterate_ls",
    "combine_uncertainty",
    "Multilaterator",
    "ArenaConfig",
    "NoiseModel",
    "Trajectory",
    "Rect",
    "Measurement",
    "classify_los",
    "simulate",
    "fixes_from_measurements",
    "success_ratio",
    "GroundTruthTrack",
    "Alignment",
    "ErrorStats",
    "align",
    "error_stats",
    "gaussian_pdf",
    "percent_distance_error",
    "RunConfig",
    "__version__",
]
