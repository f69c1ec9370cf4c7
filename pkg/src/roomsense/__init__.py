"""Multi-user mmWave activity sensing: radar front end, tracking, scale
classification, macro/micro CNNs and the opportunistic orchestrator that
ties them together over one rotating radar.
"""
from .errors import (ConfigError, DimensionError, DiscontinuityError,
                     DomainError, FrameLogError, InsufficientDataError,
                     NumericalError, ScenarioError)
from .labels import (ALL_LABELS, MACRO_LABELS, MICRO_LABELS, ActivityLabel,
                     ScaleClass, scale_of)
from .modes import Mode, TransitionReason
from .radar.config import Profile, RadarConfig, profile_config

__version__ = "1.0.0"

__all__ = [
    "ActivityLabel", "ScaleClass", "scale_of",
    "ALL_LABELS", "MACRO_LABELS", "MICRO_LABELS",
    "Mode", "TransitionReason",
    "Profile", "RadarConfig", "profile_config",
    "ConfigError", "DimensionError", "DiscontinuityError", "DomainError",
    "FrameLogError", "InsufficientDataError", "NumericalError",
    "ScenarioError",
    "__version__",
]
