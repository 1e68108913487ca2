"""Long-term discriminative correlation filter tracking with whole-image re-detection."""
from .config import RunConfig
from .errors import (ConfigError, ContractViolation, CorrTrackError, FormatError,
                     InitializationError, TrackingError)
from .tracker import FrameRecord, LongTermTracker, track_sequence

__all__ = ["RunConfig", "ConfigError", "ContractViolation", "CorrTrackError", "FormatError",
           "InitializationError", "TrackingError", "FrameRecord", "LongTermTracker",
           "track_sequence"]
__version__ = "0.1.0"
