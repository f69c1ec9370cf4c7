"""Pipeline operating modes and the reasons modes change."""
from __future__ import annotations

from enum import IntEnum

from .radar.config import Profile


class Mode(IntEnum):
    LOCALIZE = 1
    MACRO_SENSE = 2
    MICRO_SENSE = 3

    @property
    def profile(self) -> Profile:
        return _MODE_PROFILE[self]


_MODE_PROFILE = {
    Mode.LOCALIZE: Profile.LOCALIZATION,
    Mode.MACRO_SENSE: Profile.MACRO,
    Mode.MICRO_SENSE: Profile.MICRO,
}


class TransitionReason(IntEnum):
    STARTUP = 0
    SCALE_DECISION = 1      # majority vote of per-subject scale predictions
    TIME_SHARE = 2          # dwell expired with both scales demanded
    REVERT_ACTIVITY = 3     # walking/running predicted while sensing
    REVERT_ENERGY = 4       # doppler energy left the expected envelope
    REVERT_EMPTY = 5        # nothing left to sense
