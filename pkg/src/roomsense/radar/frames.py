"""Frame containers passed between the synthesizer and the DSP chain."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError
from .config import RadarConfig


@dataclass
class ChirpFrame:
    """Raw IF samples of one frame on one virtual channel.

    samples: complex [chirps_per_frame x adc_samples_per_chirp]
    radar_angle: boresight orientation (rad, global frame) while transmitting.
    """

    samples: np.ndarray
    config: RadarConfig
    timestamp: float
    radar_angle: float = 0.0

    def __post_init__(self):
        expected = (self.config.chirps_per_frame, self.config.adc_samples_per_chirp)
        if self.samples.shape != expected:
            raise DimensionError(
                f"chirp frame is {self.samples.shape}, profile wants {expected}")
        if not np.iscomplexobj(self.samples):
            raise DimensionError("chirp samples must be complex")


@dataclass
class RangeDopplerMap:
    """Linear-power doppler x range map, fftshifted so zero doppler is row D/2."""

    power: np.ndarray
    config: RadarConfig
    timestamp: float
    radar_angle: float = 0.0

    def __post_init__(self):
        expected = (self.config.doppler_bins, self.config.range_bins)
        if self.power.shape != expected:
            raise DimensionError(
                f"range-doppler map is {self.power.shape}, profile wants {expected}")
        if np.iscomplexobj(self.power):
            raise DimensionError("range-doppler map holds real power")
        if self.power.size and float(self.power.min()) < 0.0:
            raise DimensionError("power map has negative cells")
