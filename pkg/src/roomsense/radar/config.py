"""Radar operating profiles and the signal parameters derived from them.

Three chirp profiles share one 77-81 GHz front end (2 TX x 4 RX, 8 virtual
channels). The sweep occupies the full 4 GHz band; range resolution is set by
the effective bandwidth actually used by the range FFT, so the effective
bandwidth is derived from the profile's range resolution, and the chirp time
is derived so that the profile's maximum radial velocity sits exactly at the
doppler alias edge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from ..errors import ConfigError

C_LIGHT = 299_792_458.0  # m/s


class Profile(Enum):
    LOCALIZATION = "localization"
    MACRO = "macro"
    MICRO = "micro"


# wire codes for frame logs
PROFILE_CODES = {Profile.LOCALIZATION: 0, Profile.MACRO: 1, Profile.MICRO: 2}
PROFILES_BY_CODE = {v: k for k, v in PROFILE_CODES.items()}


@dataclass(frozen=True)
class RadarConfig:
    """One operating profile of the FMCW front end.

    Attributes:
        chirps_per_frame: physical chirps transmitted per frame (N).
        adc_samples_per_chirp: IF samples digitized per chirp.
        tdm_factor: chirp decimation mapping physical chirps to doppler
            samples (2 when the two TX antennas alternate, 1 otherwise).
        range_decimation: ADC decimation applied before the range FFT.
        doppler_bins: doppler rows D of the output map (zero-padded if the
            profile has fewer doppler samples than D).
        clutter_halfwidth: doppler rows on each side of zero treated as
            static return.
    """

    profile: Profile
    start_freq_hz: float
    end_freq_hz: float
    fps: float
    chirps_per_frame: int
    adc_samples_per_chirp: int
    tdm_factor: int
    range_decimation: int
    doppler_bins: int
    range_bins: int
    range_resolution_m: float
    max_range_m: float
    max_radial_velocity_mps: float
    velocity_resolution_mps: float
    azimuth_resolution_deg: float
    virtual_rx: int
    clutter_halfwidth: int

    def __post_init__(self):
        if self.end_freq_hz <= self.start_freq_hz:
            raise ConfigError("sweep must end above its start frequency")
        if self.chirps_per_frame % self.tdm_factor:
            raise ConfigError("chirps_per_frame must divide evenly across TDM slots")
        if self.adc_samples_per_chirp % self.range_decimation:
            raise ConfigError("ADC count must be divisible by range_decimation")
        if self.adc_samples_per_chirp // self.range_decimation != self.range_bins:
            raise ConfigError("range FFT length must equal range_bins")
        if self.doppler_bins < self.doppler_samples:
            raise ConfigError("doppler_bins cannot be fewer than doppler samples")
        for name in ("fps", "range_resolution_m", "max_range_m",
                     "max_radial_velocity_mps", "velocity_resolution_mps"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.virtual_rx < 1:
            raise ConfigError("need at least one virtual channel")

    # -- derived quantities -------------------------------------------------

    @property
    def bandwidth_hz(self) -> float:
        return self.end_freq_hz - self.start_freq_hz

    @property
    def effective_bandwidth_hz(self) -> float:
        # portion of the sweep the range FFT integrates over
        return C_LIGHT / (2.0 * self.range_resolution_m)

    @property
    def wavelength_m(self) -> float:
        center = 0.5 * (self.start_freq_hz + self.end_freq_hz)
        return C_LIGHT / center

    @property
    def chirp_time_s(self) -> float:
        # places max_radial_velocity exactly at the doppler alias edge
        return self.wavelength_m / (4.0 * self.max_radial_velocity_mps * self.tdm_factor)

    @property
    def doppler_sample_period_s(self) -> float:
        return self.chirp_time_s * self.tdm_factor

    @property
    def doppler_samples(self) -> int:
        return self.chirps_per_frame // self.tdm_factor

    @property
    def doppler_bin_spacing_mps(self) -> float:
        # exact grid spacing; velocity_resolution_mps is the reported figure
        return 2.0 * self.max_radial_velocity_mps / self.doppler_bins

    @property
    def slope_hz_per_s(self) -> float:
        return self.effective_bandwidth_hz / self.chirp_time_s

    @property
    def sample_rate_hz(self) -> float:
        return self.adc_samples_per_chirp / self.chirp_time_s

    @property
    def usable_range_bins(self) -> int:
        # bins past max_range sit in the receiver roll-off; detections there
        # are discarded
        return int(math.floor(self.max_range_m / self.range_resolution_m))

    @property
    def frame_period_s(self) -> float:
        return 1.0 / self.fps

    @property
    def stack_channels(self) -> int:
        # heatmap frames stacked over one second for classification
        return int(round(self.fps))


def localization_profile() -> RadarConfig:
    return RadarConfig(
        profile=Profile.LOCALIZATION,
        start_freq_hz=77e9,
        end_freq_hz=81e9,
        fps=30.0,
        chirps_per_frame=32,
        adc_samples_per_chirp=256,
        tdm_factor=2,
        range_decimation=1,
        doppler_bins=16,
        range_bins=256,
        range_resolution_m=0.0436,
        max_range_m=9.02,
        max_radial_velocity_mps=1.0,
        velocity_resolution_mps=0.13,
        azimuth_resolution_deg=14.5,
        virtual_rx=8,
        clutter_halfwidth=1,
    )


def macro_profile() -> RadarConfig:
    # same chirp geometry as localization, lower frame rate
    base = localization_profile()
    return RadarConfig(**{**_fields(base), "profile": Profile.MACRO, "fps": 5.0})


def micro_profile() -> RadarConfig:
    return RadarConfig(
        profile=Profile.MICRO,
        start_freq_hz=77e9,
        end_freq_hz=81e9,
        fps=2.0,
        chirps_per_frame=64,
        adc_samples_per_chirp=256,
        tdm_factor=1,
        range_decimation=4,
        doppler_bins=128,
        range_bins=64,
        range_resolution_m=0.125,
        max_range_m=6.4,
        max_radial_velocity_mps=0.64,
        velocity_resolution_mps=0.01,
        azimuth_resolution_deg=14.5,
        virtual_rx=8,
        clutter_halfwidth=1,
    )


def profile_config(profile: Profile) -> RadarConfig:
    return {
        Profile.LOCALIZATION: localization_profile,
        Profile.MACRO: macro_profile,
        Profile.MICRO: micro_profile,
    }[profile]()


def _fields(cfg: RadarConfig) -> dict:
    return {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
