"""FMCW fast-time/slow-time processing: beat frequencies, range and doppler FFTs.

Conventions:
  * periodic Hann windows on both FFT axes, so a tone exactly on a bin (in
    particular a perfectly static target at zero doppler) leaks only into the
    two adjacent bins;
  * doppler axis fftshifted, zero doppler at row D/2; approaching targets
    (positive range rate away from the radar is positive d) land above it;
  * maps carry linear power (|.|^2); dB only at presentation.
"""
from __future__ import annotations

import numpy as np

from ..errors import DimensionError, DomainError
from .config import C_LIGHT, RadarConfig
from .frames import ChirpFrame, RangeDopplerMap


def hann_periodic(n: int) -> np.ndarray:
    """DFT-periodic Hann window; exact 3-bin spectrum for on-bin tones."""
    k = np.arange(n)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * k / n)


def beat_frequency(distance_m: float, config: RadarConfig) -> float:
    """IF beat frequency of a reflector at the given distance (Hz)."""
    if not 0.0 <= distance_m <= config.max_range_m:
        raise DomainError(
            f"distance {distance_m} m outside [0, {config.max_range_m}] m")
    round_trip = 2.0 * distance_m / C_LIGHT
    return config.slope_hz_per_s * round_trip


def range_of_bin(bin_index: int, config: RadarConfig) -> float:
    """Center distance of a range bin (m)."""
    if not 0 <= bin_index < config.range_bins:
        raise DomainError(f"range bin {bin_index} outside [0, {config.range_bins})")
    return bin_index * config.range_resolution_m


def range_fft(chirp: np.ndarray, config: RadarConfig) -> np.ndarray:
    """Windowed range FFT of one chirp; returns complex length range_bins."""
    if chirp.shape != (config.adc_samples_per_chirp,):
        raise DimensionError(
            f"chirp has {chirp.shape[0] if chirp.ndim == 1 else chirp.shape} samples,"
            f" profile wants {config.adc_samples_per_chirp}")
    x = chirp[:: config.range_decimation]
    spec = np.fft.fft(x * hann_periodic(x.shape[0]))
    return spec[: config.range_bins]


def range_profiles(frame: ChirpFrame) -> np.ndarray:
    """Range FFT of every chirp in a frame -> complex [N x range_bins]."""
    cfg = frame.config
    x = frame.samples[:, :: cfg.range_decimation]
    spec = np.fft.fft(x * hann_periodic(x.shape[1])[None, :], axis=1)
    return spec[:, : cfg.range_bins]


def doppler_spectrum(profiles: np.ndarray, config: RadarConfig) -> np.ndarray:
    """Complex doppler spectrum [D x R] from range profiles [N x R].

    TDM channels alternate chirps, so the doppler sample stream is the chirp
    sequence decimated by tdm_factor; profiles with fewer doppler samples than
    doppler_bins are zero-padded (interpolated grid).
    """
    if profiles.shape != (config.chirps_per_frame, config.range_bins):
        raise DimensionError(
            f"range profiles are {profiles.shape}, profile wants "
            f"{(config.chirps_per_frame, config.range_bins)}")
    sub = profiles[:: config.tdm_factor]
    win = hann_periodic(sub.shape[0])[:, None]
    spec = np.fft.fft(sub * win, n=config.doppler_bins, axis=0)
    return np.fft.fftshift(spec, axes=0)


def doppler_fft(profiles: np.ndarray, config: RadarConfig,
                timestamp: float = 0.0, radar_angle: float = 0.0) -> RangeDopplerMap:
    """Linear-power range-doppler map from range profiles [N x R]."""
    spec = doppler_spectrum(profiles, config)
    power = np.abs(spec) ** 2
    return RangeDopplerMap(power=power, config=config,
                           timestamp=timestamp, radar_angle=radar_angle)


def rd_map_from_frame(frame: ChirpFrame) -> RangeDopplerMap:
    """Full fast-time/slow-time chain for one virtual channel."""
    return doppler_fft(range_profiles(frame), frame.config,
                       timestamp=frame.timestamp, radar_angle=frame.radar_angle)


def rd_cube(frames: list[ChirpFrame]) -> np.ndarray:
    """Complex doppler spectra of all virtual channels -> [V x D x R]."""
    if not frames:
        raise DimensionError("no frames given")
    cfg = frames[0].config
    out = np.empty((len(frames), cfg.doppler_bins, cfg.range_bins), dtype=complex)
    for i, frame in enumerate(frames):
        if frame.config.profile is not cfg.profile:
            raise DimensionError("mixed profiles in one frame bundle")
        out[i] = doppler_spectrum(range_profiles(frame), cfg)
    return out


def doppler_bin_of_velocity(velocity_mps: float, config: RadarConfig) -> int:
    """Map a radial velocity to its (alias-wrapped) doppler row."""
    step = config.doppler_bin_spacing_mps
    return (config.doppler_bins // 2 + int(round(velocity_mps / step))) % config.doppler_bins


def velocity_of_doppler_bin(bin_index: int, config: RadarConfig) -> float:
    """Radial velocity at the center of a doppler row."""
    if not 0 <= bin_index < config.doppler_bins:
        raise DomainError(f"doppler bin {bin_index} outside [0, {config.doppler_bins})")
    return (bin_index - config.doppler_bins // 2) * config.doppler_bin_spacing_mps
