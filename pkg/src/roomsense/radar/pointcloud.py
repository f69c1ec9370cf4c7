"""Azimuth estimation across the virtual array and pointcloud assembly.

The 8 virtual channels sit half a wavelength apart, so a reflector at azimuth
phi (measured from boresight, positive toward +y in the radar frame) adds a
per-channel phase step of pi*sin(phi). A zero-padded FFT across channels puts
its peak at sin(phi) = bin/ (n_fft/2); shifted bins therefore cover exactly
sin(phi) in [-1, 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from .cfar import Detection
from .config import RadarConfig
from .dsp import velocity_of_doppler_bin

ANGLE_FFT_BINS = 256  # zero-padded; peak quantization ~0.45 deg near boresight


@dataclass(frozen=True)
class CloudPoint:
    """Radar-frame detection: x along boresight, y left, z up (always 0 here).

    d is the radial velocity (m/s, positive receding), p the linear power.
    """

    x: float
    y: float
    z: float
    d: float
    p: float


def angle_spectrum(snapshot: np.ndarray, n_fft: int = ANGLE_FFT_BINS) -> np.ndarray:
    """|FFT|^2 across virtual channels, shifted; index i -> sin(phi) = (i - n/2)/(n/2)."""
    return np.abs(np.fft.fftshift(np.fft.fft(snapshot, n=n_fft))) ** 2


def _angle_peaks(spectrum: np.ndarray, max_peaks: int, rel_threshold: float,
                 min_separation: int) -> list[int]:
    """Greedy strongest-first peak picking with a minimum bin separation."""
    order = np.argsort(spectrum)[::-1]
    floor = rel_threshold * spectrum[order[0]]
    peaks: list[int] = []
    for idx in order:
        if spectrum[idx] < floor or len(peaks) >= max_peaks:
            break
        if all(abs(int(idx) - p) >= min_separation for p in peaks):
            peaks.append(int(idx))
    return peaks


def to_pointcloud(detections: list[Detection], cube: np.ndarray,
                  config: RadarConfig, max_peaks: int = 2,
                  rel_threshold: float = 0.3) -> list[CloudPoint]:
    """Expand CFAR detections into radar-frame points with azimuth.

    cube: complex doppler spectra per virtual channel [V x D x R] (rd_cube).
    Detections beyond the usable range bins are dropped. A detection cell may
    hold several reflectors at distinct azimuths; up to max_peaks points are
    emitted with the cell power split by peak strength.
    """
    if cube.ndim != 3 or cube.shape[0] != config.virtual_rx:
        raise ConfigError(
            f"expected cube [V x D x R] with V={config.virtual_rx}, got {cube.shape}")
    if config.virtual_rx < 2:
        raise ConfigError("azimuth needs at least two virtual channels")

    # first-null offset of the 8-element array in padded-FFT bins; anything
    # closer is main-lobe shoulder, not a second reflector
    min_sep = ANGLE_FFT_BINS // config.virtual_rx
    half = ANGLE_FFT_BINS // 2

    points: list[CloudPoint] = []
    for det in detections:
        if det.range_bin > config.usable_range_bins:
            continue
        r = det.range_bin * config.range_resolution_m
        v = velocity_of_doppler_bin(det.doppler_bin, config)
        spectrum = angle_spectrum(cube[:, det.doppler_bin, det.range_bin])
        peaks = _angle_peaks(spectrum, max_peaks, rel_threshold, min_sep)
        if not peaks:
            continue
        weights = spectrum[peaks]
        weights = weights / weights.sum()
        for peak, w in zip(peaks, weights):
            sin_phi = (peak - half) / half
            if not -1.0 <= sin_phi <= 1.0:
                continue
            phi = np.arcsin(sin_phi)
            points.append(CloudPoint(
                x=r * float(np.cos(phi)),
                y=r * float(np.sin(phi)),
                z=0.0,
                d=v,
                p=det.power * float(w),
            ))
    return points
