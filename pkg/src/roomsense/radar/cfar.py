"""Two-dimensional cell-averaging CFAR detector.

The noise level for each cell under test is the mean of the training ring
(full window minus guard box). The threshold multiplier alpha follows the
exponential-noise calibration alpha = N * (pfa^(-1/N) - 1), which is exact
for |FFT|^2 cells of white complex Gaussian noise. The doppler axis wraps
(it is circular after the FFT); the range axis clamps (edge cells reuse the
boundary columns).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import ConfigError
from .frames import RangeDopplerMap


@dataclass(frozen=True)
class CfarParams:
    guard_cells: int = 2      # per side, per dimension
    training_cells: int = 4   # per side, per dimension
    target_pfa: float = 1e-3

    def __post_init__(self):
        if self.guard_cells < 0 or self.training_cells < 1:
            raise ConfigError("guard >= 0 and training >= 1 cells required")
        if not 0.0 < self.target_pfa < 1.0:
            raise ConfigError("target_pfa must sit strictly inside (0, 1)")

    @property
    def half_window(self) -> int:
        return self.guard_cells + self.training_cells

    @property
    def n_training(self) -> int:
        full = (2 * self.half_window + 1) ** 2
        guard = (2 * self.guard_cells + 1) ** 2
        return full - guard

    @property
    def alpha(self) -> float:
        n = self.n_training
        return n * (self.target_pfa ** (-1.0 / n) - 1.0)


class Detection(NamedTuple):
    doppler_bin: int
    range_bin: int
    power: float


def _window_sums(arr: np.ndarray, half: int) -> np.ndarray:
    """Sum over the (2*half+1)^2 box around every cell of the padded array."""
    # integral image with a leading zero row/col
    s = np.zeros((arr.shape[0] + 1, arr.shape[1] + 1))
    np.cumsum(arr, axis=0, out=s[1:, 1:])
    np.cumsum(s[1:, 1:], axis=1, out=s[1:, 1:])
    k = 2 * half + 1
    return (s[k:, k:] - s[:-k, k:] - s[k:, :-k] + s[:-k, :-k])


def cfar_detect(rd_map: RangeDopplerMap, params: CfarParams) -> list[Detection]:
    """Detections above the adaptive threshold, strongest first.

    Ties are broken by ascending (range_bin, doppler_bin).
    """
    power = np.asarray(rd_map.power, dtype=float)
    d_bins, r_bins = power.shape
    h, g = params.half_window, params.guard_cells
    if 2 * h + 1 > d_bins or 2 * h + 1 > r_bins:
        raise ConfigError(
            f"CFAR window {2 * h + 1} exceeds map {power.shape}")

    padded = np.pad(power, ((h, h), (0, 0)), mode="wrap")
    padded = np.pad(padded, ((0, 0), (h, h)), mode="edge")
    full = _window_sums(padded, h)
    inner = padded[h - g: padded.shape[0] - (h - g),
                   h - g: padded.shape[1] - (h - g)]
    guard = _window_sums(inner, g)
    training_mean = (full - guard) / params.n_training

    mask = power > params.alpha * training_mean
    d_idx, r_idx = np.nonzero(mask)
    hits = sorted(
        (Detection(int(d), int(r), float(power[d, r])) for d, r in zip(d_idx, r_idx)),
        key=lambda det: (-det.power, det.range_bin, det.doppler_bin),
    )
    return hits
