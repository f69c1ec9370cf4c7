"""Shared helpers: inline IF-signal synthesis independent of the simulator.

The helpers here build chirp samples straight from the FMCW geometry
(beat tone + per-chirp doppler phase step), so DSP tests check the library
against physics rather than against the package's own scene synthesizer.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from roomsense.radar.config import (RadarConfig, localization_profile,
                                    macro_profile, micro_profile)
from roomsense.radar.frames import ChirpFrame


@pytest.fixture(scope="session")
def loc_cfg() -> RadarConfig:
    return localization_profile()


@pytest.fixture(scope="session")
def macro_cfg() -> RadarConfig:
    return macro_profile()


@pytest.fixture(scope="session")
def micro_cfg() -> RadarConfig:
    return micro_profile()


def if_samples(cfg: RadarConfig, distance_m: float, velocity_mps: float = 0.0,
               amplitude: float = 1.0, phase0: float = 0.0,
               extra_phase: float = 0.0) -> np.ndarray:
    """IF samples [N x M] for one point reflector on one channel.

    Beat tone at f_b = slope * 2d/c; phase advances 4*pi*v*T_c/lambda per
    physical chirp (positive v = receding). extra_phase models the
    per-channel azimuth step pi*sin(phi)*k.
    """
    n = np.arange(cfg.chirps_per_frame)[:, None]
    m = np.arange(cfg.adc_samples_per_chirp)[None, :]
    f_beat = cfg.slope_hz_per_s * 2.0 * distance_m / 299_792_458.0
    dphi = 4.0 * math.pi * velocity_mps * cfg.chirp_time_s / cfg.wavelength_m
    return amplitude * np.exp(1j * (2.0 * math.pi * f_beat * m / cfg.sample_rate_hz
                                    + dphi * n + phase0 + extra_phase))


def target_frame(cfg: RadarConfig, distance_m: float, velocity_mps: float = 0.0,
                 noise_std: float = 0.0, seed: int = 0,
                 timestamp: float = 0.0) -> ChirpFrame:
    """Single-channel frame holding one reflector plus optional noise."""
    rng = np.random.default_rng(seed)
    x = if_samples(cfg, distance_m, velocity_mps)
    if noise_std > 0.0:
        shape = x.shape
        x = x + noise_std * (rng.standard_normal(shape)
                             + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    return ChirpFrame(samples=x, config=cfg, timestamp=timestamp)


def target_cube_frames(cfg: RadarConfig, distance_m: float, sin_phi: float,
                       velocity_mps: float = 0.0, amplitude: float = 1.0,
                       timestamp: float = 0.0) -> list[ChirpFrame]:
    """One frame per virtual channel with the azimuth phase progression."""
    frames = []
    for k in range(cfg.virtual_rx):
        x = if_samples(cfg, distance_m, velocity_mps, amplitude=amplitude,
                       extra_phase=math.pi * sin_phi * k)
        frames.append(ChirpFrame(samples=x, config=cfg, timestamp=timestamp))
    return frames
