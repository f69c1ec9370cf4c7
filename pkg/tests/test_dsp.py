"""Fast-time/slow-time DSP against first-principles signal synthesis."""
import math

import numpy as np
import pytest

from conftest import if_samples, target_frame
from roomsense.errors import DimensionError, DomainError
from roomsense.radar.dsp import (beat_frequency, doppler_bin_of_velocity,
                                 doppler_spectrum, hann_periodic,
                                 range_fft, range_profiles, rd_cube,
                                 rd_map_from_frame, range_of_bin,
                                 velocity_of_doppler_bin)
from roomsense.radar.frames import ChirpFrame


def test_beat_frequency_formula(loc_cfg):
    # independent derivation: f_b = S * 2d/c with S = B_eff / T_c
    rng = np.random.default_rng(7)
    for d in rng.uniform(0.3, 8.5, size=20):
        s = loc_cfg.effective_bandwidth_hz / loc_cfg.chirp_time_s
        expected = s * 2.0 * d / 299_792_458.0
        assert beat_frequency(d, loc_cfg) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DomainError):
        beat_frequency(-0.1, loc_cfg)
    with pytest.raises(DomainError):
        beat_frequency(loc_cfg.max_range_m + 1.0, loc_cfg)


def test_hann_periodic_dft_exactness():
    # an on-bin tone windowed by the periodic Hann occupies exactly 3 bins
    n = 64
    tone = np.exp(2j * np.pi * 10 * np.arange(n) / n)
    spec = np.abs(np.fft.fft(tone * hann_periodic(n)))
    hot = set(np.nonzero(spec > 1e-9)[0])
    assert hot == {9, 10, 11}


def test_range_fft_peak_bin_sweep(loc_cfg):
    rng = np.random.default_rng(3)
    for d in rng.uniform(0.5, 8.0, size=25):
        x = if_samples(loc_cfg, d)[0]
        spec = np.abs(range_fft(x, loc_cfg))
        expected = round(d / loc_cfg.range_resolution_m)
        assert abs(int(spec.argmax()) - expected) <= 1
    assert range_of_bin(50, loc_cfg) == pytest.approx(50 * 0.0436)
    with pytest.raises(DomainError):
        range_of_bin(loc_cfg.range_bins, loc_cfg)


def test_range_fft_rejects_wrong_length(loc_cfg):
    with pytest.raises(DimensionError):
        range_fft(np.zeros(100, dtype=complex), loc_cfg)


def test_range_decimation_micro(micro_cfg):
    # micro keeps every 4th ADC sample; a target at 3 m still lands on its bin
    x = if_samples(micro_cfg, 3.0)[0]
    spec = np.abs(range_fft(x, micro_cfg))
    assert spec.shape == (64,)
    assert abs(int(spec.argmax()) - round(3.0 / micro_cfg.range_resolution_m)) <= 1


def test_doppler_rows_follow_velocity(loc_cfg):
    # sweep the unambiguous span; the peak row must track the phase step
    for v in np.arange(-0.9, 0.95, 0.15):
        frame = target_frame(loc_cfg, 3.0, velocity_mps=float(v))
        rd = rd_map_from_frame(frame)
        r_bin = round(3.0 / loc_cfg.range_resolution_m)
        row = int(rd.power[:, r_bin].argmax())
        assert abs(row - doppler_bin_of_velocity(float(v), loc_cfg)) <= 1


def test_static_target_energy_confined_to_clutter_band(loc_cfg):
    frame = target_frame(loc_cfg, 3.0, velocity_mps=0.0)
    rd = rd_map_from_frame(frame)
    mid = loc_cfg.doppler_bins // 2
    r_bin = round(3.0 / loc_cfg.range_resolution_m)
    col = rd.power[:, r_bin]
    inside = col[mid - 1: mid + 2].sum()
    assert inside / col.sum() > 1.0 - 1e-9


def test_doppler_aliasing_wraps_exactly(loc_cfg):
    # 1.2 m/s rides 0.2 beyond the 1.0 m/s edge and lands where -0.8 would
    fast, alias = 1.2, 1.2 - 2.0 * loc_cfg.max_radial_velocity_mps
    assert doppler_bin_of_velocity(fast, loc_cfg) == \
        doppler_bin_of_velocity(alias, loc_cfg)
    rd = rd_map_from_frame(target_frame(loc_cfg, 3.0, velocity_mps=fast))
    r_bin = round(3.0 / loc_cfg.range_resolution_m)
    assert int(rd.power[:, r_bin].argmax()) == \
        doppler_bin_of_velocity(alias, loc_cfg)


def test_velocity_of_doppler_bin_roundtrip(loc_cfg, micro_cfg):
    for cfg in (loc_cfg, micro_cfg):
        for b in range(cfg.doppler_bins):
            v = velocity_of_doppler_bin(b, cfg)
            assert doppler_bin_of_velocity(v, cfg) == b
    with pytest.raises(DomainError):
        velocity_of_doppler_bin(-1, loc_cfg)


def test_doppler_spectrum_shape_and_zero_pad(loc_cfg):
    profiles = np.zeros((loc_cfg.chirps_per_frame, loc_cfg.range_bins),
                        dtype=complex)
    spec = doppler_spectrum(profiles, loc_cfg)
    assert spec.shape == (loc_cfg.doppler_bins, loc_cfg.range_bins)
    with pytest.raises(DimensionError):
        doppler_spectrum(profiles[:10], loc_cfg)


def test_rd_cube_stacks_channels(loc_cfg, micro_cfg):
    frames = [target_frame(loc_cfg, 2.0, seed=k) for k in range(3)]
    cube = rd_cube(frames)
    assert cube.shape == (3, loc_cfg.doppler_bins, loc_cfg.range_bins)
    single = doppler_spectrum(range_profiles(frames[0]), loc_cfg)
    np.testing.assert_array_equal(cube[0], single)
    bad = target_frame(micro_cfg, 2.0)
    with pytest.raises(DimensionError):
        rd_cube([frames[0], bad])
    with pytest.raises(DimensionError):
        rd_cube([])


def test_map_power_is_linear_squared_magnitude(loc_cfg):
    frame = target_frame(loc_cfg, 3.0, velocity_mps=0.4)
    rd = rd_map_from_frame(frame)
    spec = doppler_spectrum(range_profiles(frame), loc_cfg)
    np.testing.assert_allclose(rd.power, np.abs(spec) ** 2, rtol=1e-12)
    assert rd.power.min() >= 0.0
