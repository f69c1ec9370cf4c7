"""CNN building blocks: conv math, gradients, slicing, serialization."""
import math

import numpy as np
import pytest

from roomsense.cnn.layers import (Conv2D, Dense, Dropout, GlobalAvgPool, ReLU,
                                  cross_entropy, he_uniform, same_pad, softmax,
                                  softmax_ce_grad)
from roomsense.cnn.model import (CNN_MAGIC, MACRO_INPUT, MICRO_INPUT, CnnModel,
                                 macro_model, micro_model)
from roomsense.cnn.slicing import (PAD_BINS, HeatmapStack, slice_subject,
                                   stack_frames, subject_range_bins)
from roomsense.cnn.train import TrainConfig, stratified_split, train_model
from roomsense.errors import (DimensionError, DiscontinuityError, DomainError,
                              InsufficientDataError)
from roomsense.radar.config import Profile, profile_config
from roomsense.radar.frames import RangeDopplerMap
from roomsense.scoring import per_class_f1, weighted_f1


# -- padding and shapes ------------------------------------------------------------

def test_same_pad_output_law():
    rng = np.random.default_rng(0)
    for _ in range(200):
        size = int(rng.integers(1, 300))
        kernel = int(rng.integers(1, 8))
        stride = int(rng.integers(1, 5))
        out, before, after = same_pad(size, kernel, stride)
        assert out == math.ceil(size / stride)
        total = before + after
        assert total == max((out - 1) * stride + kernel - size, 0)
        assert 0 <= before - after + 1 <= 1      # extra pad goes after


def test_macro_architecture_shapes():
    model = macro_model(seed=0)
    x = np.zeros((2, *MACRO_INPUT), dtype=np.float32)
    shapes = []
    out = x
    for layer in model.layers:
        out = layer.forward(out)
        shapes.append(out.shape)
    assert shapes[0] == (2, 32, 16, 128)     # conv 2x5, stride 1x2
    assert shapes[2] == (2, 64, 16, 64)
    assert shapes[4] == (2, 96, 16, 32)
    assert shapes[6] == (2, 96, 16, 16)
    assert shapes[8] == (2, 96)              # global average pool
    assert out.shape == (2, 10)


def test_micro_architecture_shapes():
    model = micro_model(seed=0)
    x = np.zeros((3, *MICRO_INPUT), dtype=np.float32)
    out = x
    shapes = []
    for layer in model.layers:
        out = layer.forward(out)
        shapes.append(out.shape)
    assert shapes[0] == (3, 32, 64, 64)      # conv 3x2, stride 2x1
    assert shapes[2] == (3, 64, 32, 32)
    assert shapes[4] == (3, 96, 16, 16)
    assert shapes[6] == (3, 96)
    assert out.shape == (3, 9)


# -- convolution vs naive oracle ------------------------------------------------------

def naive_conv(x, w, b, stride):
    """Triple-loop same-padded convolution, float64."""
    bs, cin, h, wd = x.shape
    kh, kw, _, cout = w.shape
    sh, sw = stride
    oh, pt, pb = same_pad(h, kh, sh)
    ow, pl, pr = same_pad(wd, kw, sw)
    xp = np.pad(x.astype(np.float64), ((0, 0), (0, 0), (pt, pb), (pl, pr)))
    out = np.zeros((bs, cout, oh, ow))
    for n in range(bs):
        for co in range(cout):
            for i in range(oh):
                for j in range(ow):
                    patch = xp[n, :, i * sh:i * sh + kh, j * sw:j * sw + kw]
                    out[n, co, i, j] = (patch * w[:, :, :, co].transpose(2, 0, 1)).sum()
            out[n, co] += b[co]
    return out


@pytest.mark.parametrize("kernel,stride", [((2, 3), (1, 2)), ((3, 2), (2, 1)),
                                           ((3, 3), (2, 2))])
def test_conv_forward_matches_naive(kernel, stride):
    rng = np.random.default_rng(3)
    conv = Conv2D(3, 4, kernel, stride, rng)
    x = rng.normal(size=(2, 3, 9, 11)).astype(np.float32)
    got = conv.forward(x)
    want = naive_conv(x, conv.w, conv.b, stride)
    np.testing.assert_allclose(got, want, atol=1e-5)


def test_conv_is_affine_in_input():
    rng = np.random.default_rng(4)
    conv = Conv2D(2, 3, (3, 3), (1, 1), rng, dtype=np.float64)
    x1 = rng.normal(size=(1, 2, 8, 8))
    x2 = rng.normal(size=(1, 2, 8, 8))
    zero = conv.forward(np.zeros_like(x1))
    lin = lambda x: conv.forward(x) - zero
    np.testing.assert_allclose(lin(2.5 * x1 - 1.5 * x2),
                               2.5 * lin(x1) - 1.5 * lin(x2), atol=1e-10)


def test_conv_rejects_wrong_channels():
    conv = Conv2D(3, 4, (2, 2), (1, 1), np.random.default_rng(0))
    with pytest.raises(DimensionError):
        conv.forward(np.zeros((1, 2, 5, 5), dtype=np.float32))


# -- gradient checks -----------------------------------------------------------------

def fd_gradient_check(model, x, y, n_probe=12, h=1e-5, seed=0):
    """Central finite differences on randomly probed weights, float64."""
    rng = np.random.default_rng(seed)
    model.loss_and_backward(x, y, training=False)
    # snapshot: later probe evaluations overwrite the live gradient buffers
    base_grads = [g.copy() for g in model.gradients()]
    worst = 0.0
    for p, g in zip(model.parameters(), base_grads):
        flat_p, flat_g = p.ravel(), g.ravel()
        for idx in rng.choice(flat_p.size, size=min(n_probe, flat_p.size),
                              replace=False):
            keep = flat_p[idx]
            flat_p[idx] = keep + h
            lp, _ = model.loss_and_backward(x, y, training=False)
            flat_p[idx] = keep - h
            lm, _ = model.loss_and_backward(x, y, training=False)
            flat_p[idx] = keep
            fd = (lp - lm) / (2 * h)
            denom = max(abs(fd), abs(flat_g[idx]), 1e-8)
            worst = max(worst, abs(fd - flat_g[idx]) / denom)
    return worst


def tiny_model(seed=0, n_classes=3):
    rng = np.random.default_rng(seed)
    layers = [Conv2D(2, 4, (3, 3), (2, 2), rng, dtype=np.float64), ReLU(),
              GlobalAvgPool(), Dense(4, n_classes, rng, dtype=np.float64)]
    return CnnModel(layers, (2, 8, 10), n_classes)


def test_backprop_matches_finite_differences():
    rng = np.random.default_rng(1)
    model = tiny_model()
    x = rng.normal(size=(4, 2, 8, 10))
    y = np.array([0, 1, 2, 1])
    worst = fd_gradient_check(model, x, y)
    assert worst < 1e-6


def test_dense_backward_matches_finite_differences():
    rng = np.random.default_rng(2)
    model = CnnModel([GlobalAvgPool(), Dense(3, 2, rng, dtype=np.float64)],
                     (3, 4, 4), 2)
    x = rng.normal(size=(5, 3, 4, 4))
    y = np.array([0, 1, 1, 0, 1])
    assert fd_gradient_check(model, x, y, n_probe=8) < 1e-7


# -- layer behaviors -----------------------------------------------------------------

def test_gap_is_permutation_invariant():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(2, 3, 4, 6))
    gap = GlobalAvgPool()
    base = gap.forward(x)
    flat = x.reshape(2, 3, -1)
    perm = rng.permutation(24)
    shuffled = flat[:, :, perm].reshape(2, 3, 4, 6)
    np.testing.assert_allclose(gap.forward(shuffled), base, atol=1e-12)


def test_dropout_identity_outside_training():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(3, 5)).astype(np.float32)
    drop = Dropout(0.4)
    np.testing.assert_array_equal(drop.forward(x, training=False), x)
    np.testing.assert_array_equal(
        Dropout(0.0).forward(x, training=True, rng=rng), x)
    out = drop.forward(x, training=True, rng=rng)
    kept = out != 0
    np.testing.assert_allclose(out[kept], x[kept] / 0.6, rtol=1e-6)
    with pytest.raises(DimensionError):
        Dropout(1.0)


def test_softmax_rows_normalized_and_shift_invariant():
    rng = np.random.default_rng(7)
    logits = rng.normal(0, 10, size=(40, 9))
    probs = softmax(logits)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
    np.testing.assert_allclose(softmax(logits + 123.0), probs, atol=1e-12)
    uniform = softmax(np.zeros((2, 10)))
    np.testing.assert_allclose(uniform, 0.1, atol=1e-15)


def test_cross_entropy_and_gradient():
    rng = np.random.default_rng(8)
    logits = rng.normal(size=(6, 4))
    y = rng.integers(0, 4, size=6)
    probs = softmax(logits)
    assert cross_entropy(probs, y) > 0
    grad = softmax_ce_grad(probs, y, dtype=np.float64)
    # finite difference on the scalar CE directly
    h = 1e-6
    for i in range(6):
        for j in range(4):
            lp, lm = logits.copy(), logits.copy()
            lp[i, j] += h
            lm[i, j] -= h
            fd = (cross_entropy(softmax(lp), y) - cross_entropy(softmax(lm), y)) / (2 * h)
            assert grad[i, j] == pytest.approx(fd, abs=1e-6)
    perfect = np.eye(4)[y]
    assert cross_entropy(perfect, y) == pytest.approx(0.0, abs=1e-9)


def test_he_uniform_bounds():
    rng = np.random.default_rng(9)
    w = he_uniform((100, 50), fan_in=50, rng=rng)
    limit = np.sqrt(6.0 / 50)
    assert np.all(np.abs(w) <= limit)
    assert w.std() == pytest.approx(2 * limit / np.sqrt(12), rel=0.1)


# -- subject slicing ------------------------------------------------------------------

def rd_of(power, cfg, t=0.0):
    return RangeDopplerMap(power=power, config=cfg, timestamp=t, radar_angle=0.0)


def test_slice_subject_window_and_flood(loc_cfg):
    rng = np.random.default_rng(10)
    power = rng.uniform(1.0, 2.0, (loc_cfg.doppler_bins, loc_cfg.range_bins))
    b = 100
    out = slice_subject(rd_of(power, loc_cfg), b)
    lo, hi = b - PAD_BINS, b + PAD_BINS + 1
    np.testing.assert_array_equal(out.power[:, lo:hi], power[:, lo:hi])
    flooded = np.delete(out.power, np.s_[lo:hi], axis=1)
    assert np.all(flooded == power.min())
    # idempotent
    again = slice_subject(out, b)
    np.testing.assert_array_equal(again.power, out.power)


def test_slice_subject_edge_clamps(loc_cfg):
    rng = np.random.default_rng(11)
    power = rng.uniform(1.0, 2.0, (loc_cfg.doppler_bins, loc_cfg.range_bins))
    out = slice_subject(rd_of(power, loc_cfg), 0)
    np.testing.assert_array_equal(out.power[:, :PAD_BINS + 1],
                                  power[:, :PAD_BINS + 1])
    last = loc_cfg.range_bins - 1
    out = slice_subject(rd_of(power, loc_cfg), last)
    np.testing.assert_array_equal(out.power[:, -PAD_BINS - 1:],
                                  power[:, -PAD_BINS - 1:])
    with pytest.raises(DomainError):
        slice_subject(rd_of(power, loc_cfg), loc_cfg.range_bins)
    with pytest.raises(DomainError):
        slice_subject(rd_of(power, loc_cfg), -1)


def test_subject_range_bins_gates_on_moving_energy(loc_cfg):
    d, r = loc_cfg.doppler_bins, loc_cfg.range_bins
    mid = d // 2
    power = np.full((d, r), 1e-6)
    res = loc_cfg.range_resolution_m
    power[mid + 4, 80] = 50.0          # moving subject at bin 80
    power[mid, 120] = 50.0             # static-only energy at bin 120
    rd = rd_of(power, loc_cfg)
    subjects = [(1, 80 * res), (2, 120 * res), (3, 81 * res), (4, 500.0)]
    got = subject_range_bins(subjects, rd)
    assert (1, 80) in got              # direct hit
    assert (3, 81) in got              # one-off rounding still sees bin 80
    assert all(sid != 2 for sid, _ in got)   # purely static: filtered
    assert all(sid != 4 for sid, _ in got)   # outside the map


def test_stack_frames_normalization_and_guards(macro_cfg):
    period = macro_cfg.frame_period_s
    rng = np.random.default_rng(12)
    base = rng.uniform(0.9, 1.1, (macro_cfg.doppler_bins, macro_cfg.range_bins))
    base[4, 10] = 1e7                  # far above the 50 dB cap
    base[5, 10] = 10.0 ** 2.5          # 25 dB SNR -> half scale
    base[6, 10] = 0.5                  # under the noise floor
    maps = [rd_of(base, macro_cfg, t=i * period)
            for i in range(macro_cfg.stack_channels)]
    st = stack_frames(maps, subject_id=4)
    assert st.tensor.shape == (macro_cfg.stack_channels, macro_cfg.doppler_bins,
                               macro_cfg.range_bins)
    assert st.tensor.dtype == np.float32
    assert st.tensor[0, 4, 10] == pytest.approx(1.0)
    assert st.tensor[0, 5, 10] == pytest.approx(0.5, abs=0.01)
    assert st.tensor[0, 6, 10] == 0.0
    # noise cells hug the floor, far from feature brightness
    assert float(np.median(st.tensor)) < 0.01
    assert st.tensor.min() >= 0.0 and st.tensor.max() <= 1.0
    assert st.subject_id == 4 and st.window_start == 0.0

    # featureless stacks stay dark: nothing rises above their own floor
    flat = [rd_of(np.full((macro_cfg.doppler_bins, macro_cfg.range_bins), 2.0),
                  macro_cfg, t=i * period) for i in range(macro_cfg.stack_channels)]
    assert np.all(stack_frames(flat).tensor == 0.0)
    dark = [rd_of(np.zeros((macro_cfg.doppler_bins, macro_cfg.range_bins)),
                  macro_cfg, t=i * period) for i in range(macro_cfg.stack_channels)]
    assert np.all(stack_frames(dark).tensor == 0.0)

    with pytest.raises(DimensionError):
        stack_frames(maps[:-1])
    with pytest.raises(DimensionError):
        stack_frames([])
    gappy = maps[:-1] + [rd_of(maps[-1].power, macro_cfg,
                               t=maps[-1].timestamp + 1.0)]
    with pytest.raises(DiscontinuityError):
        stack_frames(gappy)
    backwards = maps[:-1] + [rd_of(maps[-1].power, macro_cfg,
                                   t=maps[-2].timestamp)]
    with pytest.raises(DiscontinuityError):
        stack_frames(backwards)


def test_stack_frames_rejects_mixed_profiles(macro_cfg, micro_cfg):
    period = macro_cfg.frame_period_s
    maps = [rd_of(np.ones((macro_cfg.doppler_bins, macro_cfg.range_bins)),
                  macro_cfg, t=i * period)
            for i in range(macro_cfg.stack_channels - 1)]
    odd = rd_of(np.ones((micro_cfg.doppler_bins, micro_cfg.range_bins)),
                micro_cfg, t=(macro_cfg.stack_channels - 1) * period)
    with pytest.raises(DimensionError):
        stack_frames(maps + [odd])


def test_heatmap_stack_validates_rank():
    with pytest.raises(DimensionError):
        HeatmapStack(tensor=np.zeros((4, 4)), subject_id=0, window_start=0.0)


# -- training loop ---------------------------------------------------------------------

def test_stratified_split_proportions_and_disjointness():
    y = np.array([0] * 40 + [1] * 20 + [2] * 10)
    rest, held = stratified_split(y, 0.3, np.random.default_rng(0))
    assert set(rest) & set(held) == set()
    assert len(rest) + len(held) == 70
    assert [int((y[held] == c).sum()) for c in range(3)] == [12, 6, 3]
    rest2, held2 = stratified_split(y, 0.3, np.random.default_rng(0))
    np.testing.assert_array_equal(held, held2)


def separable_toy():
    """Horizontal vs vertical bars at random positions.

    Position cannot separate the classes through a global average pool, but
    orientation can, so passing requires actual pattern learning.
    """
    rng = np.random.default_rng(13)
    n = 160
    x = rng.uniform(0.0, 0.02, size=(n, 2, 8, 10)).astype(np.float32)
    y = np.arange(n) % 2
    for i in range(n):
        r, c = rng.integers(0, 4), rng.integers(0, 6)
        if y[i] == 0:
            x[i, :, r + 2, c:c + 4] += 2.0
        else:
            x[i, :, r:r + 4, c + 2] += 2.0
    return x, y


def test_training_solves_separable_toy():
    x, y = separable_toy()
    model = tiny_model(seed=3, n_classes=2)
    res = train_model(model, x.astype(np.float64), y,
                      TrainConfig(seed=0, epochs=150, batch_size=8,
                                  learning_rate=1e-2, patience=150))
    assert res.test_accuracy == 1.0
    assert res.test_f1 == 1.0
    assert res.best_epoch < len(res.history)


def test_train_model_requires_every_class():
    x, y = separable_toy()
    with pytest.raises(InsufficientDataError):
        train_model(tiny_model(n_classes=2), x, np.zeros_like(y),
                    TrainConfig(epochs=1))


def test_weighted_f1_known_case():
    y_true = [0, 0, 0, 1, 1, 2]
    y_pred = [0, 0, 1, 1, 1, 0]
    f1 = per_class_f1(y_true, y_pred, 3)
    assert f1[0] == pytest.approx(2 * 2 / (2 * 2 + 1 + 1))
    assert f1[1] == pytest.approx(2 * 2 / (2 * 2 + 1 + 0))
    assert f1[2] == 0.0
    want = (f1[0] * 3 + f1[1] * 2 + f1[2] * 1) / 6
    assert weighted_f1(y_true, y_pred, 3) == pytest.approx(want)


# -- serialization ------------------------------------------------------------------------

def test_model_bytes_round_trip():
    model = micro_model(seed=5)
    rng = np.random.default_rng(14)
    x = rng.uniform(0, 1, size=(3, *MICRO_INPUT)).astype(np.float32)
    blob = model.dump_bytes()
    assert blob.startswith(b"mars-cnn v1\n")
    back = CnnModel.load_bytes(blob)
    assert back.input_shape == MICRO_INPUT and back.n_classes == 9
    np.testing.assert_array_equal(back.predict(x), model.predict(x))
    np.testing.assert_allclose(back.predict_proba(x), model.predict_proba(x),
                               atol=1e-7)
    assert back.dump_bytes() == blob


def test_model_file_round_trip(tmp_path):
    model = macro_model(seed=2)
    path = tmp_path / "net.bin"
    model.save(path)
    back = CnnModel.load(path)
    rng = np.random.default_rng(15)
    x = rng.uniform(0, 1, size=(2, *MACRO_INPUT)).astype(np.float32)
    np.testing.assert_array_equal(back.predict(x), model.predict(x))


def test_model_load_rejects_corruption():
    blob = micro_model(seed=0).dump_bytes()
    with pytest.raises(DimensionError):
        CnnModel.load_bytes(b"mars-cnn v2\n" + blob[len(CNN_MAGIC):])
    with pytest.raises(DimensionError):
        CnnModel.load_bytes(blob + b"\x00")
    bad = bytearray(blob)
    bad[len(CNN_MAGIC) + 20] = 200       # first layer code -> unknown
    with pytest.raises(DimensionError):
        CnnModel.load_bytes(bytes(bad))


def test_forward_rejects_wrong_input_shape():
    model = micro_model(seed=0)
    with pytest.raises(DimensionError):
        model.forward(np.zeros((1, 5, 16, 256), dtype=np.float32))
