"""Neural-net layers: conv/relu/pool/dropout/dense plus softmax loss.

Convolution uses 'same' padding with the ceil(in/stride) output-size rule
and is evaluated as one GEMM per kernel offset, which keeps the arithmetic
in BLAS without materializing im2col buffers.
"""
from __future__ import annotations

import numpy as np

from ..errors import DimensionError


def same_pad(size: int, kernel: int, stride: int) -> tuple[int, int, int]:
    """(out_size, pad_before, pad_after) for 'same' semantics."""
    out = -(-size // stride)  # ceil
    total = max((out - 1) * stride + kernel - size, 0)
    before = total // 2
    return out, before, total - before


def he_uniform(shape: tuple, fan_in: int, rng: np.random.Generator,
               dtype=np.float32) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Layer:
    """Forward/backward pair; params/grads are parallel lists."""

    params: list = []
    grads: list = []

    def forward(self, x: np.ndarray, training: bool = False,
                rng: np.random.Generator | None = None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Conv2D(Layer):
    def __init__(self, in_channels: int, out_channels: int,
                 kernel: tuple[int, int], stride: tuple[int, int],
                 rng: np.random.Generator, dtype=np.float32):
        self.kh, self.kw = kernel
        self.sh, self.sw = stride
        self.cin, self.cout = in_channels, out_channels
        fan_in = self.kh * self.kw * in_channels
        self.w = he_uniform((self.kh, self.kw, in_channels, out_channels),
                            fan_in, rng, dtype)
        self.b = np.zeros(out_channels, dtype=dtype)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self.params = [self.w, self.b]
        self.grads = [self.dw, self.db]
        self._cache = None

    def forward(self, x, training=False, rng=None):
        if x.ndim != 4 or x.shape[1] != self.cin:
            raise DimensionError(f"conv expects [B, {self.cin}, H, W], got {x.shape}")
        b, _, h, w = x.shape
        oh, pt, pb = same_pad(h, self.kh, self.sh)
        ow, pl, pr = same_pad(w, self.kw, self.sw)
        xp = np.pad(x, ((0, 0), (0, 0), (pt, pb), (pl, pr)))
        acc = np.zeros((b, oh, ow, self.cout), dtype=x.dtype)
        for i in range(self.kh):
            for j in range(self.kw):
                patch = xp[:, :, i:i + (oh - 1) * self.sh + 1:self.sh,
                           j:j + (ow - 1) * self.sw + 1:self.sw]
                acc += np.tensordot(patch, self.w[i, j], axes=([1], [0]))
        self._cache = (xp, x.shape, (pt, pl), (oh, ow))
        return acc.transpose(0, 3, 1, 2) + self.b[None, :, None, None]

    def backward(self, dout):
        xp, x_shape, (pt, pl), (oh, ow) = self._cache
        d_acc = np.ascontiguousarray(dout.transpose(0, 2, 3, 1))
        self.db[...] = dout.sum(axis=(0, 2, 3))
        dxp = np.zeros_like(xp)
        for i in range(self.kh):
            for j in range(self.kw):
                rows = slice(i, i + (oh - 1) * self.sh + 1, self.sh)
                cols = slice(j, j + (ow - 1) * self.sw + 1, self.sw)
                patch = xp[:, :, rows, cols]
                self.dw[i, j] = np.tensordot(patch, d_acc, axes=([0, 2, 3], [0, 1, 2]))
                dxp[:, :, rows, cols] += np.tensordot(
                    d_acc, self.w[i, j], axes=([3], [1])).transpose(0, 3, 1, 2)
        _, _, h, w = x_shape
        return dxp[:, :, pt:pt + h, pl:pl + w]


class ReLU(Layer):
    def __init__(self):
        self._mask = None

    def forward(self, x, training=False, rng=None):
        self._mask = x > 0
        return x * self._mask

    def backward(self, dout):
        return dout * self._mask


class GlobalAvgPool(Layer):
    """[B, C, H, W] -> [B, C]; permutation-invariant over the spatial grid."""

    def __init__(self):
        self._shape = None

    def forward(self, x, training=False, rng=None):
        self._shape = x.shape
        return x.mean(axis=(2, 3))

    def backward(self, dout):
        b, c, h, w = self._shape
        return np.broadcast_to(dout[:, :, None, None] / (h * w), self._shape).copy()


class Dropout(Layer):
    """Inverted dropout; identity when not training."""

    def __init__(self, rate: float):
        if not 0.0 <= rate < 1.0:
            raise DimensionError(f"dropout rate {rate} outside [0, 1)")
        self.rate = rate
        self._mask = None

    def forward(self, x, training=False, rng=None):
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) < keep).astype(x.dtype) / keep
        return x * self._mask

    def backward(self, dout):
        if self._mask is None:
            return dout
        return dout * self._mask


class Dense(Layer):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator,
                 dtype=np.float32):
        self.n_in, self.n_out = n_in, n_out
        self.w = he_uniform((n_in, n_out), n_in, rng, dtype)
        self.b = np.zeros(n_out, dtype=dtype)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self.params = [self.w, self.b]
        self.grads = [self.dw, self.db]
        self._x = None

    def forward(self, x, training=False, rng=None):
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise DimensionError(f"dense expects [B, {self.n_in}], got {x.shape}")
        self._x = x
        return x @ self.w + self.b

    def backward(self, dout):
        self.dw[...] = self._x.T @ dout
        self.db[...] = dout.sum(axis=0)
        return dout @ self.w.T


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax in float64 for a stable, exactly-normalized output."""
    z = logits.astype(np.float64)
    z -= z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(probs: np.ndarray, targets: np.ndarray,
                  eps: float = 1e-12) -> float:
    picked = probs[np.arange(len(targets)), targets]
    return float(-np.log(np.maximum(picked, eps)).mean())


def softmax_ce_grad(probs: np.ndarray, targets: np.ndarray,
                    dtype=np.float32) -> np.ndarray:
    """d(mean CE)/d(logits) = (softmax - onehot) / batch."""
    grad = probs.copy()
    grad[np.arange(len(targets)), targets] -= 1.0
    return (grad / len(targets)).astype(dtype)
