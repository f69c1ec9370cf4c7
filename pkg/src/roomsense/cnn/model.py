"""Activity-recognition CNNs: architecture builders and model container.

Two fixed stacks share the container: a four-conv net over macro heatmap
stacks [5 x 16 x 256] with 10 outputs, and a three-conv net over micro
stacks [2 x 128 x 64] with 9 outputs.
"""
from __future__ import annotations

import io
import struct

import numpy as np

from ..errors import DimensionError
from ..labels import MACRO_LABELS, MICRO_LABELS
from .layers import (Conv2D, Dense, Dropout, GlobalAvgPool, Layer, ReLU,
                     cross_entropy, softmax, softmax_ce_grad)

CNN_MAGIC = b"mars-cnn v1\n"

MACRO_INPUT = (5, 16, 256)
MICRO_INPUT = (2, 128, 64)

_LAYER_CODES = {Conv2D: 1, ReLU: 2, GlobalAvgPool: 3, Dropout: 4, Dense: 5}


class CnnModel:
    """Ordered layer stack ending in logits; softmax applied at the loss."""

    def __init__(self, layers: list[Layer], input_shape: tuple[int, int, int],
                 n_classes: int):
        self.layers = layers
        self.input_shape = input_shape
        self.n_classes = n_classes

    def forward(self, x: np.ndarray, training: bool = False,
                rng: np.random.Generator | None = None) -> np.ndarray:
        if x.ndim != 4 or x.shape[1:] != self.input_shape:
            raise DimensionError(
                f"expected [B, {self.input_shape}] input, got {x.shape}")
        out = x
        for layer in self.layers:
            out = layer.forward(out, training=training, rng=rng)
        return out

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.forward(x, training=False))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(x), axis=1)

    def loss_and_backward(self, x: np.ndarray, y: np.ndarray,
                          training: bool = True,
                          rng: np.random.Generator | None = None,
                          ) -> tuple[float, np.ndarray]:
        """Cross-entropy loss; fills every layer's grads. Returns (loss, probs)."""
        logits = self.forward(x, training=training, rng=rng)
        probs = softmax(logits)
        loss = cross_entropy(probs, y)
        grad = softmax_ce_grad(probs, y, dtype=logits.dtype)
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return loss, probs

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads]

    def set_parameters(self, values: list[np.ndarray]):
        params = self.parameters()
        if len(values) != len(params):
            raise DimensionError("parameter count mismatch")
        for p, v in zip(params, values):
            p[...] = v

    # -- serialization (mars-cnn v1: layer specs + row-major f32 LE weights) --

    def dump_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(CNN_MAGIC)
        c, d, r = self.input_shape
        buf.write(struct.pack("<IIIII", len(self.layers), c, d, r, self.n_classes))
        for layer in self.layers:
            code = _LAYER_CODES[type(layer)]
            buf.write(struct.pack("<B", code))
            if isinstance(layer, Conv2D):
                buf.write(struct.pack("<IIIIII", layer.kh, layer.kw, layer.sh,
                                      layer.sw, layer.cin, layer.cout))
                buf.write(layer.w.astype("<f4").tobytes())
                buf.write(layer.b.astype("<f4").tobytes())
            elif isinstance(layer, Dropout):
                buf.write(struct.pack("<d", layer.rate))
            elif isinstance(layer, Dense):
                buf.write(struct.pack("<II", layer.n_in, layer.n_out))
                buf.write(layer.w.astype("<f4").tobytes())
                buf.write(layer.b.astype("<f4").tobytes())
        return buf.getvalue()

    @classmethod
    def load_bytes(cls, blob: bytes) -> "CnnModel":
        if not blob.startswith(CNN_MAGIC):
            raise DimensionError("not a cnn model file")
        off = len(CNN_MAGIC)
        n_layers, c, d, r, k = struct.unpack_from("<IIIII", blob, off)
        off += struct.calcsize("<IIIII")
        rng = np.random.default_rng(0)  # weights are overwritten below

        def take_f32(count):
            nonlocal off
            arr = np.frombuffer(blob, dtype="<f4", count=count, offset=off)
            off += arr.nbytes
            return arr.copy()

        layers: list[Layer] = []
        for _ in range(n_layers):
            (code,) = struct.unpack_from("<B", blob, off)
            off += 1
            if code == 1:
                kh, kw, sh, sw, cin, cout = struct.unpack_from("<IIIIII", blob, off)
                off += struct.calcsize("<IIIIII")
                conv = Conv2D(cin, cout, (kh, kw), (sh, sw), rng)
                conv.w[...] = take_f32(kh * kw * cin * cout).reshape(kh, kw, cin, cout)
                conv.b[...] = take_f32(cout)
                layers.append(conv)
            elif code == 2:
                layers.append(ReLU())
            elif code == 3:
                layers.append(GlobalAvgPool())
            elif code == 4:
                (rate,) = struct.unpack_from("<d", blob, off)
                off += 8
                layers.append(Dropout(rate))
            elif code == 5:
                n_in, n_out = struct.unpack_from("<II", blob, off)
                off += 8
                dense = Dense(n_in, n_out, rng)
                dense.w[...] = take_f32(n_in * n_out).reshape(n_in, n_out)
                dense.b[...] = take_f32(n_out)
                layers.append(dense)
            else:
                raise DimensionError(f"unknown layer code {code}")
        if off != len(blob):
            raise DimensionError("trailing bytes in model file")
        return cls(layers=layers, input_shape=(c, d, r), n_classes=k)

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.dump_bytes())

    @classmethod
    def load(cls, path) -> "CnnModel":
        with open(path, "rb") as fh:
            return cls.load_bytes(fh.read())


def _conv_block(cin, cout, kernel, stride, rng, dtype):
    return [Conv2D(cin, cout, kernel, stride, rng, dtype), ReLU()]


def macro_model(seed: int = 0, dtype=np.float32) -> CnnModel:
    """Conv(2x5,s1x2,32) x1, Conv(2x3,s1x2) x3 -> GAP -> Dense 32 -> 10 logits."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 2)))
    layers = (_conv_block(5, 32, (2, 5), (1, 2), rng, dtype)
              + _conv_block(32, 64, (2, 3), (1, 2), rng, dtype)
              + _conv_block(64, 96, (2, 3), (1, 2), rng, dtype)
              + _conv_block(96, 96, (2, 3), (1, 2), rng, dtype)
              + [GlobalAvgPool(), Dropout(0.2),
                 Dense(96, 32, rng, dtype), ReLU(), Dropout(0.1),
                 Dense(32, len(MACRO_LABELS), rng, dtype)])
    return CnnModel(layers, MACRO_INPUT, len(MACRO_LABELS))


def micro_model(seed: int = 0, dtype=np.float32) -> CnnModel:
    """Conv(3x2,s2x1,32) -> Conv(3x3,s2x2,64) -> Conv(3x3,s2x2,96) -> 9 logits."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 3)))
    layers = (_conv_block(2, 32, (3, 2), (2, 1), rng, dtype)
              + _conv_block(32, 64, (3, 3), (2, 2), rng, dtype)
              + _conv_block(64, 96, (3, 3), (2, 2), rng, dtype)
              + [GlobalAvgPool(), Dropout(0.2),
                 Dense(96, 32, rng, dtype), ReLU(), Dropout(0.1),
                 Dense(32, len(MICRO_LABELS), rng, dtype)])
    return CnnModel(layers, MICRO_INPUT, len(MICRO_LABELS))
