"""CNN training: Adam optimizer, stratified splits, early stop on val F1."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import InsufficientDataError
from ..scoring import weighted_f1
from .model import CnnModel


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 50
    seed: int = 0
    test_frac: float = 0.30
    val_frac: float = 0.20     # carved from the training portion
    patience: int = 10         # epochs without val-F1 improvement


class Adam:
    """Adaptive-moment gradient descent over a fixed parameter list."""

    def __init__(self, params: list[np.ndarray], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p, dtype=np.float64) for p in params]
        self.v = [np.zeros_like(p, dtype=np.float64) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]):
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g, dtype=np.float64)
            p -= (self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)).astype(p.dtype)


def stratified_split(labels: np.ndarray, frac: float, rng: np.random.Generator,
                     ) -> tuple[np.ndarray, np.ndarray]:
    """(rest, held_out) index split keeping per-class proportions."""
    rest, held = [], []
    for cls in np.unique(labels):
        idx = np.nonzero(labels == cls)[0]
        idx = rng.permutation(idx)
        n_held = int(round(frac * len(idx)))
        held.extend(idx[:n_held])
        rest.extend(idx[n_held:])
    return np.sort(np.array(rest, dtype=int)), np.sort(np.array(held, dtype=int))


@dataclass
class TrainResult:
    model: CnnModel
    history: list[dict] = field(default_factory=list)
    test_f1: float = 0.0
    test_accuracy: float = 0.0
    best_epoch: int = 0


def train_model(model: CnnModel, x: np.ndarray, y: np.ndarray,
                cfg: TrainConfig = TrainConfig(), verbose: bool = False,
                ) -> TrainResult:
    """Mini-batch Adam with 70/30 split, 20% validation, early stopping.

    Deterministic given cfg.seed: splits, shuffles and dropout masks all run
    off seeded child generators.
    """
    y = np.asarray(y, dtype=int)
    counts = np.bincount(y, minlength=model.n_classes)
    if (counts == 0).any():
        missing = int(np.nonzero(counts == 0)[0][0])
        raise InsufficientDataError(f"class {missing} has no training samples")

    root = np.random.SeedSequence((cfg.seed, 4))
    split_rng, init_order = np.random.default_rng(root.spawn(1)[0]), None
    train_idx, test_idx = stratified_split(y, cfg.test_frac, split_rng)
    fit_idx, val_idx = stratified_split(y[train_idx], cfg.val_frac, split_rng)
    fit_idx, val_idx = train_idx[fit_idx], train_idx[val_idx]

    optimizer = Adam(model.parameters(), lr=cfg.learning_rate)
    best_f1, best_epoch, best_params = -1.0, 0, None
    history = []
    for epoch in range(cfg.epochs):
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 5, epoch)))
        order = rng.permutation(fit_idx)
        losses = []
        t0 = time.monotonic()
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            loss, _ = model.loss_and_backward(x[batch], y[batch], training=True,
                                              rng=rng)
            optimizer.step(model.gradients())
            losses.append(loss)
        val_pred = _predict_batched(model, x[val_idx])
        val_f1 = weighted_f1(y[val_idx], val_pred, model.n_classes)
        history.append({"epoch": epoch, "loss": float(np.mean(losses)),
                        "val_f1": val_f1, "seconds": time.monotonic() - t0})
        if verbose:
            print(f"epoch {epoch:2d}  loss {history[-1]['loss']:.4f}  "
                  f"val_f1 {val_f1:.4f}  ({history[-1]['seconds']:.1f}s)")
        if val_f1 > best_f1 + 1e-6:
            best_f1, best_epoch = val_f1, epoch
            best_params = [p.copy() for p in model.parameters()]
        elif epoch - best_epoch >= cfg.patience:
            break
    if best_params is not None:
        model.set_parameters(best_params)

    test_pred = _predict_batched(model, x[test_idx])
    return TrainResult(
        model=model, history=history, best_epoch=best_epoch,
        test_f1=weighted_f1(y[test_idx], test_pred, model.n_classes),
        test_accuracy=float((test_pred == y[test_idx]).mean()),
    )


def _predict_batched(model: CnnModel, x: np.ndarray, batch: int = 64) -> np.ndarray:
    preds = [model.predict(x[i:i + batch]) for i in range(0, len(x), batch)]
    return np.concatenate(preds) if preds else np.array([], dtype=int)
