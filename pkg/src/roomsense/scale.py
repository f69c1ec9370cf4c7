"""Opportunistic activity-scale classifier.

A 1 s window of clustered points is reduced to 16 statistical features
(mean, std, kurtosis, skewness over each of x, y, d, p) and fed to a small
random forest that decides TrackSense vs Macro vs Micro, which in turn
drives the radar reconfiguration.
"""
from __future__ import annotations

import io
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InsufficientDataError
from .labels import ScaleClass
from .tracking import GlobalPoint

N_FEATURES = 16
FEATURE_CHANNELS = ("x", "y", "d", "p")
FEATURE_STATS = ("mean", "std", "kurtosis", "skewness")
FEATURE_NAMES = tuple(f"{c}_{s}" for c in FEATURE_CHANNELS for s in FEATURE_STATS)

RF_MAGIC = b"mars-rf v1\n"


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray          # 16 reals, FEATURE_NAMES order
    cluster_id: int
    window_start: float         # s

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (N_FEATURES,):
            raise DimensionError(f"expected {N_FEATURES} features, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DimensionError("feature vector contains non-finite values")
        object.__setattr__(self, "values", v)


def _moments(samples: np.ndarray) -> tuple[float, float, float, float]:
    """Population mean/std/excess-kurtosis/skewness; constant input gives 0s."""
    mean = float(samples.mean())
    centered = samples - mean
    var = float((centered ** 2).mean())
    std = float(np.sqrt(var))
    if std == 0.0:
        return mean, 0.0, 0.0, 0.0
    m3 = float((centered ** 3).mean())
    m4 = float((centered ** 4).mean())
    skew = m3 / std ** 3
    kurt = m4 / var ** 2 - 3.0
    return mean, std, kurt, skew


def extract_features(window: list[GlobalPoint], cluster_id: int = -1,
                     window_start: float = 0.0) -> FeatureVector:
    """16 moment features over a cluster's points from one 1 s window.

    Order-invariant; needs at least two points to be meaningful.
    """
    if len(window) < 2:
        raise InsufficientDataError(
            f"need >= 2 points for moment features, got {len(window)}")
    values = []
    for channel in FEATURE_CHANNELS:
        samples = np.array([getattr(p, channel) for p in window], dtype=float)
        values.extend(_moments(samples))
    return FeatureVector(values=np.array(values), cluster_id=cluster_id,
                         window_start=window_start)


# -- decision tree ----------------------------------------------------------------

def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    frac = counts / total
    return float(1.0 - (frac ** 2).sum())


@dataclass
class _Tree:
    """Flat-array binary tree; feature[i] = -1 marks a leaf."""

    feature: np.ndarray       # int32 [n_nodes]
    threshold: np.ndarray     # float64 [n_nodes]
    left: np.ndarray          # int32 [n_nodes]
    right: np.ndarray         # int32 [n_nodes]
    histogram: np.ndarray     # int64 [n_nodes, n_classes]

    def leaf_histogram(self, fv: np.ndarray) -> np.ndarray:
        node = 0
        while self.feature[node] >= 0:
            if fv[self.feature[node]] <= self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return self.histogram[node]


def _best_split(x: np.ndarray, y: np.ndarray, features: np.ndarray,
                n_classes: int) -> tuple[int, float] | None:
    """Lowest weighted-Gini threshold among the candidate features.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values; prefix-summed class counts make each feature O(n log n).
    """
    n = len(y)
    parent_counts = np.bincount(y, minlength=n_classes)
    best = (_gini(parent_counts), None)
    for f in features:
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        ys = y[order]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), ys] = 1.0
        left_counts = np.cumsum(onehot, axis=0)
        boundaries = np.nonzero(np.diff(xs) > 0)[0]
        if boundaries.size == 0:
            continue
        for b in boundaries:
            lc = left_counts[b]
            rc = parent_counts - lc
            nl, nr = b + 1, n - b - 1
            score = (nl * _gini(lc) + nr * _gini(rc)) / n
            if score < best[0] - 1e-12:
                best = (score, (int(f), float(0.5 * (xs[b] + xs[b + 1]))))
    return best[1]


def _grow_tree(x: np.ndarray, y: np.ndarray, n_classes: int, max_depth: int,
               n_candidates: int, rng: np.random.Generator) -> _Tree:
    feature, threshold, left, right, hists = [], [], [], [], []

    def build(idx: np.ndarray, depth: int) -> int:
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        hists.append(np.bincount(y[idx], minlength=n_classes))
        counts = hists[node]
        if depth >= max_depth or len(idx) < 2 or np.count_nonzero(counts) < 2:
            return node
        cand = rng.choice(x.shape[1], size=n_candidates, replace=False)
        split = _best_split(x[idx], y[idx], cand, n_classes)
        if split is None:
            return node
        f, thr = split
        go_left = x[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        left[node] = build(idx[go_left], depth + 1)
        right[node] = build(idx[~go_left], depth + 1)
        return node

    build(np.arange(len(y)), 0)
    return _Tree(feature=np.array(feature, dtype=np.int32),
                 threshold=np.array(threshold),
                 left=np.array(left, dtype=np.int32),
                 right=np.array(right, dtype=np.int32),
                 histogram=np.array(hists, dtype=np.int64))


# -- forest -----------------------------------------------------------------------

@dataclass
class ScaleForest:
    """Bootstrap ensemble of Gini trees over the 16 moment features.

    Prediction sums leaf class histograms across trees; argmax breaks ties
    toward the lower ScaleClass value (TrackSense < Macro < Micro).
    """

    n_trees: int = 50
    max_depth: int = 12
    seed: int = 0
    n_classes: int = len(ScaleClass)
    trees: list[_Tree] = field(default_factory=list)

    def fit(self, x: np.ndarray, y: np.ndarray) -> "ScaleForest":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=int)
        if x.ndim != 2 or x.shape[1] != N_FEATURES:
            raise DimensionError(f"expected [n, {N_FEATURES}] features, got {x.shape}")
        if len(x) != len(y):
            raise DimensionError("feature/label count mismatch")
        if len(np.unique(y)) < 2:
            warnings.warn("single-class training set; forest degenerates to a "
                          "constant predictor", stacklevel=2)
        n_candidates = max(1, int(np.sqrt(N_FEATURES)))  # 4 of 16
        self.trees = []
        for ss in np.random.SeedSequence(self.seed).spawn(self.n_trees):
            rng = np.random.default_rng(ss)
            sample = rng.integers(0, len(y), size=len(y))
            self.trees.append(_grow_tree(x[sample], y[sample], self.n_classes,
                                         self.max_depth, n_candidates, rng))
        return self

    def _votes(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != N_FEATURES:
            raise DimensionError(f"expected {N_FEATURES} features, got {x.shape[1]}")
        if not self.trees:
            raise InsufficientDataError("forest has not been fit")
        votes = np.zeros((len(x), self.n_classes), dtype=np.int64)
        for tree in self.trees:
            for i, row in enumerate(x):
                votes[i] += tree.leaf_histogram(row)
        return votes

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self._votes(x), axis=1)  # first max = lowest class

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        votes = self._votes(x).astype(float)
        return votes / votes.sum(axis=1, keepdims=True)

    def predict_one(self, fv: FeatureVector) -> tuple[ScaleClass, np.ndarray]:
        proba = self.predict_proba(fv.values[None, :])[0]
        return ScaleClass(int(np.argmax(proba))), proba

    # -- serialization (mars-rf v1: little-endian arrays per tree) --

    def dump_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(RF_MAGIC)
        buf.write(struct.pack("<IIIIq", self.n_trees, N_FEATURES, self.n_classes,
                              self.max_depth, self.seed))
        for tree in self.trees:
            buf.write(struct.pack("<I", len(tree.feature)))
            buf.write(tree.feature.astype("<i4").tobytes())
            buf.write(tree.threshold.astype("<f8").tobytes())
            buf.write(tree.left.astype("<i4").tobytes())
            buf.write(tree.right.astype("<i4").tobytes())
            buf.write(tree.histogram.astype("<i8").tobytes())
        return buf.getvalue()

    @classmethod
    def load_bytes(cls, blob: bytes) -> "ScaleForest":
        if not blob.startswith(RF_MAGIC):
            raise DimensionError("not a scale-forest model file")
        off = len(RF_MAGIC)
        n_trees, n_features, n_classes, max_depth, seed = struct.unpack_from(
            "<IIIIq", blob, off)
        off += struct.calcsize("<IIIIq")
        if n_features != N_FEATURES:
            raise DimensionError(f"model has {n_features} features, expected {N_FEATURES}")
        forest = cls(n_trees=n_trees, max_depth=max_depth, seed=seed,
                     n_classes=n_classes)
        for _ in range(n_trees):
            (n_nodes,) = struct.unpack_from("<I", blob, off)
            off += 4
            def take(dtype, count):
                nonlocal off
                arr = np.frombuffer(blob, dtype=dtype, count=count, offset=off)
                off += arr.nbytes
                return arr.copy()
            feature = take("<i4", n_nodes)
            threshold = take("<f8", n_nodes)
            left = take("<i4", n_nodes)
            right = take("<i4", n_nodes)
            hist = take("<i8", n_nodes * n_classes).reshape(n_nodes, n_classes)
            forest.trees.append(_Tree(feature=feature, threshold=threshold,
                                      left=left, right=right, histogram=hist))
        if off != len(blob):
            raise DimensionError("trailing bytes in model file")
        return forest

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.dump_bytes())

    @classmethod
    def load(cls, path) -> "ScaleForest":
        with open(path, "rb") as fh:
            return cls.load_bytes(fh.read())
