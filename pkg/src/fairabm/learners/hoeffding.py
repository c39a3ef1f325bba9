"""Incremental Hoeffding tree (VFDT) for binary labels and numeric features.

Each leaf keeps weighted per-class Gaussian summaries of every feature.
Split candidates are evenly spaced thresholds between the observed extremes,
scored by information gain. A leaf splits when the Hoeffding bound certifies
the best feature against the runner-up, or when the bound has shrunk below
the tie threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr


@dataclass(frozen=True)
class HoeffdingParams:
    grace_period: float = 200
    delta: float = 1e-7
    tau: float = 0.05
    n_split_points: int = 10
    max_depth: int = 20

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def hoeffding_bound(value_range: float, delta: float, n: float) -> float:
    return math.sqrt(value_range * value_range * math.log(1.0 / delta) / (2.0 * n))


def _entropy(counts: np.ndarray) -> np.ndarray:
    """Entropy in bits along the last axis."""
    total = counts.sum(axis=-1, keepdims=True)
    p = np.divide(counts, total, out=np.zeros_like(counts, dtype=float), where=total > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(p), 0.0)
    return terms.sum(axis=-1)


class _Leaf:
    __slots__ = ("class_w", "w", "mean", "m2", "lo", "hi", "last_check", "depth")

    def __init__(self, n_features: int, depth: int, class_w=None):
        self.class_w = np.zeros(2) if class_w is None else np.asarray(class_w, dtype=float)
        self.w = np.zeros((2, n_features))
        self.mean = np.zeros((2, n_features))
        self.m2 = np.zeros((2, n_features))
        self.lo = np.full(n_features, np.inf)
        self.hi = np.full(n_features, -np.inf)
        self.last_check = 0.0
        self.depth = depth

    @property
    def seen(self) -> float:
        return float(self.w[:, 0].sum())

    def learn(self, x: np.ndarray, y: int, weight: float) -> None:
        self.class_w[y] += weight
        w_new = self.w[y] + weight
        delta = x - self.mean[y]
        self.mean[y] += weight / w_new * delta
        self.m2[y] += weight * delta * (x - self.mean[y])
        self.w[y] = w_new
        np.minimum(self.lo, x, out=self.lo)
        np.maximum(self.hi, x, out=self.hi)

    def proba(self) -> float:
        total = self.class_w.sum()
        return 0.5 if total <= 0 else float(self.class_w[1] / total)

    def split_candidates(self, n_points: int):
        """Per-feature (best gain, threshold, left class weights, right class weights)."""
        parent = float(_entropy(self.class_w))
        total = self.class_w.sum()
        out = []
        for f in range(self.w.shape[1]):
            lo, hi = self.lo[f], self.hi[f]
            if not lo < hi:
                out.append((0.0, None, None, None))
                continue
            thr = np.linspace(lo, hi, n_points + 2)[1:-1]
            left = np.empty((len(thr), 2))
            for c in (0, 1):
                wc = self.w[c, f]
                if wc <= 0:
                    left[:, c] = 0.0
                    continue
                var = self.m2[c, f] / wc
                if var <= 1e-12:
                    left[:, c] = np.where(self.mean[c, f] <= thr, wc, 0.0)
                else:
                    left[:, c] = wc * ndtr((thr - self.mean[c, f]) / math.sqrt(var))
            right = self.w[:, f][None, :] - left
            right = np.clip(right, 0.0, None)
            lw, rw = left.sum(axis=1), right.sum(axis=1)
            child = (lw * _entropy(left) + rw * _entropy(right)) / total
            gain = parent - child
            i = int(np.argmax(gain))
            out.append((float(gain[i]), float(thr[i]), left[i].copy(), right[i].copy()))
        return out


class _Split:
    __slots__ = ("feature", "threshold", "left", "right")

    def __init__(self, feature, threshold, left, right):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right


class HoeffdingTree:
    def __init__(self, n_features: int, params: HoeffdingParams | None = None):
        self.n_features = n_features
        self.params = params or HoeffdingParams()
        self.root = _Leaf(n_features, 0)
        self.n_splits = 0

    def _leaf_for(self, x):
        node, parent, side = self.root, None, None
        while isinstance(node, _Split):
            parent = node
            side = "left" if x[node.feature] <= node.threshold else "right"
            node = getattr(node, side)
        return node, parent, side

    def learn_one(self, x, y: int, weight: float = 1.0) -> None:
        x = np.asarray(x, dtype=float)
        if weight <= 0:
            return
        leaf, parent, side = self._leaf_for(x)
        leaf.learn(x, int(y), weight)
        if leaf.seen - leaf.last_check >= self.params.grace_period:
            leaf.last_check = leaf.seen
            self._attempt_split(leaf, parent, side)

    def _attempt_split(self, leaf: _Leaf, parent, side) -> None:
        p = self.params
        if leaf.depth >= p.max_depth or np.count_nonzero(leaf.class_w) < 2:
            return
        cands = leaf.split_candidates(p.n_split_points)
        order = sorted(range(len(cands)), key=lambda f: -cands[f][0])
        best = cands[order[0]]
        second_gain = cands[order[1]][0] if len(order) > 1 else 0.0
        if best[1] is None or best[0] <= 0:
            return
        eps = hoeffding_bound(1.0, p.delta, leaf.seen)  # log2(2 classes) = 1
        if best[0] - second_gain > eps or eps < p.tau:
            f = order[0]
            _, thr, lw, rw = best
            node = _Split(
                f, thr, _Leaf(self.n_features, leaf.depth + 1, lw), _Leaf(self.n_features, leaf.depth + 1, rw)
            )
            if parent is None:
                self.root = node
            else:
                setattr(parent, side, node)
            self.n_splits += 1

    def predict_proba_one(self, x) -> float:
        leaf, _, _ = self._leaf_for(np.asarray(x, dtype=float))
        return leaf.proba()

    def predict_proba(self, X) -> np.ndarray:
        return np.array([self.predict_proba_one(x) for x in np.asarray(X, dtype=float)])

    @property
    def n_leaves(self) -> int:
        def count(node):
            return 1 if isinstance(node, _Leaf) else count(node.left) + count(node.right)

        return count(self.root)

    def to_dict(self) -> dict:
        def enc(node):
            if isinstance(node, _Leaf):
                return {
                    "class_w": node.class_w.tolist(),
                    "w": node.w.tolist(),
                    "mean": node.mean.tolist(),
                    "m2": node.m2.tolist(),
                    "lo": [None if not np.isfinite(v) else v for v in node.lo],
                    "hi": [None if not np.isfinite(v) else v for v in node.hi],
                    "last_check": node.last_check,
                    "depth": node.depth,
                }
            return {"feature": node.feature, "threshold": node.threshold, "left": enc(node.left), "right": enc(node.right)}

        params = self.params.to_dict()
        if math.isinf(params["grace_period"]):
            params["grace_period"] = None
        return {"kind": "hoeffding", "n_features": self.n_features, "params": params, "root": enc(self.root)}

    @classmethod
    def from_dict(cls, d: dict) -> "HoeffdingTree":
        params = dict(d["params"])
        if params["grace_period"] is None:
            params["grace_period"] = math.inf
        tree = cls(d["n_features"], HoeffdingParams(**params))

        def dec(n):
            if "feature" in n:
                return _Split(n["feature"], n["threshold"], dec(n["left"]), dec(n["right"]))
            leaf = _Leaf(tree.n_features, n["depth"], n["class_w"])
            leaf.w = np.array(n["w"], dtype=float)
            leaf.mean = np.array(n["mean"], dtype=float)
            leaf.m2 = np.array(n["m2"], dtype=float)
            leaf.lo = np.array([np.inf if v is None else v for v in n["lo"]], dtype=float)
            leaf.hi = np.array([-np.inf if v is None else v for v in n["hi"]], dtype=float)
            leaf.last_check = n["last_check"]
            return leaf

        tree.root = dec(d["root"])
        return tree


def hoeffding_learn_one(model: HoeffdingTree, x, y: int, weight: float = 1.0) -> HoeffdingTree:
    model.learn_one(x, y, weight)
    return model


def hoeffding_predict(model: HoeffdingTree, x) -> float:
    return model.predict_proba_one(x)
