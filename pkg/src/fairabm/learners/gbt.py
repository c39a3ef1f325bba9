"""Gradient-boosted regression trees for weighted logistic loss.

Second-order boosting: each tree is grown greedily on the gradient and
hessian of the weighted log loss, and leaf values are damped Newton steps
shrunk by the learning rate. A per-leaf step-halving guard makes the
weighted training loss non-increasing round by round. Sample weights are
rescaled to mean one, so multiplying every weight by a constant does not
change the fitted model.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

EPS = 1e-15
MAX_HALVINGS = 30


@dataclass(frozen=True)
class GbtParams:
    n_trees: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    reg_lambda: float = 1.0
    min_child_weight: float = 1.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Tree:
    """Array-encoded binary tree; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            f = self.feature[node]
            internal = f >= 0
            if not internal.any():
                return node
            r = rows[internal]
            n = node[internal]
            go_left = X[r, f[internal]] <= self.threshold[n]
            node[internal] = np.where(go_left, self.left[n], self.right[n])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            np.array(d["feature"], dtype=np.int64),
            np.array(d["threshold"], dtype=float),
            np.array(d["left"], dtype=np.int64),
            np.array(d["right"], dtype=np.int64),
            np.array(d["value"], dtype=float),
        )


@dataclass(frozen=True)
class GbtModel:
    params: GbtParams
    base_score: float
    trees: tuple = ()
    constant: float | None = None  # set when fitted on single-class data

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def decision_function(self, X, n_trees: int | None = None) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        margin = np.full(len(X), self.base_score)
        for tree in self.trees[:n_trees]:
            margin += tree.predict(X)
        return margin

    def predict_proba(self, X, n_trees: int | None = None) -> np.ndarray:
        if self.constant is not None and not self.trees[:n_trees]:
            return np.full(len(X), self.constant)
        return expit(self.decision_function(X, n_trees))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def prefix(self, n_trees: int) -> "GbtModel":
        return replace(self, trees=self.trees[:n_trees])

    def to_dict(self) -> dict:
        return {
            "kind": "gbt",
            "params": self.params.to_dict(),
            "base_score": self.base_score,
            "constant": self.constant,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GbtModel":
        return cls(
            GbtParams(**d["params"]),
            float(d["base_score"]),
            tuple(Tree.from_dict(t) for t in d["trees"]),
            d.get("constant"),
        )


def weighted_log_loss(y, p, w) -> float:
    p = np.clip(p, EPS, 1 - EPS)
    return float(-np.sum(w * (y * np.log(p) + (1 - y) * np.log1p(-p))) / np.sum(w))


def _row_loss(y, margin):
    # log(1 + e^m) - y m, stable for large |m|
    return np.logaddexp(0.0, margin) - y * margin


def _normalize_weights(w, n) -> np.ndarray:
    w = np.ones(n) if w is None else np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise ValueError("weights must align with rows")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise ValueError("all sample weights are zero")
    return w * (n / total)


class _Grower:
    """Grows one tree on fixed gradient statistics."""

    def __init__(self, X, sorted_idx, params: GbtParams):
        self.X = X
        self.sorted_idx = sorted_idx
        self.p = params

    def grow(self, g, h, y, margin, w):
        self.g, self.h, self.y, self.margin, self.w = g, h, y, margin, w
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []
        self.in_node = np.zeros(len(g), dtype=bool)
        self._build(np.arange(len(g)), 0)
        return Tree(
            np.array(self.feature, dtype=np.int64),
            np.array(self.threshold, dtype=float),
            np.array(self.left, dtype=np.int64),
            np.array(self.right, dtype=np.int64),
            np.array(self.value, dtype=float),
        )

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def _leaf_value(self, rows) -> float:
        lam, lr = self.p.reg_lambda, self.p.learning_rate
        G, H = self.g[rows].sum(), self.h[rows].sum()
        step = -lr * G / (H + lam)
        if step == 0.0:
            return 0.0
        y, m, w = self.y[rows], self.margin[rows], self.w[rows]
        before = np.sum(w * _row_loss(y, m))
        for _ in range(MAX_HALVINGS):
            if np.sum(w * _row_loss(y, m + step)) <= before:
                return float(step)
            step *= 0.5
        return 0.0

    def _best_split(self, rows):
        p = self.p
        self.in_node[:] = False
        self.in_node[rows] = True
        G, H = self.g[rows].sum(), self.h[rows].sum()
        parent = G * G / (H + p.reg_lambda)
        best = (0.0, -1, 0.0)
        for f, order in enumerate(self.sorted_idx):
            o = order[self.in_node[order]]
            xs = self.X[o, f]
            distinct = xs[:-1] < xs[1:]
            if not distinct.any():
                continue
            GL = np.cumsum(self.g[o])[:-1]
            HL = np.cumsum(self.h[o])[:-1]
            GR, HR = G - GL, H - HL
            ok = distinct & (HL >= p.min_child_weight) & (HR >= p.min_child_weight)
            if not ok.any():
                continue
            gain = GL * GL / (HL + p.reg_lambda) + GR * GR / (HR + p.reg_lambda) - parent
            gain = np.where(ok, gain, -np.inf)
            i = int(np.argmax(gain))
            if gain[i] > best[0] + 1e-12:
                best = (float(gain[i]), f, 0.5 * (xs[i] + xs[i + 1]))
        return best

    def _build(self, rows, depth) -> int:
        node = self._new_node()
        if depth < self.p.max_depth and len(rows) > 1:
            gain, f, thr = self._best_split(rows)
            if f >= 0:
                go_left = self.X[rows, f] <= thr
                self.feature[node] = f
                self.threshold[node] = thr
                self.left[node] = self._build(rows[go_left], depth + 1)
                self.right[node] = self._build(rows[~go_left], depth + 1)
                return node
        self.value[node] = self._leaf_value(rows)
        return node


def _boost(model: GbtModel, X, y, w, n_new: int) -> GbtModel:
    if n_new <= 0 or len(y) == 0:
        return model
    sorted_idx = [np.argsort(X[:, f], kind="stable") for f in range(X.shape[1])]
    grower = _Grower(X, sorted_idx, model.params)
    margin = model.decision_function(X)
    trees = list(model.trees)
    for _ in range(n_new):
        p = expit(margin)
        g = w * (p - y)
        h = w * p * (1.0 - p)
        tree = grower.grow(g, h, y, margin, w)
        trees.append(tree)
        margin = margin + tree.predict(X)
    return replace(model, trees=tuple(trees), constant=None)


def gbt_fit(X, y, weights=None, params: GbtParams | None = None) -> GbtModel:
    params = params or GbtParams()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    w = _normalize_weights(weights, len(y))
    rate = float(np.sum(w * y) / np.sum(w))
    if rate in (0.0, 1.0) or np.all(y == y[0]):
        rate = float(y[0])
        base = float(np.log(np.clip(rate, 1e-6, 1 - 1e-6) / np.clip(1 - rate, 1e-6, 1 - 1e-6)))
        return GbtModel(params, base, (), constant=rate)
    model = GbtModel(params, float(np.log(rate / (1 - rate))))
    return _boost(model, X, y, w, params.n_trees)


def gbt_append(model: GbtModel, X, y, weights=None, n_new_trees: int = 10) -> GbtModel:
    """Grow ``n_new_trees`` more trees on a new batch; earlier trees are shared, not copied."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if n_new_trees <= 0 or len(y) == 0:
        return model
    w = _normalize_weights(weights, len(y))
    return _boost(model, X, y, w, n_new_trees)
