"""Batch and streaming standardization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class BatchScaler:
    mean: np.ndarray | None = None
    std: np.ndarray | None = None

    def fit(self, X) -> "BatchScaler":
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or len(X) == 0:
            raise ValueError("need a non-empty 2-D batch")
        self.mean = X.mean(axis=0)
        var = X.var(axis=0)
        self.std = np.where(var > 0, np.sqrt(var), 1.0)
        return self

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.std

    def fit_transform(self, X) -> np.ndarray:
        return self.fit(X).transform(X)

    def to_dict(self) -> dict:
        return {"kind": "batch", "mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "BatchScaler":
        return cls(np.array(d["mean"]), np.array(d["std"]))


@dataclass
class StreamingScaler:
    """Welford running mean/variance; standardizes with the current estimate."""

    n_features: int
    count: int = 0
    mean: np.ndarray = field(default=None)
    m2: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.mean is None:
            self.mean = np.zeros(self.n_features)
        if self.m2 is None:
            self.m2 = np.zeros(self.n_features)

    @property
    def var(self) -> np.ndarray:
        return self.m2 / self.count if self.count else np.zeros(self.n_features)

    @property
    def std(self) -> np.ndarray:
        v = self.var
        return np.where(v > 0, np.sqrt(v), 1.0)

    def learn_one(self, x) -> None:
        x = np.asarray(x, dtype=float)
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)

    def transform_one(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / self.std

    def update(self, x) -> np.ndarray:
        self.learn_one(x)
        return self.transform_one(x)

    def to_dict(self) -> dict:
        return {
            "kind": "streaming",
            "n_features": self.n_features,
            "count": self.count,
            "mean": self.mean.tolist(),
            "m2": self.m2.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StreamingScaler":
        return cls(d["n_features"], d["count"], np.array(d["mean"]), np.array(d["m2"]))


def scaler_fit_transform(X) -> tuple[np.ndarray, BatchScaler]:
    s = BatchScaler()
    return s.fit_transform(X), s


def scaler_update(state: StreamingScaler, x) -> np.ndarray:
    return state.update(x)
