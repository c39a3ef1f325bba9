"""Isotonic probability calibration via pool-adjacent-violators."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np


def pav(y, w=None) -> np.ndarray:
    """Weighted least-squares non-decreasing fit of ``y`` (already ordered)."""
    y = np.asarray(y, dtype=float)
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=float)
    # blocks as parallel stacks: mean, weight, length
    means, weights, sizes = [], [], []
    for yi, wi in zip(y, w):
        means.append(yi)
        weights.append(wi)
        sizes.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            m2, w2, s2 = means.pop(), weights.pop(), sizes.pop()
            m1, w1, s1 = means.pop(), weights.pop(), sizes.pop()
            wt = w1 + w2
            means.append((m1 * w1 + m2 * w2) / wt if wt > 0 else (m1 + m2) / 2)
            weights.append(wt)
            sizes.append(s1 + s2)
    return np.repeat(means, sizes)


@dataclass
class IsotonicCalibrator:
    """Monotone map from raw scores to probabilities.

    Between breakpoints the map interpolates linearly; outside it is constant.
    An empty calibrator is the identity.
    """

    breakpoints: np.ndarray = field(default_factory=lambda: np.empty(0))
    values: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def is_identity(self) -> bool:
        return len(self.breakpoints) == 0

    def predict(self, scores) -> np.ndarray:
        scores = np.asarray(scores, dtype=float)
        if self.is_identity:
            return np.clip(scores, 0.0, 1.0)
        return np.interp(scores, self.breakpoints, self.values)

    def to_dict(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "IsotonicCalibrator":
        return cls(np.array(d["breakpoints"], dtype=float), np.array(d["values"], dtype=float))


def isotonic_fit(scores, labels, weights=None) -> IsotonicCalibrator:
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if len(scores) < 2:
        return IsotonicCalibrator()
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    w = np.ones_like(scores) if weights is None else np.asarray(weights, dtype=float)
    # tied scores must share one fitted value: pool them first
    xs, inverse = np.unique(scores, return_inverse=True)
    wsum = np.bincount(inverse, weights=w, minlength=len(xs))
    ysum = np.bincount(inverse, weights=w * labels, minlength=len(xs))
    ymean = np.divide(ysum, wsum, out=np.zeros_like(ysum), where=wsum > 0)
    fitted = np.clip(pav(ymean, wsum), 0.0, 1.0)
    return IsotonicCalibrator(xs, fitted)


class CalibrationBuffer:
    """Sliding window of (raw score, label) pairs refitting every ``interval`` additions."""

    def __init__(self, interval: int = 500):
        if interval < 2:
            raise ValueError("calibrate interval must be >= 2")
        self.interval = interval
        self.scores: deque = deque(maxlen=interval)
        self.labels: deque = deque(maxlen=interval)
        self.since_refit = 0
        self.calibrator = IsotonicCalibrator()
        self.n_refits = 0

    def __len__(self) -> int:
        return len(self.scores)

    def add(self, score: float, label: int) -> bool:
        """Buffer one pair; returns True when this call triggered a refit."""
        self.scores.append(float(score))
        self.labels.append(int(label))
        self.since_refit += 1
        if self.since_refit >= self.interval:
            self.calibrator = isotonic_fit(np.array(self.scores), np.array(self.labels))
            self.since_refit = 0
            self.n_refits += 1
            return True
        return False

    def predict(self, scores) -> np.ndarray:
        return self.calibrator.predict(scores)


def online_calibration_cycle(buffer: CalibrationBuffer, score: float, label: int) -> IsotonicCalibrator:
    buffer.add(score, label)
    return buffer.calibrator
