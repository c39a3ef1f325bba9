"""Instance reweighing: batch Kamiran-Calders, fixed per-group, and EMA streaming."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

GROUPS = (0, 1)  # 0 = A (privileged), 1 = B (protected)
LABELS = (0, 1)
GROUP_NAMES = {0: "A", 1: "B"}


class DegenerateCellError(ValueError):
    """A (group, label) cell has no support, so its weight is undefined."""

    def __init__(self, counts: dict):
        self.counts = counts
        empty = [f"({GROUP_NAMES[g]},{y})" for (g, y), c in counts.items() if c == 0]
        super().__init__(f"empty (group, label) cell(s) {', '.join(empty)}; counts={self._fmt(counts)}")

    @staticmethod
    def _fmt(counts):
        return {f"{GROUP_NAMES[g]},{y}": c for (g, y), c in counts.items()}


@dataclass(frozen=True)
class WeightTable:
    """w(g, y) for the four cells, keyed by (group code, label)."""

    w: dict

    def __post_init__(self):
        for cell in ((g, y) for g in GROUPS for y in LABELS):
            if cell not in self.w:
                raise ValueError(f"missing cell {cell}")
            if not self.w[cell] > 0:
                raise ValueError(f"weight for {cell} must be positive")

    def __getitem__(self, cell) -> float:
        return self.w[cell]

    def weights_for(self, groups, labels) -> np.ndarray:
        groups = np.asarray(groups, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64)
        lut = np.array([[self.w[(g, y)] for y in LABELS] for g in GROUPS])
        return lut[groups, labels]

    def to_dict(self) -> dict:
        return {f"{GROUP_NAMES[g]},{y}": v for (g, y), v in sorted(self.w.items())}


def cell_counts(groups, labels) -> dict:
    groups = np.asarray(groups, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    return {(g, y): int(np.sum((groups == g) & (labels == y))) for g in GROUPS for y in LABELS}


def kamiran_calders_weights(groups, labels) -> WeightTable:
    """w(g, y) = P(y) P(g) / P(g, y) from empirical frequencies."""
    counts = cell_counts(groups, labels)
    if any(c == 0 for c in counts.values()):
        raise DegenerateCellError(counts)
    n = sum(counts.values())
    n_g = {g: counts[(g, 0)] + counts[(g, 1)] for g in GROUPS}
    n_y = {y: counts[(0, y)] + counts[(1, y)] for y in LABELS}
    # counts form keeps the arithmetic exact for integer tables
    return WeightTable({(g, y): (n_y[y] * n_g[g]) / (n * counts[(g, y)]) for g in GROUPS for y in LABELS})


DEFAULT_MANUAL = {0: 0.5, 1: 1.5}


def manual_weights(group_weights: dict | None = None) -> WeightTable:
    gw = dict(DEFAULT_MANUAL if group_weights is None else group_weights)
    gw = {(0 if k in ("A", 0) else 1 if k in ("B", 1) else k): v for k, v in gw.items()}
    if set(gw) != set(GROUPS):
        raise ValueError("manual weights need exactly groups A and B")
    for g, v in gw.items():
        if not v > 0:
            raise ValueError(f"manual weight for group {GROUP_NAMES[g]} must be positive, got {v}")
    return WeightTable({(g, y): float(gw[g]) for g in GROUPS for y in LABELS})


@dataclass
class EmaReweigherState:
    """Running EMA estimates behind the streaming reweighing formula.

    Starts from the uniform table; until every (g, y) cell has been seen at
    least once the emitted weight is 1.
    """

    decay: float = 0.01
    w_min: float = 0.1
    w_max: float = 10.0
    p_y: list = field(default_factory=lambda: [0.5, 0.5])
    p_g: list = field(default_factory=lambda: [0.5, 0.5])
    p_gy: list = field(default_factory=lambda: [[0.25, 0.25], [0.25, 0.25]])
    seen: list = field(default_factory=lambda: [[0, 0], [0, 0]])
    count: int = 0

    def __post_init__(self):
        if not 0.0 < self.decay < 1.0:
            raise ValueError("EMA decay must be in (0, 1)")
        if not 0.0 < self.w_min <= self.w_max:
            raise ValueError("need 0 < w_min <= w_max")

    @property
    def warm(self) -> bool:
        return all(c > 0 for row in self.seen for c in row)

    def weight(self, g: int, y: int) -> float:
        if not self.warm:
            return 1.0
        joint = self.p_gy[g][y]
        if joint <= 0.0:
            return self.w_max
        raw = self.p_y[y] * self.p_g[g] / joint
        return min(max(raw, self.w_min), self.w_max)

    def update(self, g: int, y: int) -> float:
        lam = self.decay
        keep = 1.0 - lam
        for k in (0, 1):
            self.p_y[k] = keep * self.p_y[k] + lam * (k == y)
            self.p_g[k] = keep * self.p_g[k] + lam * (k == g)
            for j in (0, 1):
                self.p_gy[k][j] = keep * self.p_gy[k][j] + lam * (k == g and j == y)
        self.seen[g][y] += 1
        self.count += 1
        return self.weight(g, y)

    def table(self) -> dict:
        return {(g, y): self.weight(g, y) for g in GROUPS for y in LABELS}

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def ema_reweigh_update(state: EmaReweigherState, g: int, y: int) -> tuple[EmaReweigherState, float]:
    w = state.update(int(g), int(y))
    return state, w


def ema_weights(groups, labels, state: EmaReweigherState | None = None) -> np.ndarray:
    state = state or EmaReweigherState()
    return np.array([state.update(int(g), int(y)) for g, y in zip(groups, labels)])


def weight_mass(table: WeightTable, groups, labels) -> float:
    return float(math.fsum(table.weights_for(groups, labels)))
