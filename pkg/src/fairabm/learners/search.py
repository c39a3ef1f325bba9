"""Seeded random hyperparameter search with a time-ordered validation split."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

GBT_SPACE = {
    "max_depth": ("int", 2, 5),
    "learning_rate": ("float", 0.05, 0.3),
    "n_trees": ("int", 50, 200),
}
HOEFFDING_SPACE = {
    "grace_period": ("int", 50, 300),
    "delta": ("log", 1e-7, 1e-2),
    "tau": ("float", 0.01, 0.2),
}


@dataclass(frozen=True)
class SearchSpec:
    space: dict = field(default_factory=lambda: dict(GBT_SPACE))
    n_candidates: int = 3
    seed: int = 0
    validation_fraction: float = 0.2


def _draw(rng: np.random.Generator, dist):
    kind = dist[0]
    if kind == "int":
        return int(rng.integers(dist[1], dist[2] + 1))
    if kind == "float":
        return float(rng.uniform(dist[1], dist[2]))
    if kind == "log":
        return float(math.exp(rng.uniform(math.log(dist[1]), math.log(dist[2]))))
    if kind == "choice":
        return dist[1][int(rng.integers(len(dist[1])))]
    raise ValueError(f"unknown distribution {kind!r}")


def sample_candidates(spec: SearchSpec) -> list[dict]:
    if spec.n_candidates < 1:
        raise ValueError("n_candidates must be >= 1")
    rng = np.random.default_rng(spec.seed)
    names = sorted(spec.space)
    return [{k: _draw(rng, spec.space[k]) for k in names} for _ in range(spec.n_candidates)]


def time_split(n: int, validation_fraction: float = 0.2) -> tuple[np.ndarray, np.ndarray]:
    """Leading rows train, trailing ``validation_fraction`` validate."""
    n_valid = int(round(n * validation_fraction))
    n_valid = min(max(n_valid, 1), n - 1) if n > 1 else 0
    cut = n - n_valid
    return np.arange(cut), np.arange(cut, n)


@dataclass
class SearchResult:
    best_params: dict
    best_score: float
    candidates: list
    scores: list


def random_search(spec: SearchSpec, evaluate: Callable[[dict], float]) -> SearchResult:
    """Score each sampled candidate (lower is better); ties keep the earliest draw."""
    cands = sample_candidates(spec)
    scores = [float(evaluate(c)) for c in cands]
    best = 0
    for i, s in enumerate(scores):
        if s < scores[best]:
            best = i
    return SearchResult(cands[best], scores[best], cands, scores)
