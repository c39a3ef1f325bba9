"""Exact order-2 Shapley-Taylor attributions and interaction graphs.

The value of a coalition ``S`` is the mean model output over a background
sample after overwriting the columns in ``S`` with the explained instance.
All ``2^d`` coalitions are evaluated in a single batched model call.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

MAX_FEATURES = 15


class TooManyFeaturesError(ValueError):
    pass


@dataclass
class ValueFunction:
    predict: Callable[[np.ndarray], np.ndarray]
    background: np.ndarray
    instance: np.ndarray

    def __post_init__(self):
        self.background = np.atleast_2d(np.asarray(self.background, dtype=float))
        self.instance = np.asarray(self.instance, dtype=float).ravel()
        if len(self.background) == 0:
            raise ValueError("background sample is empty")
        if self.background.shape[1] != len(self.instance):
            raise ValueError("instance and background disagree on the number of features")

    @property
    def n_features(self) -> int:
        return len(self.instance)

    def __call__(self, subset) -> float:
        mask = np.zeros(self.n_features, dtype=bool)
        mask[list(subset)] = True
        return float(self.evaluate_masks(mask[None, :])[0])

    def evaluate_masks(self, masks: np.ndarray) -> np.ndarray:
        """v(S) for every row of a boolean coalition matrix."""
        masks = np.asarray(masks, dtype=bool)
        m, b = len(masks), len(self.background)
        data = np.repeat(self.background[None, :, :], m, axis=0)
        data = np.where(masks[:, None, :], self.instance[None, None, :], data)
        preds = np.asarray(self.predict(data.reshape(m * b, -1)), dtype=float)
        return preds.reshape(m, b).mean(axis=1)

    def all_values(self) -> np.ndarray:
        """v indexed by coalition bitmask (bit i set <=> feature i in S)."""
        d = self.n_features
        codes = np.arange(2**d)
        masks = (codes[:, None] >> np.arange(d)[None, :]) & 1
        return self.evaluate_masks(masks.astype(bool))


def value_function_eval(vf: ValueFunction, subset) -> float:
    return vf(subset)


@dataclass
class ShapleyExplanation:
    features: tuple
    phi: dict
    phi_pair: dict  # keys are (feature_i, feature_j) with i before j in ``features``
    baseline: float
    prediction: float

    def pair(self, a, b) -> float:
        return self.phi_pair[(a, b)] if (a, b) in self.phi_pair else self.phi_pair[(b, a)]

    def total(self) -> float:
        return math.fsum(self.phi.values()) + math.fsum(self.phi_pair.values())

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "phi": self.phi,
            "phi_pair": [[a, b, v] for (a, b), v in self.phi_pair.items()],
            "baseline": self.baseline,
            "prediction": self.prediction,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ShapleyExplanation":
        return cls(
            tuple(d["features"]),
            dict(d["phi"]),
            {(a, b): v for a, b, v in d["phi_pair"]},
            d["baseline"],
            d["prediction"],
        )


def shapley_order2(vf: ValueFunction, feature_names=None) -> ShapleyExplanation:
    """Shapley-Taylor index of order 2 by full enumeration.

    Singletons get their discrete derivative at the empty coalition; each pair
    gets ``2/d * sum_T delta_ij v(T) / C(d-1, |T|)`` over coalitions T that
    exclude both features.
    """
    d = vf.n_features
    if d > MAX_FEATURES:
        raise TooManyFeaturesError(f"{d} features exceeds exact enumeration limit {MAX_FEATURES}; use a sampling method")
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(d))
    v = vf.all_values()
    full = (1 << d) - 1
    phi = {names[i]: float(v[1 << i] - v[0]) for i in range(d)}
    codes = np.arange(2**d)
    sizes = np.array([bin(c).count("1") for c in range(2**d)])
    phi_pair = {}
    if d >= 2:
        weight = np.array([1.0 / math.comb(d - 1, k) for k in range(d)])
        for i, j in itertools.combinations(range(d), 2):
            bi, bj = 1 << i, 1 << j
            T = codes[(codes & (bi | bj)) == 0]
            delta = v[T | bi | bj] - v[T | bi] - v[T | bj] + v[T]
            phi_pair[(names[i], names[j])] = float(2.0 / d * np.sum(delta * weight[sizes[T]]))
    return ShapleyExplanation(names, phi, phi_pair, float(v[0]), float(v[full]))


@dataclass
class InteractionGraph:
    nodes: list = field(default_factory=list)  # {"feature", "magnitude", "sign"}
    edges: list = field(default_factory=list)  # {"source", "target", "magnitude", "sign", "redundant"}

    def to_dict(self) -> dict:
        return {"nodes": self.nodes, "edges": self.edges}

    @classmethod
    def from_dict(cls, d: dict) -> "InteractionGraph":
        return cls(list(d["nodes"]), list(d["edges"]))

    def hub_concentration(self) -> float:
        total = sum(n["magnitude"] for n in self.nodes)
        return max(n["magnitude"] for n in self.nodes) / total if total > 0 else 0.0


def _sign(x: float) -> int:
    return 1 if x > 0 else -1 if x < 0 else 0


def build_interaction_graph(expl: ShapleyExplanation, top_k_edges: int | None = None) -> InteractionGraph:
    nodes = [{"feature": f, "magnitude": abs(expl.phi[f]), "sign": _sign(expl.phi[f])} for f in expl.features]
    pairs = [(k, v) for k, v in expl.phi_pair.items() if v != 0.0]
    # stable: larger magnitude first, then feature order
    order = {f: i for i, f in enumerate(expl.features)}
    pairs.sort(key=lambda kv: (-abs(kv[1]), order[kv[0][0]], order[kv[0][1]]))
    if top_k_edges is not None:
        pairs = pairs[:top_k_edges]
    edges = [
        {"source": a, "target": b, "magnitude": abs(v), "sign": _sign(v), "redundant": v < 0}
        for (a, b), v in pairs
    ]
    return InteractionGraph(nodes, edges)


def hub_concentration(expl: ShapleyExplanation) -> float:
    """max |phi_i| / sum |phi_i|."""
    mags = [abs(v) for v in expl.phi.values()]
    total = math.fsum(mags)
    return max(mags) / total if total > 0 else 0.0


def _dot_id(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(g: InteractionGraph, name: str = "interactions") -> str:
    node_max = max((n["magnitude"] for n in g.nodes), default=0.0) or 1.0
    edge_max = max((e["magnitude"] for e in g.edges), default=0.0) or 1.0
    lines = [f"graph {_dot_id(name)} {{", "  node [shape=circle, style=filled];"]
    for n in g.nodes:
        size = 0.3 + 1.2 * n["magnitude"] / node_max
        fill = "#d62728" if n["sign"] > 0 else "#1f77b4" if n["sign"] < 0 else "#cccccc"
        lines.append(
            f"  {_dot_id(n['feature'])} [width={size:.4f}, fillcolor=\"{fill}\", "
            f"magnitude={n['magnitude']:.10g}, sign={n['sign']}];"
        )
    for e in g.edges:
        width = 0.5 + 5.5 * e["magnitude"] / edge_max
        color = "blue" if e["redundant"] else "red"
        lines.append(
            f"  {_dot_id(e['source'])} -- {_dot_id(e['target'])} [penwidth={width:.4f}, color={color}, "
            f"magnitude={e['magnitude']:.10g}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_export(g: InteractionGraph, path, fmt: str = "dot") -> None:
    path = Path(path)
    if fmt == "dot":
        path.write_text(graph_to_dot(g, path.stem), encoding="utf-8")
    elif fmt == "json":
        path.write_text(json.dumps(g.to_dict(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown graph format {fmt!r}")


def graph_load_json(path) -> InteractionGraph:
    return InteractionGraph.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
