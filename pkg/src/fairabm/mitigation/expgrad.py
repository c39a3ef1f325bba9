"""Exponentiated-gradient reduction for demographic parity / equalized odds.

Fairness-constrained classification is solved as a saddle point: Lagrange
multipliers over the signed constraint violations are updated
multiplicatively, each round's classifier is the cost-sensitive best
response to the current multipliers, and the returned predictor is the
best mixture of the collected classifiers found by a small linear program.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.optimize import linprog

from ..learners.gbt import GbtModel, gbt_append, gbt_fit

logger = logging.getLogger(__name__)


class MomentKind(str, Enum):
    DP = "demographic_parity"
    EO = "equalized_odds"


@dataclass(frozen=True)
class ConstraintMoment:
    kind: MomentKind = MomentKind.DP
    eps: float = 0.02

    def events(self, labels) -> np.ndarray:
        labels = np.asarray(labels, dtype=np.int64)
        if self.kind is MomentKind.DP:
            return np.zeros(len(labels), dtype=np.int64)
        return labels

    @property
    def n_events(self) -> int:
        return 1 if self.kind is MomentKind.DP else 2


@dataclass
class Violation:
    """Signed gaps ``E[h | event, group] - E[h | event]``, shape (events, groups)."""

    gamma: np.ndarray
    undefined: np.ndarray  # True where the (event, group) cell was empty

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.gamma))) if self.gamma.size else 0.0

    @property
    def flagged(self) -> bool:
        return bool(self.undefined.any())


def constraint_violation(moment: ConstraintMoment, predictions, groups, labels) -> Violation:
    h = np.asarray(predictions, dtype=float)
    groups = np.asarray(groups, dtype=np.int64)
    events = moment.events(labels)
    gamma = np.zeros((moment.n_events, 2))
    undefined = np.zeros((moment.n_events, 2), dtype=bool)
    for e in range(moment.n_events):
        in_e = events == e
        if not in_e.any():
            undefined[e, :] = True
            continue
        base = h[in_e].mean()
        for g in (0, 1):
            cell = in_e & (groups == g)
            if cell.any():
                gamma[e, g] = h[cell].mean() - base
            else:
                undefined[e, g] = True
    if undefined.any():
        warnings.warn("empty (event, group) cell: its violation is reported as 0", RuntimeWarning, stacklevel=2)
    return Violation(gamma, undefined)


@dataclass
class EgEnsemble:
    members: list
    weights: np.ndarray
    moment: ConstraintMoment
    eta: float
    max_iter: int
    bound: float
    converged: bool = False
    n_iter: int = 0
    gap_history: list = field(default_factory=list)
    lambda_history: list = field(default_factory=list)

    def member_proba(self, X) -> np.ndarray:
        return np.stack([m.predict_proba(X) for m in self.members])

    def predict_proba(self, X) -> np.ndarray:
        """Expected member probability under the mixing distribution."""
        active = np.flatnonzero(self.weights > 0)
        out = np.zeros(len(X))
        for i in active:
            out += self.weights[i] * self.members[i].predict_proba(X)
        return np.clip(out, 0.0, 1.0)

    def expected_positive(self, X) -> np.ndarray:
        """P(yhat = 1) of the randomized classifier over hard member votes."""
        active = np.flatnonzero(self.weights > 0)
        out = np.zeros(len(X))
        for i in active:
            out += self.weights[i] * (self.members[i].predict_proba(X) >= 0.5)
        return out

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def dominant_member(self):
        return self.members[int(np.argmax(self.weights))]

    def to_dict(self) -> dict:
        return {
            "kind": "eg",
            "moment": self.moment.kind.value,
            "eps": self.moment.eps,
            "eta": self.eta,
            "max_iter": self.max_iter,
            "bound": self.bound,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "weights": self.weights.tolist(),
            "gap_history": list(self.gap_history),
            "members": [m.to_dict() for m in self.members],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EgEnsemble":
        return cls(
            members=[GbtModel.from_dict(m) for m in d["members"]],
            weights=np.array(d["weights"], dtype=float),
            moment=ConstraintMoment(MomentKind(d["moment"]), d["eps"]),
            eta=d["eta"],
            max_iter=d["max_iter"],
            bound=d["bound"],
            converged=d["converged"],
            n_iter=d["n_iter"],
            gap_history=list(d.get("gap_history", [])),
        )


def _signed_costs(moment: ConstraintMoment, mu: np.ndarray, labels, groups, events, p_event, p_cell) -> np.ndarray:
    """Per-row advantage of predicting 1 under the Lagrangian (positive -> predict 1)."""
    y = np.asarray(labels, dtype=float)
    adjust = mu.sum(axis=1)[events] / p_event[events] - mu[events, groups] / p_cell[events, groups]
    return (2.0 * y - 1.0) + adjust


def _best_mixture(errors, gammas, eps, bound):
    """min err(Q) + B * s  s.t.  +-gamma(Q) - eps <= s, Q in the simplex."""
    errors = np.asarray(errors)
    G = np.asarray(gammas).reshape(len(errors), -1).T  # constraints x hypotheses
    A = np.vstack([G, -G])
    n_h = len(errors)
    c = np.concatenate([errors, [bound]])
    A_ub = np.hstack([A, -np.ones((A.shape[0], 1))])
    b_ub = np.full(A.shape[0], eps)
    A_eq = np.concatenate([np.ones(n_h), [0.0]])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=[(0, None)] * (n_h + 1), method="highs")
    if not res.success:  # pragma: no cover - LP is always feasible
        raise RuntimeError(f"mixture LP failed: {res.message}")
    q = np.clip(res.x[:n_h], 0.0, None)
    return q / q.sum(), float(res.fun)


def eg_fit(
    fit_member: Callable,
    X,
    labels,
    groups,
    moment: ConstraintMoment | None = None,
    eta: float = 2.0,
    max_iter: int = 20,
    bound: float = 100.0,
) -> EgEnsemble:
    """Run the reduction with ``fit_member(X, y, sample_weight) -> model`` as best response."""
    moment = moment or ConstraintMoment()
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if moment.eps < 0:
        raise ValueError("slack must be >= 0")
    X = np.asarray(X, dtype=float)
    y = np.asarray(labels, dtype=np.int64)
    g = np.asarray(groups, dtype=np.int64)
    n = len(y)
    events = moment.events(y)
    p_event = np.array([np.mean(events == e) for e in range(moment.n_events)])
    p_cell = np.array([[np.mean((events == e) & (g == a)) for a in (0, 1)] for e in range(moment.n_events)])
    # empty cells cannot carry a constraint; keep their multipliers inert
    live = (p_cell > 0) & (p_event[:, None] > 0)
    p_event_safe = np.where(p_event > 0, p_event, 1.0)
    p_cell_safe = np.where(p_cell > 0, p_cell, 1.0)

    if not math.isfinite(moment.eps):
        # no active constraint: the saddle point is the plain weighted fit
        model = fit_member(X, y, np.ones(n))
        return EgEnsemble([model], np.array([1.0]), moment, eta, max_iter, bound, converged=True, n_iter=1)

    n_con = 2 * moment.n_events * 2
    theta = np.zeros(n_con)
    step = eta / bound
    members, errors, gammas, lambdas = [], [], [], []
    gap_history = []
    q = np.array([1.0])
    converged = False
    eps = moment.eps

    for t in range(max_iter):
        lam = bound * np.exp(theta) / (1.0 + np.exp(theta).sum())
        lambdas.append(lam)
        lam_pos, lam_neg = np.split(lam, 2)
        mu = (lam_pos - lam_neg).reshape(moment.n_events, 2) * live
        s = _signed_costs(moment, mu, y, g, events, p_event_safe, p_cell_safe)
        red_y = (s > 0).astype(np.int64)
        red_w = np.abs(s)
        if red_w.sum() <= 0:
            red_w = np.ones(n)
        model = fit_member(X, red_y, red_w)
        h = (model.predict_proba(X) >= 0.5).astype(float)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            viol = constraint_violation(moment, h, g, y)
        gamma = viol.gamma.ravel()
        members.append(model)
        errors.append(float(np.mean(h != y)))
        gammas.append(gamma)
        theta = theta + step * (np.concatenate([gamma, -gamma]) - eps)

        q, upper = _best_mixture(errors, gammas, eps, bound)
        lam_bar = np.mean(lambdas, axis=0)
        con = np.hstack([np.asarray(gammas), -np.asarray(gammas)]) - eps  # hypotheses x constraints
        lower = float(np.min(np.asarray(errors) + con @ lam_bar))
        gap = max(upper - lower, 0.0)
        gap_history.append(gap)
        logger.debug("eg iter %d: err=%.4f max|gamma|=%.4f gap=%.5f", t, errors[-1], np.abs(gamma).max(), gap)
        if t >= 1 and gap < eps:
            converged = True
            break

    return EgEnsemble(
        members=members,
        weights=q,
        moment=moment,
        eta=eta,
        max_iter=max_iter,
        bound=bound,
        converged=converged,
        n_iter=len(members),
        gap_history=gap_history,
        lambda_history=[lam.tolist() for lam in lambdas],
    )


def gbt_member_builder(params=None) -> Callable:
    def fit(X, y, w):
        return gbt_fit(X, y, w, params)

    return fit


def append_member_builder(cache: GbtModel, n_new_trees: int = 10) -> Callable:
    def fit(X, y, w):
        return gbt_append(cache, X, y, w, n_new_trees)

    return fit


class IncrementalEg:
    """EG over an appendable booster, refreshed once per window of the stream."""

    def __init__(
        self,
        cache: GbtModel,
        moment: ConstraintMoment | None = None,
        n_new_trees: int = 10,
        eta: float = 2.0,
        max_iter: int = 20,
        bound: float = 100.0,
    ):
        self.cache = cache
        self.moment = moment or ConstraintMoment()
        self.n_new_trees = n_new_trees
        self.eta, self.max_iter, self.bound = eta, max_iter, bound
        self.ensemble: EgEnsemble | None = None
        self.n_updates = 0

    def update(self, X, labels, groups) -> EgEnsemble:
        self.ensemble = eg_fit(
            append_member_builder(self.cache, self.n_new_trees),
            X,
            labels,
            groups,
            self.moment,
            self.eta,
            self.max_iter,
            self.bound,
        )
        # the next window appends on top of the most heavily weighted member
        self.cache = self.ensemble.dominant_member()
        self.n_updates += 1
        return self.ensemble

    def predict_proba(self, X) -> np.ndarray:
        if self.ensemble is None:
            return self.cache.predict_proba(X)
        return self.ensemble.predict_proba(X)


def eg_fit_incremental(
    cache: GbtModel,
    X,
    labels,
    groups,
    moment: ConstraintMoment | None = None,
    cadence: int = 100,
    n_new_trees: int = 10,
    **eg_kwargs,
) -> EgEnsemble:
    """Windowed EG over a stream; each window appends trees to the cached booster."""
    X = np.asarray(X, dtype=float)
    if len(X) == 0:
        raise ValueError("stream is empty")
    inc = IncrementalEg(cache, moment, n_new_trees, **eg_kwargs)
    for start in range(0, len(X), cadence):
        sl = slice(start, start + cadence)
        inc.update(X[sl], np.asarray(labels)[sl], np.asarray(groups)[sl])
    return inc.ensemble
