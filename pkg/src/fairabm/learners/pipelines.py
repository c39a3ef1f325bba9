"""Offline (batch) and online (prequential) training pipelines with mitigation variants.

Offline: standardize, tune the booster by seeded random search on a
time-ordered validation tail, then calibrate with isotonic regression on that
tail. Exponentiated-gradient variants reuse the tuned booster settings and
skip calibration, since a label-fitted monotone map would shift the
constrained decision boundary.

Online: test-then-train over the stream with a streaming scaler, a Hoeffding
tree and a sliding-window isotonic calibrator. EG variants instead cache a
booster fitted on the warm-up prefix and append constrained trees once per
update interval.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..dataset import VisibleData
from ..mitigation.expgrad import (
    ConstraintMoment,
    EgEnsemble,
    IncrementalEg,
    MomentKind,
    eg_fit,
    gbt_member_builder,
)
from ..mitigation.reweigh import EmaReweigherState, kamiran_calders_weights, manual_weights
from .gbt import GbtModel, GbtParams, gbt_fit, weighted_log_loss
from .hoeffding import HoeffdingParams, HoeffdingTree
from .isotonic import CalibrationBuffer, IsotonicCalibrator, isotonic_fit
from .scaler import BatchScaler, StreamingScaler
from .search import GBT_SPACE, HOEFFDING_SPACE, SearchSpec, random_search, time_split

logger = logging.getLogger(__name__)

VARIANTS = ("none", "reweight_auto", "reweight_manual", "eg_dp", "eg_eo")
EG_MOMENTS = {"eg_dp": MomentKind.DP, "eg_eo": MomentKind.EO}


def check_variant(variant: str) -> str:
    if variant not in VARIANTS:
        raise ValueError(f"unknown mitigation {variant!r}; expected one of {VARIANTS}")
    return variant


@dataclass(frozen=True)
class EgSettings:
    eps: float = 0.02
    eta: float = 2.0
    max_iter: int = 20
    bound: float = 100.0


@dataclass(frozen=True)
class OfflineSettings:
    n_candidates: int = 3
    search_seed: int = 0
    validation_fraction: float = 0.2
    manual: dict = field(default_factory=lambda: {"A": 0.5, "B": 1.5})
    eg: EgSettings = EgSettings()


def _require_visible(data) -> VisibleData:
    if not isinstance(data, VisibleData):
        raise TypeError("pipelines accept masked VisibleData only")
    return data


def _model_from_dict(d: dict):
    if d["kind"] == "gbt":
        return GbtModel.from_dict(d)
    if d["kind"] == "eg":
        return EgEnsemble.from_dict(d)
    if d["kind"] == "hoeffding":
        return HoeffdingTree.from_dict(d)
    raise ValueError(f"unknown model kind {d['kind']!r}")


@dataclass
class OfflineModel:
    variant: str
    feature_names: tuple
    scaler: BatchScaler
    model: object  # GbtModel or EgEnsemble
    calibrator: IsotonicCalibrator | None
    params: dict

    def raw_proba(self, X) -> np.ndarray:
        return self.model.predict_proba(self.scaler.transform(X))

    def predict_proba(self, X) -> np.ndarray:
        p = self.raw_proba(X)
        return self.calibrator.predict(p) if self.calibrator is not None else p

    def to_dict(self) -> dict:
        return {
            "schema": "fairabm.model/1",
            "pipeline": "offline",
            "variant": self.variant,
            "feature_names": list(self.feature_names),
            "params": self.params,
            "scaler": self.scaler.to_dict(),
            "model": self.model.to_dict(),
            "calibrator": self.calibrator.to_dict() if self.calibrator is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OfflineModel":
        return cls(
            d["variant"],
            tuple(d["feature_names"]),
            BatchScaler.from_dict(d["scaler"]),
            _model_from_dict(d["model"]),
            IsotonicCalibrator.from_dict(d["calibrator"]) if d["calibrator"] is not None else None,
            d["params"],
        )


def tune_gbt(Z, y, weights, settings: OfflineSettings):
    """Random search on the time-ordered split; returns (params, fitted model, fit idx, valid idx)."""
    fit_idx, val_idx = time_split(len(y), settings.validation_fraction)
    spec = SearchSpec(dict(GBT_SPACE), settings.n_candidates, settings.search_seed, settings.validation_fraction)
    w_fit = None if weights is None else weights[fit_idx]
    fitted = {}

    def evaluate(cand):
        params = GbtParams(**cand)
        model = gbt_fit(Z[fit_idx], y[fit_idx], w_fit, params)
        fitted[tuple(sorted(cand.items()))] = model
        p = model.predict_proba(Z[val_idx])
        return weighted_log_loss(y[val_idx], p, np.ones(len(val_idx)))

    result = random_search(spec, evaluate)
    best = fitted[tuple(sorted(result.best_params.items()))]
    return result.best_params, best, fit_idx, val_idx


def offline_weights(variant: str, groups, labels, settings: OfflineSettings):
    if variant == "reweight_auto":
        return kamiran_calders_weights(groups, labels).weights_for(groups, labels)
    if variant == "reweight_manual":
        return manual_weights(settings.manual).weights_for(groups, labels)
    return None


def fit_offline(
    train: VisibleData, variant: str = "none", settings: OfflineSettings | None = None, tuned: dict | None = None
) -> OfflineModel:
    train = _require_visible(train)
    check_variant(variant)
    settings = settings or OfflineSettings()
    scaler = BatchScaler().fit(train.X)
    Z = scaler.transform(train.X)
    y, g = train.y, train.groups

    if variant in EG_MOMENTS:
        if tuned is None:
            tuned, _, _, _ = tune_gbt(Z, y, None, settings)
        eg = settings.eg
        ens = eg_fit(
            gbt_member_builder(GbtParams(**tuned)),
            Z,
            y,
            g,
            ConstraintMoment(EG_MOMENTS[variant], eg.eps),
            eg.eta,
            eg.max_iter,
            eg.bound,
        )
        if not ens.converged:
            logger.info("EG (%s) stopped after %d iterations without closing the gap", variant, ens.n_iter)
        return OfflineModel(variant, train.feature_names, scaler, ens, None, dict(tuned))

    fit_idx, _ = time_split(len(y), settings.validation_fraction)
    # reweighing statistics come from the rows the booster is fitted on
    w_fit = offline_weights(variant, g[fit_idx], y[fit_idx], settings)
    weights = None
    if w_fit is not None:
        weights = np.ones(len(y))
        weights[fit_idx] = w_fit
    params, model, fit_idx, val_idx = tune_gbt(Z, y, weights, settings)
    calibrator = isotonic_fit(model.predict_proba(Z[val_idx]), y[val_idx])
    return OfflineModel(variant, train.feature_names, scaler, model, calibrator, dict(params))


@dataclass(frozen=True)
class OnlineSettings:
    update_interval: int = 100
    calibrate_interval: int = 500
    warmup: int = 500
    n_candidates: int = 10
    search_seed: int = 0
    ema_decay: float = 0.01
    w_min: float = 0.1
    w_max: float = 10.0
    manual: dict = field(default_factory=lambda: {"A": 0.5, "B": 1.5})
    gbt: GbtParams = GbtParams()
    n_new_trees: int = 10
    eg: EgSettings = EgSettings()


@dataclass
class OnlineModel:
    variant: str
    feature_names: tuple
    scaler: StreamingScaler
    model: object  # HoeffdingTree, or IncrementalEg for EG variants
    calibrator: IsotonicCalibrator | None
    params: dict

    def predict_proba(self, X) -> np.ndarray:
        Z = np.array([self.scaler.transform_one(x) for x in np.asarray(X, dtype=float)])
        if isinstance(self.model, HoeffdingTree):
            p = self.model.predict_proba(Z)
        else:
            p = self.model.predict_proba(Z)
        return self.calibrator.predict(p) if self.calibrator is not None else p

    def to_dict(self) -> dict:
        if isinstance(self.model, IncrementalEg):
            model = {"kind": "eg_incremental", "cache": self.model.cache.to_dict()}
            model["ensemble"] = self.model.ensemble.to_dict() if self.model.ensemble is not None else None
        else:
            model = self.model.to_dict()
        return {
            "schema": "fairabm.model/1",
            "pipeline": "online",
            "variant": self.variant,
            "feature_names": list(self.feature_names),
            "params": self.params,
            "scaler": self.scaler.to_dict(),
            "model": model,
            "calibrator": self.calibrator.to_dict() if self.calibrator is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OnlineModel":
        m = d["model"]
        if m["kind"] == "eg_incremental":
            model = IncrementalEg(GbtModel.from_dict(m["cache"]))
            if m["ensemble"] is not None:
                model.ensemble = EgEnsemble.from_dict(m["ensemble"])
        else:
            model = _model_from_dict(m)
        return cls(
            d["variant"],
            tuple(d["feature_names"]),
            StreamingScaler.from_dict(d["scaler"]),
            model,
            IsotonicCalibrator.from_dict(d["calibrator"]) if d["calibrator"] is not None else None,
            d["params"],
        )


@dataclass
class OnlineRun:
    model: OnlineModel
    probs: np.ndarray  # prequential probability for every row
    n_calibrations: int = 0


def _prequential_tree(stream: VisibleData, variant: str, params: HoeffdingParams, settings: OnlineSettings):
    n, d = stream.X.shape
    scaler = StreamingScaler(d)
    tree = HoeffdingTree(d, params)
    buffer = CalibrationBuffer(settings.calibrate_interval)
    ema = EmaReweigherState(settings.ema_decay, settings.w_min, settings.w_max)
    manual = manual_weights(settings.manual) if variant == "reweight_manual" else None
    probs = np.empty(n)
    for i in range(n):
        z = scaler.update(stream.X[i])
        raw = tree.predict_proba_one(z)
        probs[i] = buffer.predict(raw)
        y, g = int(stream.y[i]), int(stream.groups[i])
        if variant == "reweight_auto":
            w = ema.update(g, y)
        elif manual is not None:
            w = manual[(g, y)]
        else:
            w = 1.0
        tree.learn_one(z, y, w)
        buffer.add(raw, y)
    return scaler, tree, buffer, probs


def tune_hoeffding(stream: VisibleData, variant: str, settings: OnlineSettings) -> dict:
    """Pick the candidate with the lowest prequential log loss on the warm-up prefix."""
    prefix = stream.subset(slice(0, max(settings.warmup, 2)))
    spec = SearchSpec(dict(HOEFFDING_SPACE), settings.n_candidates, settings.search_seed)

    def evaluate(cand):
        _, _, _, probs = _prequential_tree(prefix, variant, HoeffdingParams(**cand), settings)
        return weighted_log_loss(prefix.y, probs, np.ones(len(prefix)))

    return random_search(spec, evaluate).best_params


def _window_starts(n: int, settings: OnlineSettings):
    first = min(settings.warmup, n)
    bounds = [(0, first)]
    for s in range(first, n, settings.update_interval):
        bounds.append((s, min(s + settings.update_interval, n)))
    return bounds


def run_online(stream: VisibleData, variant: str = "none", settings: OnlineSettings | None = None) -> OnlineRun:
    stream = _require_visible(stream)
    check_variant(variant)
    settings = settings or OnlineSettings()
    n, d = stream.X.shape
    if n == 0:
        raise ValueError("empty stream")

    if variant not in EG_MOMENTS:
        params = tune_hoeffding(stream, variant, settings)
        scaler, tree, buffer, probs = _prequential_tree(stream, variant, HoeffdingParams(**params), settings)
        model = OnlineModel(variant, stream.feature_names, scaler, tree, buffer.calibrator, params)
        return OnlineRun(model, probs, buffer.n_refits)

    scaler = StreamingScaler(d)
    Z = np.array([scaler.update(x) for x in stream.X])
    probs = np.full(n, 0.5)
    eg = settings.eg
    moment = ConstraintMoment(EG_MOMENTS[variant], eg.eps)
    inc = None
    for start, stop in _window_starts(n, settings):
        sl = slice(start, stop)
        if inc is None:
            cache = gbt_fit(Z[sl], stream.y[sl], None, settings.gbt)
            inc = IncrementalEg(cache, moment, settings.n_new_trees, eg.eta, eg.max_iter, eg.bound)
        else:
            probs[sl] = inc.predict_proba(Z[sl])
        inc.update(Z[sl], stream.y[sl], stream.groups[sl])
    params = {"gbt": settings.gbt.to_dict(), "n_new_trees": settings.n_new_trees, "windows": inc.n_updates}
    model = OnlineModel(variant, stream.feature_names, scaler, inc, None, params)
    return OnlineRun(model, probs, 0)
