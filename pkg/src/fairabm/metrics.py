"""Performance, group-disaggregated and fairness metrics, composite scores and rank tables."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import rankdata

PROB_CLIP = 1e-15
THRESHOLD = 0.5
GROUP_NAMES = ("A", "B")


@dataclass
class PerformanceReport:
    accuracy: float
    precision: float
    recall: float
    log_loss: float
    roc_auc: float | None
    n: int
    approval_rate: float
    groups: dict = field(default_factory=dict)  # "A"/"B" -> PerformanceReport or None

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "groups"}
        d["groups"] = {g: (r.to_dict() if r is not None else None) for g, r in self.groups.items()}
        return d


@dataclass
class FairnessReport:
    spd: float
    eod: float | None
    approval_rate: dict
    tpr: dict
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def log_loss(labels, probs) -> float:
    y = np.asarray(labels, dtype=float)
    p = np.clip(np.asarray(probs, dtype=float), PROB_CLIP, 1 - PROB_CLIP)
    if len(y) == 0:
        return float("nan")
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log1p(-p)))


def roc_auc(labels, scores) -> float | None:
    """Mann-Whitney rank statistic; ties count one half. None for single-class labels."""
    y = np.asarray(labels, dtype=np.int64)
    s = np.asarray(scores, dtype=float)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(s)
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def _safe_div(a, b) -> float:
    return float(a / b) if b else 0.0


def performance_metrics(probs, labels, threshold: float = THRESHOLD) -> PerformanceReport:
    p = np.asarray(probs, dtype=float)
    y = np.asarray(labels, dtype=np.int64)
    pred = (p >= threshold).astype(np.int64)
    tp = int(np.sum((pred == 1) & (y == 1)))
    fp = int(np.sum((pred == 1) & (y == 0)))
    fn = int(np.sum((pred == 0) & (y == 1)))
    n = len(y)
    return PerformanceReport(
        accuracy=_safe_div(np.sum(pred == y), n),
        precision=_safe_div(tp, tp + fp),
        recall=_safe_div(tp, tp + fn),
        log_loss=log_loss(y, p),
        roc_auc=roc_auc(y, p),
        n=n,
        approval_rate=_safe_div(pred.sum(), n),
    )


def group_disaggregate(probs, labels, groups, threshold: float = THRESHOLD) -> PerformanceReport:
    p = np.asarray(probs, dtype=float)
    y = np.asarray(labels, dtype=np.int64)
    g = np.asarray(groups, dtype=np.int64)
    report = performance_metrics(p, y, threshold)
    for code, name in enumerate(GROUP_NAMES):
        sel = g == code
        report.groups[name] = performance_metrics(p[sel], y[sel], threshold) if sel.any() else None
    return report


def fairness_from_rates(approval_a, approval_b, tpr_a=None, tpr_b=None) -> FairnessReport:
    """Fairness report from per-group summaries; negative values favour group A."""
    flags = []
    eod = None
    if tpr_a is None or tpr_b is None:
        flags.append("eod_undefined")
    else:
        eod = tpr_b - tpr_a
    return FairnessReport(
        spd=approval_b - approval_a,
        eod=eod,
        approval_rate={"A": approval_a, "B": approval_b},
        tpr={"A": tpr_a, "B": tpr_b},
        flags=flags,
    )


def fairness_metrics(predictions, labels, groups) -> FairnessReport:
    pred = np.asarray(predictions, dtype=float)
    y = np.asarray(labels, dtype=np.int64)
    g = np.asarray(groups, dtype=np.int64)
    rates, tprs, flags = {}, {}, []
    for code, name in enumerate(GROUP_NAMES):
        sel = g == code
        rates[name] = float(pred[sel].mean()) if sel.any() else None
        pos = sel & (y == 1)
        tprs[name] = float(pred[pos].mean()) if pos.any() else None
    if rates["A"] is None or rates["B"] is None:
        raise ValueError("fairness metrics need members of both groups")
    report = fairness_from_rates(rates["A"], rates["B"], tprs["A"], tprs["B"])
    report.flags.extend(flags)
    return report


PERF_KEYS = ("roc_auc", "accuracy", "precision", "recall", "log_loss")


def _minmax(values: list) -> list:
    finite = [v for v in values if v is not None and math.isfinite(v)]
    if not finite:
        return [None] * len(values)
    lo, hi = min(finite), max(finite)
    return [None if v is None or not math.isfinite(v) else (1.0 if hi == lo else (v - lo) / (hi - lo)) for v in values]


@dataclass
class CompositeScores:
    perf: dict
    fair: dict
    degenerate: bool = False


def composite_scores(perf_reports: dict, fair_reports: dict) -> CompositeScores:
    """Per-variant composite scores within one scenario.

    Performance: mean of min-max normalized AUC, accuracy, precision, recall and
    (1 - normalized log loss) across the variants; absent metrics are skipped.
    Fairness: -mean(|spd|, |eod|), so 0 is best.
    """
    names = list(perf_reports)
    degenerate = len(names) < 2
    cols = {}
    for key in PERF_KEYS:
        raw = [getattr(perf_reports[v], key) for v in names]
        if degenerate:
            col = [None if x is None else (1 - x if key == "log_loss" else x) for x in raw]
        else:
            col = _minmax(raw)
            if key == "log_loss":
                col = [None if x is None else 1.0 - x for x in col]
        cols[key] = col
    perf = {}
    for i, v in enumerate(names):
        parts = [cols[k][i] for k in PERF_KEYS if cols[k][i] is not None]
        perf[v] = float(np.mean(parts)) if parts else float("nan")
    fair = {}
    for v, fr in fair_reports.items():
        parts = [abs(x) for x in (fr.spd, fr.eod) if x is not None]
        fair[v] = -float(np.mean(parts)) if parts else float("nan")
    return CompositeScores(perf, fair, degenerate)


def min_ranks(scores: dict) -> dict:
    """Descending-score ordinals; exact ties share the smallest rank."""
    names = list(scores)
    vals = np.array([scores[n] for n in names], dtype=float)
    ranks = rankdata(-vals, method="min")
    return {n: int(r) for n, r in zip(names, ranks)}


@dataclass
class RankTable:
    perf_ranks: dict  # scenario -> variant -> rank
    fair_ranks: dict
    counts: dict  # variant -> {"perf_1st", "perf_2nd", "fair_1st", "fair_2nd"}

    def to_rows(self) -> list[dict]:
        return [{"variant": v, **c} for v, c in self.counts.items()]


def rank_variants(per_scenario: dict) -> RankTable:
    """``per_scenario``: scenario -> CompositeScores."""
    perf_ranks, fair_ranks = {}, {}
    variants: list = []
    for scen, cs in per_scenario.items():
        if len(cs.perf) < 2:
            raise ValueError(f"scenario {scen}: need at least two variants to rank")
        perf_ranks[scen] = min_ranks(cs.perf)
        fair_ranks[scen] = min_ranks(cs.fair)
        for v in cs.perf:
            if v not in variants:
                variants.append(v)
    counts = {v: {"perf_1st": 0, "perf_2nd": 0, "fair_1st": 0, "fair_2nd": 0} for v in variants}
    for table, prefix in ((perf_ranks, "perf"), (fair_ranks, "fair")):
        for ranks in table.values():
            for v, r in ranks.items():
                if r == 1:
                    counts[v][f"{prefix}_1st"] += 1
                elif r == 2:
                    counts[v][f"{prefix}_2nd"] += 1
    return RankTable(perf_ranks, fair_ranks, counts)
