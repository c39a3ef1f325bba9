"""Agent-based loan-application society.

Entities are spawned with group-conditioned attributes, optionally join a
trust-gated peer network, exchange wealth with peers, and eventually apply
for a loan once. Each application produces one labeled row whose score is
skewed by the prejudice factor ``lbl_beta``.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .config import N_EDUCATION_LEVELS, ConfigError, Group, ScenarioConfig

logger = logging.getLogger(__name__)

MAX_PEERS = 3
DEFAULT_WEALTH_BOUNDS = (30.0, 89.0)
LOAN_HIST_CAP = 5
LOAN_AMOUNT_FACTOR = (0.5, 3.0)  # log-uniform multiple of wealth
CREDIT_NOISE_SD = 0.05

# Weights of the qualification score; they sum to 1 so the score spans [0, 1].
SCORE_WEIGHTS = {
    "wealth": 0.15,
    "credit_score": 0.15,
    "fin_lit": 0.10,
    "loan_hist": 0.35,
    "has_job": 0.10,
    "has_car": 0.05,
    "has_house": 0.10,
}


class State(str, Enum):
    ACTIVE = "active"
    APPLIED = "applied"
    PROCESSED = "processed"


_NEXT_STATE = {State.ACTIVE: State.APPLIED, State.APPLIED: State.PROCESSED}


@dataclass(slots=True)
class Entity:
    id: int
    group: Group
    wealth: float
    education: int
    trust: float
    fin_lit: float
    has_job: bool
    has_car: bool
    has_house: bool
    loan_hist: int
    credit_score: float = 0.0
    credit_noise: float = 0.0
    state: State = State.ACTIVE
    peer_ids: set[int] = field(default_factory=set)
    apply_step: int = -1

    def advance(self, new_state: State) -> None:
        if _NEXT_STATE.get(self.state) is not new_state:
            raise ValueError(f"illegal transition {self.state.value} -> {new_state.value}")
        self.state = new_state


@dataclass(frozen=True, slots=True)
class DatasetRow:
    entity_id: int
    timestep: int
    group: Group
    wealth: float
    education: int
    trust: float
    fin_lit: float
    credit_score: float
    loan_hist: int
    loan_amount: float
    has_job: bool
    has_car: bool
    has_house: bool
    qualified: bool
    loan_approved: bool
    raw_score: float
    biased_score: float

    @property
    def label(self) -> int:
        return int(self.loan_approved)


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else float(x)


def _norm_wealth(wealth: float, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    return _clamp01((wealth - lo) / (hi - lo)) if hi > lo else 0.0


def _norm_education(education: int) -> float:
    return _clamp01(education / (N_EDUCATION_LEVELS - 1))


def derive_trust(education: int, wealth: float, wealth_bounds=DEFAULT_WEALTH_BOUNDS) -> float:
    """Equal blend of normalized education and wealth, in [0, 1]."""
    return _clamp01(0.5 * _norm_education(education) + 0.5 * _norm_wealth(wealth, wealth_bounds))


def derive_finlit(education: int, wealth: float, trust: float, wealth_bounds=DEFAULT_WEALTH_BOUNDS) -> float:
    return _clamp01(
        0.4 * _norm_education(education) + 0.3 * _norm_wealth(wealth, wealth_bounds) + 0.3 * _clamp01(trust)
    )


def derive_credit_score(wealth, loan_hist, fin_lit, noise=0.0, wealth_bounds=DEFAULT_WEALTH_BOUNDS) -> float:
    return _clamp01(
        0.5 * _norm_wealth(wealth, wealth_bounds)
        + 0.2 * min(loan_hist, LOAN_HIST_CAP) / LOAN_HIST_CAP
        + 0.3 * fin_lit
        + noise
    )


def spawn_entity(cfg: ScenarioConfig, rng: np.random.Generator, entity_id: int = 0) -> Entity:
    if not 0.0 <= cfg.rep_alpha <= 1.0:
        raise ConfigError(f"rep_alpha={cfg.rep_alpha} outside [0, 1]")
    group = Group.A if rng.random() < cfg.rep_alpha else Group.B
    p = cfg.group_params[group]
    bounds = cfg.wealth_bounds
    wealth = float(rng.uniform(*p.wealth_range))
    education = int(rng.choice(N_EDUCATION_LEVELS, p=p.education_probs))
    has_job = bool(rng.random() < p.p_job)
    has_car = bool(rng.random() < p.p_car)
    has_house = bool(rng.random() < p.p_house)
    loan_hist = int(rng.poisson(p.loan_hist_rate))
    trust = derive_trust(education, wealth, bounds)
    fin_lit = derive_finlit(education, wealth, trust, bounds)
    noise = float(rng.normal(0.0, CREDIT_NOISE_SD))
    return Entity(
        id=entity_id,
        group=group,
        wealth=wealth,
        education=education,
        trust=trust,
        fin_lit=fin_lit,
        has_job=has_job,
        has_car=has_car,
        has_house=has_house,
        loan_hist=loan_hist,
        credit_score=derive_credit_score(wealth, loan_hist, fin_lit, noise, bounds),
        credit_noise=noise,
    )


class PeerNetwork:
    """Undirected peer graph with a hard degree cap."""

    def __init__(self, max_degree: int = MAX_PEERS):
        self.max_degree = max_degree
        self.adj: dict[int, set[int]] = {}
        self.edges: list[tuple[int, int]] = []
        self._open: list[int] = []  # members with spare degree, in join order

    def __contains__(self, node: int) -> bool:
        return node in self.adj

    def __len__(self) -> int:
        return len(self.adj)

    def add_node(self, node: int) -> None:
        if node not in self.adj:
            self.adj[node] = set()
            self._open.append(node)

    def degree(self, node: int) -> int:
        return len(self.adj[node])

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError("self-loops are not allowed")
        if v in self.adj[u]:
            return
        if self.degree(u) >= self.max_degree or self.degree(v) >= self.max_degree:
            raise ValueError(f"degree cap {self.max_degree} exceeded on edge ({u}, {v})")
        self.adj[u].add(v)
        self.adj[v].add(u)
        self.edges.append((min(u, v), max(u, v)))
        for n in (u, v):
            if self.degree(n) >= self.max_degree:
                self._open.remove(n)

    def open_members(self, exclude: int | None = None) -> list[int]:
        return [n for n in self._open if n != exclude]


def maybe_join_network(e: Entity, net: PeerNetwork, cfg: ScenarioConfig, rng: np.random.Generator) -> bool:
    """Admit ``e`` if trusting enough, wiring it to up to three open members."""
    if e.state is State.PROCESSED:
        raise ValueError("processed entities cannot join the network")
    if e.trust < cfg.trust_join_threshold or e.id in net:
        return False
    candidates = net.open_members(exclude=e.id)
    net.add_node(e.id)
    k = min(net.max_degree, len(candidates))
    if k:
        for i in rng.choice(len(candidates), size=k, replace=False):
            net.add_edge(e.id, candidates[int(i)])
    e.peer_ids = net.adj[e.id]  # shared with the graph, stays current
    return True


def update_trust(e: Entity, peer_trusts, rate: float) -> float:
    """Move trust toward the peers' mean trust; no-op without peers."""
    peer_trusts = list(peer_trusts)
    if not peer_trusts:
        return e.trust
    mean = sum(peer_trusts) / len(peer_trusts)
    e.trust = _clamp01(e.trust + rate * (mean - e.trust))
    return e.trust


@dataclass
class Transaction:
    step: int
    sender: int
    receiver: int
    amount: float


def maybe_transact(
    net: PeerNetwork, entities: dict[int, Entity], cfg: ScenarioConfig, rng: np.random.Generator, step: int = 0
) -> Transaction | None:
    """Possibly move wealth along one random edge, low-trust -> high-trust endpoint."""
    if not net.edges or rng.random() >= cfg.transaction_prob:
        return None
    u, v = net.edges[int(rng.integers(len(net.edges)))]
    eu, ev = entities[u], entities[v]
    if eu.trust == ev.trust:
        return None
    sender, receiver = (eu, ev) if eu.trust < ev.trust else (ev, eu)
    amount = cfg.transaction_fraction * min(eu.wealth, ev.wealth)
    sender.wealth -= amount
    receiver.wealth += amount
    return Transaction(step, sender.id, receiver.id, amount)


def score_applicant(e: Entity, wealth_bounds=DEFAULT_WEALTH_BOUNDS) -> float:
    """Weighted sum of normalized attributes; monotone in each and within [0, 1]."""
    parts = {
        "wealth": _norm_wealth(e.wealth, wealth_bounds),
        "credit_score": _clamp01(e.credit_score),
        "fin_lit": _clamp01(e.fin_lit),
        "loan_hist": min(e.loan_hist, LOAN_HIST_CAP) / LOAN_HIST_CAP,
        "has_job": float(e.has_job),
        "has_car": float(e.has_car),
        "has_house": float(e.has_house),
    }
    return _clamp01(sum(SCORE_WEIGHTS[k] * v for k, v in parts.items()))


def apply_label_bias(raw_score: float, group: Group, beta: float) -> float:
    if not 0.0 <= beta < 1.0:
        raise ConfigError(f"beta={beta} outside [0, 1)")
    factor = 1.0 + beta if Group(group) is Group.A else 1.0 - beta
    return _clamp01(raw_score * factor)


def assign_label(biased_score: float, cfg: ScenarioConfig, rng: np.random.Generator) -> tuple[bool, bool]:
    """Threshold then flip with ``label_flip_prob``; returns (qualified, loan_approved)."""
    label = biased_score >= cfg.qualify_threshold
    if rng.random() < cfg.label_flip_prob:
        label = not label
    return label, label


class Society:
    """Mutable world state of one simulation run."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.rng_seed)
        self.entities: dict[int, Entity] = {}
        self.net = PeerNetwork()
        self.rows: list[DatasetRow] = []
        self.transactions: list[Transaction] = []
        self.received = defaultdict(float)  # transaction volume received per group
        self._schedule: dict[int, list[int]] = defaultdict(list)
        self._active_members: set[int] = set()
        self.step = 0

    def _spawn(self, t: int) -> None:
        e = spawn_entity(self.cfg, self.rng, entity_id=len(self.entities))
        e.apply_step = t + int(self.rng.integers(0, self.cfg.max_application_delay + 1))
        self.entities[e.id] = e
        self._schedule[e.apply_step].append(e.id)
        if maybe_join_network(e, self.net, self.cfg, self.rng):
            self._active_members.add(e.id)

    def _process(self, e: Entity, t: int) -> DatasetRow:
        cfg = self.cfg
        bounds = cfg.wealth_bounds
        e.advance(State.APPLIED)
        # second-order attributes reflect wealth/trust drift since spawning
        e.fin_lit = derive_finlit(e.education, e.wealth, e.trust, bounds)
        e.credit_score = derive_credit_score(e.wealth, e.loan_hist, e.fin_lit, e.credit_noise, bounds)
        lo, hi = np.log(LOAN_AMOUNT_FACTOR)
        loan_amount = float(e.wealth * np.exp(self.rng.uniform(lo, hi)))
        raw = score_applicant(e, bounds)
        biased = apply_label_bias(raw, e.group, cfg.lbl_beta)
        qualified, approved = assign_label(biased, cfg, self.rng)
        e.advance(State.PROCESSED)
        self._active_members.discard(e.id)
        return DatasetRow(
            entity_id=e.id,
            timestep=t,
            group=e.group,
            wealth=e.wealth,
            education=e.education,
            trust=e.trust,
            fin_lit=e.fin_lit,
            credit_score=e.credit_score,
            loan_hist=e.loan_hist,
            loan_amount=loan_amount,
            has_job=e.has_job,
            has_car=e.has_car,
            has_house=e.has_house,
            qualified=qualified,
            loan_approved=approved,
            raw_score=raw,
            biased_score=biased,
        )

    def tick(self) -> list[DatasetRow]:
        t = self.step
        cfg = self.cfg
        if self.rng.random() < cfg.spawn_prob:
            self._spawn(t)
        for eid in sorted(self._active_members):
            e = self.entities[eid]
            peers = self.net.adj[eid]
            if peers:
                update_trust(e, (self.entities[p].trust for p in sorted(peers)), cfg.trust_adapt_rate)
        tx = maybe_transact(self.net, self.entities, cfg, self.rng, step=t)
        if tx is not None:
            self.transactions.append(tx)
            self.received[self.entities[tx.receiver].group] += tx.amount
        emitted = [self._process(self.entities[eid], t) for eid in self._schedule.pop(t, [])]
        self.rows.extend(emitted)
        self.step += 1
        return emitted

    def run(self) -> list[DatasetRow]:
        while self.step < self.cfg.n_steps:
            self.tick()
        logger.debug(
            "simulated %d steps: %d entities, %d rows, %d network members",
            self.cfg.n_steps,
            len(self.entities),
            len(self.rows),
            len(self.net),
        )
        return self.rows


def run_simulation(cfg: ScenarioConfig) -> list[DatasetRow]:
    """Run ``cfg.n_steps`` steps and return the emitted rows in time order."""
    cfg.validate()
    return Society(cfg).run()
