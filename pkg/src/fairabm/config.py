"""Scenario configuration and its plain-text (TOML) file format."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path

try:  # pragma: no cover - depends on interpreter version
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

SCENARIO_SCHEMA = "fairabm.scenario/1"


class ConfigError(ValueError):
    """Raised for invalid scenario or plan parameters."""


class Group(str, Enum):
    A = "A"  # privileged
    B = "B"  # protected


@dataclass(frozen=True)
class GroupParams:
    wealth_range: tuple[float, float]
    p_job: float
    p_car: float
    p_house: float
    education_probs: tuple[float, ...]  # categorical over levels 0..4
    loan_hist_rate: float  # Poisson mean of prior loans

    def validate(self, name: str) -> None:
        lo, hi = self.wealth_range
        if not 0 <= lo <= hi:
            raise ConfigError(f"group {name}: bad wealth_range {self.wealth_range}")
        for key in ("p_job", "p_car", "p_house"):
            p = getattr(self, key)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"group {name}: {key}={p} outside [0, 1]")
        if len(self.education_probs) != N_EDUCATION_LEVELS:
            raise ConfigError(f"group {name}: need {N_EDUCATION_LEVELS} education probabilities")
        if any(p < 0 for p in self.education_probs) or not math.isclose(sum(self.education_probs), 1.0, abs_tol=1e-9):
            raise ConfigError(f"group {name}: education_probs must be a distribution")
        if self.loan_hist_rate < 0:
            raise ConfigError(f"group {name}: loan_hist_rate must be >= 0")


N_EDUCATION_LEVELS = 5

DEFAULT_GROUP_PARAMS = {
    Group.A: GroupParams(
        wealth_range=(50.0, 89.0),
        p_job=0.9,
        p_car=0.8,
        p_house=0.6,
        education_probs=(0.05, 0.15, 0.30, 0.30, 0.20),
        loan_hist_rate=1.7,
    ),
    Group.B: GroupParams(
        wealth_range=(30.0, 59.0),
        p_job=0.7,
        p_car=0.5,
        p_house=0.3,
        education_probs=(0.20, 0.30, 0.30, 0.15, 0.05),
        loan_hist_rate=1.5,
    ),
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one simulation run depends on, seed included."""

    lbl_beta: float = 0.0
    rep_alpha: float = 0.5
    n_steps: int = 10000
    qualify_threshold: float = 0.5
    label_flip_prob: float = 0.05
    trust_join_threshold: float = 0.6
    trust_adapt_rate: float = 0.1
    transaction_prob: float = 0.2
    transaction_fraction: float = 0.01
    spawn_prob: float = 0.6
    max_application_delay: int = 30
    rng_seed: int = 0
    group_params: dict[Group, GroupParams] = field(default_factory=lambda: dict(DEFAULT_GROUP_PARAMS))

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not 0.0 <= self.lbl_beta < 1.0:
            raise ConfigError(f"lbl_beta={self.lbl_beta} outside [0, 1)")
        # closed interval: alpha = 1 (or 0) is the degenerate single-group society
        if not 0.0 <= self.rep_alpha <= 1.0:
            raise ConfigError(f"rep_alpha={self.rep_alpha} outside [0, 1]")
        if self.n_steps < 0:
            raise ConfigError("n_steps must be >= 0")
        if not 0.0 < self.qualify_threshold < 1.0:
            raise ConfigError("qualify_threshold must be in (0, 1)")
        for key in ("label_flip_prob", "trust_join_threshold", "transaction_prob", "spawn_prob"):
            v = getattr(self, key)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{key}={v} outside [0, 1]")
        if not 0.0 < self.trust_adapt_rate <= 1.0:
            raise ConfigError("trust_adapt_rate must be in (0, 1]")
        if not 0.0 <= self.transaction_fraction <= 1.0:
            raise ConfigError("transaction_fraction must be in [0, 1]")
        if self.max_application_delay < 0:
            raise ConfigError("max_application_delay must be >= 0")
        if not -(2**63) <= self.rng_seed < 2**64:
            raise ConfigError("rng_seed must fit in 64 bits")
        if set(self.group_params) != {Group.A, Group.B}:
            raise ConfigError("group_params needs exactly groups A and B")
        for g, params in self.group_params.items():
            params.validate(g.value)

    @property
    def wealth_bounds(self) -> tuple[float, float]:
        lows = [p.wealth_range[0] for p in self.group_params.values()]
        highs = [p.wealth_range[1] for p in self.group_params.values()]
        return min(lows), max(highs)

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


_SCALAR_FIELDS = [
    "lbl_beta",
    "rep_alpha",
    "n_steps",
    "qualify_threshold",
    "label_flip_prob",
    "trust_join_threshold",
    "trust_adapt_rate",
    "transaction_prob",
    "transaction_fraction",
    "spawn_prob",
    "max_application_delay",
    "rng_seed",
]
_INT_FIELDS = {"n_steps", "max_application_delay", "rng_seed"}


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    out = {k: getattr(cfg, k) for k in _SCALAR_FIELDS}
    out["group_params"] = {
        g.value: {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(p).items()}
        for g, p in sorted(cfg.group_params.items(), key=lambda kv: kv[0].value)
    }
    return out


def scenario_from_dict(data: dict) -> ScenarioConfig:
    unknown = set(data) - set(_SCALAR_FIELDS) - {"group_params", "schema"}
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    kwargs = {}
    for k in _SCALAR_FIELDS:
        if k in data:
            kwargs[k] = int(data[k]) if k in _INT_FIELDS else float(data[k])
    if "group_params" in data:
        params = dict(DEFAULT_GROUP_PARAMS)
        for name, table in data["group_params"].items():
            try:
                g = Group(name)
            except ValueError:
                raise ConfigError(f"unknown group {name!r}") from None
            merged = asdict(params[g])
            merged.update(table)
            merged["wealth_range"] = tuple(float(x) for x in merged["wealth_range"])
            merged["education_probs"] = tuple(float(x) for x in merged["education_probs"])
            params[g] = GroupParams(**merged)
        kwargs["group_params"] = params
    return ScenarioConfig(**kwargs)


def dumps_scenario(cfg: ScenarioConfig) -> str:
    d = scenario_to_dict(cfg)
    lines = [f"schema = {_toml_value(SCENARIO_SCHEMA)}"]
    lines += [f"{k} = {_toml_value(d[k])}" for k in _SCALAR_FIELDS]
    for gname, table in d["group_params"].items():
        lines.append("")
        lines.append(f"[group_params.{gname}]")
        lines += [f"{k} = {_toml_value(v)}" for k, v in table.items()]
    return "\n".join(lines) + "\n"


def loads_scenario(text: str) -> ScenarioConfig:
    data = tomllib.loads(text)
    _check_schema(data, SCENARIO_SCHEMA)
    return scenario_from_dict(data)


def _check_schema(data: dict, expected: str) -> None:
    schema = data.get("schema", expected)
    if schema != expected:
        raise ConfigError(f"unsupported schema {schema!r} (expected {expected!r})")


def save_scenario(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(dumps_scenario(cfg), encoding="utf-8")


def load_scenario(path) -> ScenarioConfig:
    return loads_scenario(Path(path).read_text(encoding="utf-8"))


def load_toml(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)
