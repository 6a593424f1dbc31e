"""Suite configuration: one dataclass per suite run, plus the run-level file format."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..errors import ValidationError

SUITES = ("mean_max", "moment_bounds", "operator_bounds", "diagonal_reduction",
          "lorentz_criterion", "sequence_spaces")

SPACE_GRID = ("lp:1", "lp:2", "lorentz:1:phi_p_hat:0.5", "lorentz:2:phi_p:1",
              "marcinkiewicz:phi_p:1", "explp:1")


def _q(v) -> float:
    if isinstance(v, str):
        if v in ("inf", "infinity"):
            return math.inf
        return float(v)
    return float(v)


def _q_out(v: float):
    return "inf" if math.isinf(v) else v


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    n_range: tuple = (2, 6)
    trials: int = 20
    seed: int = 20240601
    spaces: tuple = ()
    q_list: tuple = ()
    q_pairs: tuple = ()
    seq_spaces: tuple = ()
    tolerance: float = 1e-9
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValidationError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        lo, hi = self.n_range
        if not 1 <= lo <= hi:
            raise ValidationError("n_range must satisfy 1 <= lo <= hi")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        pairs = tuple((_q(p), _q(q)) for p, q in self.q_pairs)
        for p, q in pairs:
            if p > q:
                raise ValidationError(f"q_pairs entry ({p}, {q}) has p > q")
        object.__setattr__(self, "n_range", (int(lo), int(hi)))
        object.__setattr__(self, "q_list", tuple(_q(v) for v in self.q_list))
        object.__setattr__(self, "q_pairs", pairs)
        object.__setattr__(self, "spaces", tuple(self.spaces))
        object.__setattr__(self, "seq_spaces", tuple(self.seq_spaces))

    @property
    def ns(self) -> range:
        return range(self.n_range[0], self.n_range[1] + 1)

    def to_json(self) -> dict:
        d = asdict(self)
        d["n_range"] = list(self.n_range)
        d["q_list"] = [_q_out(v) for v in self.q_list]
        d["q_pairs"] = [[_q_out(p), _q_out(q)] for p, q in self.q_pairs]
        d["spaces"] = list(self.spaces)
        d["seq_spaces"] = list(self.seq_spaces)
        return d


DEFAULTS = {
    "mean_max": dict(n_range=(2, 7), trials=200, tolerance=1e-12),
    "moment_bounds": dict(n_range=(2, 6), trials=60, q_pairs=((1, 1), (1, 2), (2, 4), (2, 2))),
    "operator_bounds": dict(n_range=(2, 6), trials=18, spaces=SPACE_GRID, q_list=(1, 2)),
    "diagonal_reduction": dict(n_range=(2, 6), trials=18, spaces=SPACE_GRID, q_list=(1, 2)),
    "lorentz_criterion": dict(n_range=(2, 8), trials=10, q_list=(1,)),
    "sequence_spaces": dict(n_range=(1, 7), trials=20, seq_spaces=("linf", "l1", "l2", "head2")),
}


def default_config(suite: str, seed: int | None = None, **overrides) -> SuiteConfig:
    kw = dict(DEFAULTS[suite])
    if seed is not None:
        kw["seed"] = seed
    kw.update(overrides)
    return SuiteConfig(suite=suite, **kw)


@dataclass(frozen=True)
class RunConfig:
    """Top-level config file: global seed/workers plus per-suite overrides."""

    seed: int = 20240601
    workers: int = 1
    output: str = "reports"
    suites: dict = field(default_factory=dict)

    def suite_configs(self, only: str | None = None) -> list[SuiteConfig]:
        names = SUITES if only in (None, "all") else (only,)
        out = []
        for name in names:
            if name not in SUITES:
                raise ValidationError(f"unknown suite {name!r}")
            over = dict(self.suites.get(name, {}))
            over.setdefault("workers", self.workers)
            out.append(default_config(name, seed=over.pop("seed", self.seed), **over))
        return out

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=seed)


def _tuples(d: dict) -> dict:
    out = dict(d)
    for key in ("n_range", "spaces", "q_list", "seq_spaces"):
        if key in out:
            out[key] = tuple(out[key])
    if "q_pairs" in out:
        out["q_pairs"] = tuple(tuple(p) for p in out["q_pairs"])
    return out


_SUITE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "n_range": {"type": "array", "items": {"type": "integer", "minimum": 1},
                    "minItems": 2, "maxItems": 2},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 18446744073709551615},
        "spaces": {"type": "array", "items": {"type": "string"}},
        "q_list": {"type": "array", "items": {"type": ["number", "string"]}},
        "q_pairs": {"type": "array", "items": {"type": "array", "items": {"type": ["number", "string"]},
                                               "minItems": 2, "maxItems": 2}},
        "seq_spaces": {"type": "array", "items": {"type": "string"}},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "output": {"type": ["string", "null"]},
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "riperm verification run",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer", "minimum": 0, "maximum": 18446744073709551615},
        "workers": {"type": "integer", "minimum": 1},
        "output": {"type": "string"},
        "suites": {"type": "object", "additionalProperties": False,
                   "properties": {name: _SUITE_SCHEMA for name in SUITES}},
    },
}


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    with open(path) as fh:
        raw = json.load(fh)
    validate_raw(raw)
    suites = {k: _tuples(v) for k, v in raw.get("suites", {}).items()}
    return RunConfig(seed=raw.get("seed", RunConfig.seed), workers=raw.get("workers", 1),
                     output=raw.get("output", "reports"), suites=suites)


def validate_raw(raw: dict) -> None:
    import jsonschema

    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"config: {exc.message}") from None


def default_run_json() -> dict:
    """The default run configuration in file form."""
    suites = {}
    for name in SUITES:
        cfg = default_config(name).to_json()
        suites[name] = {k: cfg[k] for k in ("n_range", "trials", "spaces", "q_list", "q_pairs",
                                            "seq_spaces", "tolerance") if cfg[k] not in ((), [])}
    return {"seed": RunConfig.seed, "workers": 1, "output": "reports", "suites": suites}
