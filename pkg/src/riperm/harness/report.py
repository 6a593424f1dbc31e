"""Suite reports: ordered case records, JSON + CSV writers, deterministic serialisation."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy


@dataclass
class CaseRecord:
    case: str
    digest: str
    lhs: float
    rhs: float
    constant: float | None
    passed: bool
    criterion: str
    asserted: bool = True
    extra: dict = field(default_factory=dict)


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def versions() -> dict:
    from .. import __version__

    return {"riperm": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


@dataclass
class SuiteReport:
    suite: str
    config: dict
    cases: list
    summary: dict
    versions: dict = field(default_factory=versions)
    generated_at: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases if c.asserted)

    @property
    def failures(self) -> list:
        return [c for c in self.cases if c.asserted and not c.passed]

    def to_json(self, timestamp: bool = True) -> dict:
        d = {"suite": self.suite, "passed": self.passed, "config": self.config,
             "summary": self.summary, "versions": self.versions,
             "cases": [c.__dict__ for c in self.cases]}
        if timestamp:
            d["generated_at"] = self.generated_at
        return _clean(d)

    def canonical(self) -> str:
        """Serialisation without the timestamp; equal across reruns of the same config."""
        return json.dumps(self.to_json(timestamp=False), sort_keys=True)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["case", "digest", "criterion", "lhs", "rhs", "constant", "asserted", "passed"])
        for c in self.cases:
            w.writerow([c.case, c.digest, c.criterion, repr(_clean(c.lhs)), repr(_clean(c.rhs)),
                        "" if c.constant is None else repr(_clean(c.constant)), c.asserted, c.passed])
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        jp, cp = out / f"{self.suite}.json", out / f"{self.suite}.csv"
        jp.write_text(json.dumps(self.to_json(), sort_keys=True, indent=1))
        cp.write_text(self.csv_text())
        return jp, cp
