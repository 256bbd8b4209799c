"""Fixed-threshold test reports and their JSON serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import __version__


@dataclass
class TestReport:
    """Outcome of one fixed-threshold check.

    ``passed`` is derived, never set by hand: it holds exactly when
    ``|estimate - target| <= tolerance``.
    """

    __test__ = False  # keep pytest from collecting this class

    name: str
    estimate: float
    target: float
    tolerance: float
    count: int | None = None
    seed: int | None = None
    note: str = ""
    passed: bool = field(init=False)

    def __post_init__(self):
        self.estimate = float(self.estimate)
        self.target = float(self.target)
        self.tolerance = float(self.tolerance)
        gap = abs(self.estimate - self.target)
        self.passed = bool(gap <= self.tolerance) if not math.isnan(gap) else False

    def to_dict(self):
        return {
            "name": self.name,
            "estimate": _num(self.estimate),
            "target": _num(self.target),
            "tolerance": _num(self.tolerance),
            "pass": self.passed,
        }


@dataclass
class SuiteReport:
    suite: str
    config: dict
    tests: list[TestReport]

    @property
    def passed(self):
        return all(t.passed for t in self.tests)

    def to_dict(self):
        config = dict(self.config)
        config.setdefault("version", __version__)
        return {
            "suite": self.suite,
            "config": {k: _num(v) for k, v in config.items()},
            "tests": [t.to_dict() for t in self.tests],
            "pass": self.passed,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), ensure_ascii=False, allow_nan=False) + "\n"


def _num(value):
    # JSON has no infinities; encode them as strings
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, (list, tuple)):
        return [_num(v) for v in value]
    return value
