"""Check reports shared by the verification routines."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any


@dataclass
class CheckReport:
    """Outcome of one inequality check, ``lhs <= rhs + tolerance``.

    ``margin`` is ``rhs - lhs`` (worst case over the tested points).
    """

    check: str
    inputs: dict
    lhs: float
    rhs: float
    tolerance: float
    extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return bool(self.lhs <= self.rhs + self.tolerance)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict[str, Any]:
        out = {
            "check": self.check,
            "inputs": _jsonable(self.inputs),
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "margin": _num(self.margin),
            "tolerance": _num(self.tolerance),
            "pass": self.passed,
        }
        if self.extra:
            out["extra"] = _jsonable(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.check}: lhs={self.lhs:.12g} rhs={self.rhs:.12g} tol={self.tolerance:.3g}"


def _num(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj
