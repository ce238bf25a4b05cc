"""Machine-readable check results.

Every entry carries ``name``, ``paper_ref`` (a stable label naming the identity that was checked),
``residual``, ``tolerance`` and ``pass``.  Dumps are sorted so that identical runs give identical bytes
apart from the ``timestamp`` field.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

SCHEMA = 1


def _plain(obj):
    """Convert numpy scalars, complex numbers, mpq and tuples into JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "tolist"):
        return _plain(obj.tolist())
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if hasattr(obj, "numerator") and hasattr(obj, "denominator"):
        return str(obj)
    try:
        return float(obj)
    except (TypeError, ValueError):
        return str(obj)


@dataclass
class CheckResult:
    name: str
    paper_ref: str
    residual: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "paper_ref": self.paper_ref,
            "residual": _plain(float(self.residual)),
            "tolerance": _plain(float(self.tolerance)),
            "pass": bool(self.passed),
            "details": _plain(self.details),
        }

    @classmethod
    def exact(cls, name: str, paper_ref: str, ok: bool, **details) -> "CheckResult":
        """A zero-tolerance identity: residual 0 when it holds, 1 when it does not."""
        return cls(name, paper_ref, 0.0 if ok else 1.0, 0.0, bool(ok), details)

    @classmethod
    def numeric(cls, name: str, paper_ref: str, residual: float, tolerance: float, **details) -> "CheckResult":
        return cls(name, paper_ref, float(residual), tolerance, bool(residual < tolerance), details)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}  residual={self.residual:.3g} tol={self.tolerance:.3g}"


@dataclass
class Report:
    checks: list[CheckResult] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def extend(self, results) -> None:
        self.checks.extend(results)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "timestamp": self.timestamp,
            "config": _plain(self.config),
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps() + "\n")
        return path


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True)
