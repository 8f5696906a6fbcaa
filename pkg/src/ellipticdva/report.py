"""Check records and the JSON verification report."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

SCHEMA = 1


def _version():
    from . import __version__
    return __version__


def _clean(v):
    # JSON has no inf/nan; keep them readable and round-trippable
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _unclean(v):
    if v in ("inf", "-inf", "nan"):
        return float(v)
    return v


@dataclass(frozen=True)
class CheckRecord:
    name: str
    anchor: str
    residual: float
    threshold: float
    passed: bool
    samples: int = 1
    note: str = ""
    bound: str = "below"

    @classmethod
    def from_residual(cls, name, anchor, residual, threshold, samples=1, note="", bound="below"):
        """``bound="above"`` marks negative controls, which pass when the residual is large."""
        residual = float(residual)
        if bound == "below":
            ok = math.isfinite(residual) and residual < threshold
        elif bound == "above":
            ok = residual > threshold
        else:
            raise ValueError(f"bound must be 'below' or 'above', got {bound!r}")
        return cls(name, anchor, residual, float(threshold), bool(ok), int(samples), note, bound)

    @classmethod
    def failure(cls, name, anchor, threshold, exc: Exception, samples=0):
        """A numerical abort recorded as a failed check."""
        return cls(name, anchor, math.inf, float(threshold), False, samples,
                   f"{type(exc).__name__}: {exc}")

    def to_dict(self):
        return {k: _clean(v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["residual"] = float(_unclean(d["residual"]))
        d["threshold"] = float(_unclean(d["threshold"]))
        return cls(**d)


@dataclass
class VerificationReport:
    command: str
    config: dict
    records: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    version: str = field(default_factory=_version)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def sorted_records(self):
        return sorted(self.records, key=lambda r: r.name)

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "tool": "ellipticdva",
            "version": self.version,
            "command": self.command,
            "config": self.config,
            "records": [r.to_dict() for r in self.sorted_records()],
            "extra": self.extra,
            "verdict": "PASS" if self.passed else "FAIL",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return cls(d["command"], d["config"], [CheckRecord.from_dict(r) for r in d["records"]],
                   d.get("extra", {}), d["version"])
