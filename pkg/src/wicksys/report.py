"""Stability verdicts with their bounds, witnesses and parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

CERTIFIED = "certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"
VERDICTS = (CERTIFIED, REFUTED, INCONCLUSIVE)


@dataclass
class StabilityReport:
    """Outcome of one certifier.

    Truncated computations only ever produce ``lower_bound`` values; Våge-type
    sums produce ``upper_bound`` values. ``witness`` is a JSON-ready input that
    attains (or approaches) the lower bound.
    """

    criterion: str
    verdict: str
    lower_bound: float | None = None
    upper_bound: float | None = None
    witness: Any = None
    parameters: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    vacuous: bool = False

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        lo, hi = self.lower_bound, self.upper_bound
        if lo is not None and hi is not None and lo > hi * (1 + 1e-12) + 1e-15:
            raise ValueError(f"lower bound {lo} exceeds upper bound {hi} for {self.criterion}")

    def to_json(self) -> dict:
        return {
            "criterion": self.criterion,
            "verdict": self.verdict,
            "lower_bound": _num(self.lower_bound),
            "upper_bound": _num(self.upper_bound),
            "vacuous": self.vacuous,
            "parameters": self.parameters,
            "details": {k: _num(v) if isinstance(v, float) else v for k, v in self.details.items()},
            "witness": self.witness,
        }


def _num(x):
    # JSON has no infinities; keep them explicit as strings
    if x is None or not isinstance(x, float) or math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
