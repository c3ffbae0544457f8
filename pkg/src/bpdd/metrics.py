"""Misdetection, false-alarm, precision and accuracy percentages."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .exceptions import EmptyEvaluationError, ParameterError

__all__ = ["ConfusionTotals", "Scores", "score", "format_table", "table_csv"]


@dataclass(frozen=True)
class ConfusionTotals:
    n_all: int
    n_ta: int = 0
    n_fn: int = 0
    n_fa: int = 0

    def __post_init__(self):
        if min(self.n_all, self.n_ta, self.n_fn, self.n_fa) < 0:
            raise ParameterError("confusion counts must be non-negative")
        if self.n_ta + self.n_fn > self.n_all or self.n_fa > self.n_all:
            raise ParameterError(f"inconsistent confusion counts {self}")

    def __add__(self, other: ConfusionTotals) -> ConfusionTotals:
        return ConfusionTotals(
            self.n_all + other.n_all,
            self.n_ta + other.n_ta,
            self.n_fn + other.n_fn,
            self.n_fa + other.n_fa,
        )

    @classmethod
    def from_outcomes(cls, outcomes) -> ConfusionTotals:
        """Tally window outcomes (``"ta"``, ``"fn"``, ``"fa"``, ``"tn"``)."""
        outcomes = list(outcomes)
        return cls(
            len(outcomes),
            outcomes.count("ta"),
            outcomes.count("fn"),
            outcomes.count("fa"),
        )


@dataclass(frozen=True)
class Scores:
    """Percentages at full precision; ``pre`` is None when undefined."""

    mis: float
    fal: float
    pre: float | None
    acc: float

    def formatted(self) -> dict[str, str]:
        return {
            k: "n/a" if v is None else f"{v:.2f}"
            for k, v in (("mis", self.mis), ("fal", self.fal), ("pre", self.pre), ("acc", self.acc))
        }


def score(totals: ConfusionTotals) -> Scores:
    t = totals
    if t.n_all == 0:
        raise EmptyEvaluationError("no instances to score")
    mis = t.n_fn / t.n_all * 100.0
    fal = t.n_fa / t.n_all * 100.0
    pre = t.n_ta / (t.n_ta + t.n_fa) * 100.0 if t.n_ta + t.n_fa else None
    # (n_all - n_fn - n_fa) / n_all, written so the identity is exact in floats
    acc = 100.0 - mis - fal
    return Scores(mis, fal, pre, acc)


def _rows(results):
    for name, s in results.items():
        f = s.formatted()
        yield [name, f["mis"], f["fal"], f["pre"], f["acc"]]


HEADER = ["method", "mis/%", "fal/%", "pre/%", "acc/%"]


def format_table(results: dict[str, Scores]) -> str:
    """Aligned plain-text table, one row per named result."""
    rows = [HEADER, *_rows(results)]
    widths = [max(len(r[i]) for r in rows) for i in range(len(HEADER))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))) for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def table_csv(results: dict[str, Scores]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    w.writerows(_rows(results))
    return buf.getvalue()
