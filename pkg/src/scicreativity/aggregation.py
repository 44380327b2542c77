"""Non-decreasing aggregation of pair scores into a paper-level value."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KINDS = ("average", "median", "percentile", "maximum")


class EmptyAggregation(ValueError):
    """No reference pairs to aggregate."""


@dataclass(frozen=True)
class Aggregator:
    kind: str = "average"
    q: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown aggregator {self.kind!r}; expected one of {KINDS}")
        if self.kind == "percentile":
            if self.q is None or not (0.0 <= self.q <= 100.0):
                raise ValueError(f"percentile needs q in [0, 100], got {self.q}")
        elif self.q is not None:
            raise ValueError(f"{self.kind} takes no q")

    @classmethod
    def parse(cls, text: str) -> "Aggregator":
        """Parse the CLI spelling: ``avg``, ``median``, ``max`` or ``p:<q>``."""
        text = text.strip().lower()
        aliases = {"avg": "average", "mean": "average", "average": "average",
                   "median": "median", "max": "maximum", "maximum": "maximum"}
        if text in aliases:
            return cls(aliases[text])
        if text.startswith("p:"):
            return cls("percentile", float(text[2:]))
        raise ValueError(f"cannot parse aggregator {text!r}")

    def __str__(self):
        if self.kind == "percentile":
            return f"p:{self.q:g}"
        return {"average": "avg", "median": "median", "maximum": "max"}[self.kind]

    def rank(self, n: int) -> int:
        """Zero-based order-statistic index used by the rank-based kinds."""
        if self.kind == "median":
            return (n - 1) // 2
        if self.kind == "maximum":
            return n - 1
        if self.kind == "percentile":
            return max(1, math.ceil(self.q / 100.0 * n)) - 1
        raise ValueError("average has no rank")

    def __call__(self, scores) -> float:
        return aggregate(scores, self)

    def columns(self, matrix: np.ndarray) -> np.ndarray:
        """Aggregate each column of a (n_scores, m) array.

        Average sums rows in a fixed order so a column's value does not
        depend on which other columns are present.
        """
        matrix = np.asarray(matrix, dtype=float)
        n = matrix.shape[0]
        if n == 0:
            raise EmptyAggregation("no reference pairs")
        if self.kind == "average":
            acc = matrix[0].copy()
            for row in matrix[1:]:
                acc += row
            return acc / n
        r = self.rank(n)
        if self.kind == "maximum":
            return matrix.max(axis=0)
        return np.partition(matrix, r, axis=0)[r]


def aggregate(scores, agg: Aggregator) -> float:
    """Aggregate a multiset of scores.

    Average uses exactly-rounded summation; median is the lower median;
    percentile is nearest-rank (the ceil(q/100 * n)-th order statistic,
    at least the first).
    """
    values = [float(s) for s in scores]
    if not values:
        raise EmptyAggregation("no reference pairs")
    if agg.kind == "average":
        return math.fsum(values) / len(values)
    if agg.kind == "maximum":
        return max(values)
    values.sort()
    return values[agg.rank(len(values))]
