"""Columnar data behind the distribution plots (no rendering)."""

from __future__ import annotations

import csv
import math
from typing import IO, Iterable, Sequence

import numpy as np

PLOT_KINDS = ("rarity_cdf", "score_histogram", "creativity_cdf", "interval_histogram", "dependency_matrix")


def empirical_cdf(values) -> list[tuple[float, float]]:
    """(value, fraction of values <= value) at every distinct value."""
    x = np.sort(np.asarray(list(values), dtype=float))
    if not len(x):
        return []
    uniq, counts = np.unique(x, return_counts=True)
    return [(float(v), float(c) / len(x)) for v, c in zip(uniq, np.cumsum(counts))]


def histogram(values, bin_width: float | None = None, bins: int | None = None,
              lo: float = 0.0, hi: float | None = None) -> list[tuple[float, float, int]]:
    """Counts over equal-width bins ``[lo, hi]``; the last bin is closed.

    Give either ``bins`` or ``bin_width``. ``hi`` defaults to 1 when
    ``bins`` is given, otherwise to the first bin edge past the maximum.
    """
    x = np.asarray(list(values), dtype=float)
    if bins is not None:
        hi = 1.0 if hi is None else hi
        edges = np.linspace(lo, hi, bins + 1)
    else:
        if not bin_width or bin_width <= 0:
            raise ValueError("need bins or a positive bin width")
        if hi is None:
            top = float(x.max()) if len(x) else lo + bin_width
            n = max(1, int(math.floor((top - lo) / bin_width)) + 1)
        else:
            n = max(1, int(math.ceil((hi - lo) / bin_width - 1e-9)))
        edges = lo + bin_width * np.arange(n + 1)
    counts, edges = np.histogram(x, bins=edges)
    return [(float(a), float(b), int(c)) for a, b, c in zip(edges[:-1], edges[1:], counts)]


def write_csv(fh: IO[str], header: Sequence[str], rows: Iterable[Sequence]):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v
