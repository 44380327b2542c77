"""Empirical interval distributions and their survival function m(dt)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .corpus import Corpus
from .ingest import ReadingLog


class InsufficientIntervals(ValueError):
    pass


def collect_intervals(corpus: Corpus, readings: ReadingLog | None, mode: str) -> list[float]:
    """Positive gaps, in years, between a cited paper's time and the citing paper's year.

    ``reading`` uses the cited paper's median reading time; ``publishing``
    uses its publish year. When readings are supplied in publishing mode,
    only cited papers that were also read are used.
    """
    if mode not in ("reading", "publishing"):
        raise ValueError(f"mode must be 'reading' or 'publishing', got {mode!r}")
    if mode == "reading" and readings is None:
        raise ValueError("reading intervals need a reading log")
    out = []
    for k in corpus:
        for x in sorted(set(k.references)):
            if mode == "reading":
                if x not in readings:
                    continue
                tau = k.publish_year - readings.reading_time_years(x)
            else:
                if x not in corpus or (readings is not None and x not in readings):
                    continue
                tau = float(k.publish_year - corpus[x].publish_year)
            if tau > 0:
                out.append(tau)
    if not out:
        raise InsufficientIntervals("insufficient interval data")
    return out


@dataclass(frozen=True)
class TemporalDecayModel:
    bin_width: float
    survival: tuple       # m at bin starts 0, w, 2w, ...; last entry is 0
    n_samples: int
    mode: str = "reading"

    def bin_starts(self) -> list[float]:
        return [n * self.bin_width for n in range(len(self.survival))]

    def save(self, fh: IO[str]):
        fh.write(f"# mode={self.mode} n={self.n_samples}\n")
        fh.write("bin_start_years\tm\n")
        for start, m in zip(self.bin_starts(), self.survival):
            fh.write(f"{start!r}\t{m!r}\n")

    @classmethod
    def load(cls, fh: IO[str]) -> "TemporalDecayModel":
        meta, starts, values = {}, [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    meta[key] = val
                continue
            if line.startswith("bin_start"):
                continue
            a, b = line.split("\t")
            starts.append(float(a))
            values.append(float(b))
        if not starts:
            raise ValueError("empty decay model file")
        width = starts[1] - starts[0] if len(starts) > 1 else 1.0
        return cls(width, tuple(values), int(meta.get("n", 0)), meta.get("mode", "reading"))


def fit_decay(intervals, bin: float = 1.0, mode: str = "reading") -> TemporalDecayModel:
    """Empirical complementary CDF sampled at multiples of ``bin``.

    ``m(b) = #(intervals >= b) / n``, listed up to and including the first
    bin where it reaches zero.
    """
    x = np.sort(np.asarray(list(intervals), dtype=float))
    if not len(x):
        raise InsufficientIntervals("no intervals to fit")
    if bin <= 0:
        raise ValueError("bin width must be positive")
    if (x <= 0).any() or not np.isfinite(x).all():
        raise ValueError("intervals must be positive and finite")
    n = len(x)
    n_bins = int(math.floor(x[-1] / bin)) + 2
    starts = np.arange(n_bins) * bin
    at_least = n - np.searchsorted(x, starts, side="left")
    survival = at_least / n
    return TemporalDecayModel(float(bin), tuple(float(v) for v in survival), n, mode)


def influence_probability(model: TemporalDecayModel, delta_t: float) -> float:
    if delta_t < 0 or not math.isfinite(delta_t):
        return 0.0
    b = int(math.floor(delta_t / model.bin_width))
    if b >= len(model.survival):
        return 0.0
    return model.survival[b]


def acceptance_probability(model: TemporalDecayModel | None, delta_t: float) -> float:
    """Probability used in the Bernoulli trials: zero for non-positive gaps."""
    if model is None:
        return 1.0
    if delta_t <= 0:
        return 0.0
    return influence_probability(model, delta_t)
