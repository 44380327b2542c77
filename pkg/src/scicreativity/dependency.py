"""Production-consumption dependency and correlation with citation counts.

The paper-level measure is the overlap coefficient |C & Q| / min(|C|, |Q|)
(sometimes loosely called Jaccard's coefficient, which it is not).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .corpus import Corpus, PaperRecord, TopicHierarchy
from .similarity import disconnect


def paper_level_dependency(cited: Iterable[str], read: Iterable[str]) -> float:
    c, q = set(cited), set(read)
    if not c or not q:
        raise ValueError("dependency needs two nonempty sets")
    return len(c & q) / min(len(c), len(q))


def topic_level_dependency(published: Iterable[PaperRecord], read: Iterable[PaperRecord],
                           hierarchy: TopicHierarchy, sigma: float = 0.8, scorer=None) -> float:
    """Mean connectedness (1 - disconnect) over all cross pairs.

    Papers without topics are dropped before averaging. When a
    :class:`~scicreativity.metrics.PairScorer` is given the double sum is
    done in bulk; otherwise pair by pair.
    """
    p = sorted((x for x in published if x.topics), key=lambda x: x.id)
    q = sorted((x for x in read if x.topics), key=lambda x: x.id)
    if not p or not q:
        raise ValueError("no topic-resolvable pairs")
    if scorer is not None:
        d = scorer.disconnect_matrix([x.id for x in p], [x.id for x in q])
        return float(1.0 - math.fsum(d.ravel().tolist()) / d.size)
    total = math.fsum(disconnect(hierarchy, a.topics, b.topics, sigma) for a in p for b in q)
    return 1.0 - total / (len(p) * len(q))


def cited_by_year(corpus: Corpus, year: int) -> set[str]:
    return {r for p in corpus.published_in(year) for r in p.references}


def citation_counts(corpus: Corpus) -> dict[str, int]:
    """In-corpus citation in-degree for every corpus paper."""
    counts = Counter()
    for p in corpus:
        for r in set(p.references):
            if r in corpus and r != p.id:
                counts[r] += 1
    return {pid: counts.get(pid, 0) for pid in corpus.ids()}


def pearson(x, y) -> float | None:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("length mismatch")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    return float(np.clip((dx @ dy) / math.sqrt(sxx * syy), -1.0, 1.0))


@dataclass(frozen=True)
class ImpactCorrelation:
    preparation: float | None   # None when undefined (zero variance)
    inspiration: float | None
    n: int


def impact_correlation(results, counts: dict) -> ImpactCorrelation:
    rows = [(r.psi, r.chi, counts[r.paper_id]) for r in results
            if not r.flag and r.paper_id in counts]
    if len(rows) < 3:
        raise ValueError("correlation needs at least three papers")
    psi, chi, c = zip(*rows)
    return ImpactCorrelation(pearson(psi, c), pearson(chi, c), len(rows))
