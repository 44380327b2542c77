"""Hierarchical topic similarity and paper-pair disconnect."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .corpus import N_LEVELS, TopicHierarchy


class UndefinedDisconnect(ValueError):
    """Disconnect needs a nonempty topic set on both sides."""


@dataclass(frozen=True)
class LevelSimilarityTrace:
    level_similarity: tuple   # s^l for l = 0..3 (0.0 where the level is unreachable)
    budget: tuple
    contribution: tuple

    @property
    def total(self) -> float:
        return min(1.0, sum(self.contribution))


def level_similarity(hierarchy: TopicHierarchy, u: str, v: str, l: int) -> float:
    """Sum over shared ancestors ``l`` levels up of the smaller propagated weight."""
    if hierarchy.level(u) != hierarchy.level(v):
        raise ValueError(f"topics {u!r} and {v!r} lie at different levels")
    au = hierarchy.ancestors(u, l)
    av = hierarchy.ancestors(v, l)
    shared = sorted(au.keys() & av.keys())
    return math.fsum(min(au[x], av[x]) for x in shared)


def similarity_trace(hierarchy: TopicHierarchy, u: str, v: str, sigma: float) -> LevelSimilarityTrace:
    levels, budgets, contribs = [], [], []
    used = 0.0
    for l in range(N_LEVELS):
        s = level_similarity(hierarchy, u, v, l)
        budget = max(1.0 - used, 0.0)
        levels.append(s)
        budgets.append(budget)
        contribs.append(budget * s * sigma**l)
        used += s
    return LevelSimilarityTrace(tuple(levels), tuple(budgets), tuple(contribs))


def topic_pair_similarity(hierarchy: TopicHierarchy, u: str, v: str, sigma: float = 0.8) -> float:
    """Similarity of two topics in [0, 1].

    Same-level topics use the budgeted, level-discounted sum of level
    similarities. For topics at different levels the more specific one is
    replaced by its propagated ancestors at the other's level and the
    similarities are averaged with those weights.
    """
    if not (0.0 < sigma <= 1.0):
        raise ValueError(f"sigma must lie in (0, 1], got {sigma}")
    a, b = (u, v) if u <= v else (v, u)
    key = (a, b, sigma)
    cached = hierarchy._similarity.get(key)
    if cached is not None:
        return cached
    la, lb = hierarchy.level(a), hierarchy.level(b)
    if la == lb:
        value = similarity_trace(hierarchy, a, b, sigma).total
    else:
        low, high = (a, b) if la < lb else (b, a)
        lifted = hierarchy.ancestors(low, hierarchy.level(high) - hierarchy.level(low))
        value = min(1.0, math.fsum(w * topic_pair_similarity(hierarchy, x, high, sigma)
                                   for x, w in sorted(lifted.items())))
    # insert-once: concurrent writers compute the same value
    hierarchy._similarity.setdefault(key, value)
    return value


def disconnect(hierarchy: TopicHierarchy, topics_i: Iterable[str], topics_j: Iterable[str], sigma: float = 0.8) -> float:
    """One minus the mean similarity over all cross topic pairs."""
    ti, tj = sorted(set(topics_i)), sorted(set(topics_j))
    if not ti or not tj:
        raise UndefinedDisconnect("disconnect is undefined for an empty topic set")
    sims = sorted((min(u, v), max(u, v), topic_pair_similarity(hierarchy, u, v, sigma)) for u in ti for v in tj)
    total = math.fsum(s for _, _, s in sims)
    return max(0.0, 1.0 - total / (len(ti) * len(tj)))
