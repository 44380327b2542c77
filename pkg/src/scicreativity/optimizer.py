"""Budgeted selection of enabler papers by greedy submodular maximisation."""

from __future__ import annotations

import heapq
import logging
import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .aggregation import Aggregator
from .decomposition import reference_impacts
from .metrics import PairScorer
from .temporal import TemporalDecayModel, acceptance_probability

log = logging.getLogger(__name__)

CHUNK = 8192
LAZY_THRESHOLD = 10_000


@dataclass(frozen=True)
class TargetSet:
    targets: tuple  # ((paper_id, weight), ...)

    def __post_init__(self):
        if not self.targets:
            raise ValueError("target set is empty")
        ids = [k for k, _ in self.targets]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate target ids")
        if any(w < 0 for _, w in self.targets):
            raise ValueError("target weights must be non-negative")
        total = math.fsum(w for _, w in self.targets)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"target weights sum to {total!r}, not 1")

    @classmethod
    def uniform(cls, ids: Iterable[str]) -> "TargetSet":
        ids = sorted(set(ids))
        return cls(tuple((k, 1.0 / len(ids)) for k in ids))

    @classmethod
    def weighted(cls, weights: dict) -> "TargetSet":
        total = math.fsum(weights.values())
        return cls(tuple((k, w / total) for k, w in sorted(weights.items())))


@dataclass
class TargetPairs:
    """Precomputed reference-pair scores and candidate impacts for one target."""
    paper_id: str
    weight: float
    phi: np.ndarray            # (n_pairs,)
    delta: np.ndarray          # (n_pairs, n_candidates)
    year: float = 0.0
    pairs: list = field(default_factory=list)
    flag: str = ""


class RewardInstance:
    """Explained-creativity reward over a fixed candidate pool.

    ``R(A) = sum_k w_k [agg(phi_k) - agg(phi_k - impact_k(A))]`` where a
    pair's impact under ``A`` is the largest single-candidate impact.
    Candidates are kept sorted by id so that position order is id order.
    """

    def __init__(self, candidates: Sequence[str], targets: list, aggregator: Aggregator | None = None,
                 candidate_years: Sequence[float] | None = None):
        order = sorted(range(len(candidates)), key=lambda n: candidates[n])
        self.candidates = [candidates[n] for n in order]
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError("duplicate candidate ids")
        self.position = {x: n for n, x in enumerate(self.candidates)}
        self.aggregator = aggregator or Aggregator()
        self.targets = []
        for tp in targets:
            delta = np.asarray(tp.delta, dtype=float).reshape(len(tp.phi), len(candidates))[:, order]
            self.targets.append(TargetPairs(tp.paper_id, tp.weight, np.asarray(tp.phi, dtype=float),
                                            np.ascontiguousarray(delta), tp.year, tp.pairs,
                                            tp.flag or ("" if len(tp.phi) else "insufficient references")))
        self.candidate_years = None if candidate_years is None else np.asarray(candidate_years, float)[order]

    @property
    def n_candidates(self) -> int:
        return len(self.candidates)

    def mean_target_year(self) -> float:
        return math.fsum(t.weight * t.year for t in self.targets)

    def _positions(self, A) -> list[int]:
        return sorted({self.position[x] if isinstance(x, str) else int(x) for x in A})

    # -- evaluation ----------------------------------------------------------
    def empty_state(self) -> list[np.ndarray]:
        return [np.zeros(len(t.phi)) for t in self.targets]

    def state_of(self, A) -> list[np.ndarray]:
        cols = self._positions(A)
        state = self.empty_state()
        for cur, t in zip(state, self.targets):
            if len(t.phi) and cols:
                np.maximum(cur, t.delta[:, cols].max(axis=1), out=cur)
        return state

    def _target_reward(self, t: TargetPairs, cur: np.ndarray) -> float:
        if not len(t.phi):
            return 0.0
        agg = self.aggregator
        base = agg.columns(t.phi[:, None])[0]
        return float(base - agg.columns((t.phi - cur)[:, None])[0])

    def reward_of_state(self, state) -> float:
        total = 0.0
        for t, cur in zip(self.targets, state):
            total += t.weight * self._target_reward(t, cur)
        return total

    def reward(self, A) -> float:
        return self.reward_of_state(self.state_of(A))

    def gains(self, state, cols) -> np.ndarray:
        """Marginal gains of the candidates at positions ``cols`` given ``state``.

        Uses the running per-pair maxima in ``state``; the selected set is
        never rescanned. For the average, the gain is the mean per-pair
        increase, which keeps computed gains exactly diminishing.
        """
        cols = np.asarray(cols, dtype=np.int64)
        out = np.zeros(len(cols))
        agg = self.aggregator
        for start in range(0, len(cols), CHUNK):
            part = cols[start:start + CHUNK]
            acc = np.zeros(len(part))
            for t, cur in zip(self.targets, state):
                n = len(t.phi)
                if not n or t.weight == 0:
                    continue
                new = np.maximum(cur[:, None], t.delta[:, part])
                if agg.kind == "average":
                    g = agg.columns(new - cur[:, None])
                else:
                    before = agg.columns((t.phi - cur)[:, None])[0]
                    g = before - agg.columns(t.phi[:, None] - new)
                acc += t.weight * g
            out[start:start + CHUNK] = acc
        return out

    def marginal_gain(self, A, x, state=None) -> float:
        if state is None:
            state = self.state_of(A)
        pos = self.position[x] if isinstance(x, str) else int(x)
        return float(self.gains(state, [pos])[0])

    def add(self, state, pos: int):
        for t, cur in zip(self.targets, state):
            if len(t.phi):
                np.maximum(cur, t.delta[:, pos], out=cur)


def build_reward_instance(scorer: PairScorer, target_set: TargetSet, candidates: Iterable[str],
                          aggregator: Aggregator | None = None) -> RewardInstance:
    corpus = scorer.corpus
    pool = sorted({x for x in candidates if corpus.resolvable(x)} - {k for k, _ in target_set.targets})
    targets = []
    for k, w in target_set.targets:
        pairs, phis, delta = reference_impacts(scorer, k, pool)
        flag = "" if pairs else "insufficient references"
        if flag:
            log.warning("target %s has fewer than two usable references; it contributes 0", k)
        targets.append(TargetPairs(k, w, phis, delta, float(corpus[k].publish_year), pairs, flag))
    years = [corpus[x].publish_year for x in pool]
    return RewardInstance(pool, targets, aggregator, years)


def reward(instance: RewardInstance, A) -> float:
    return instance.reward(A)


def marginal_gain(instance: RewardInstance, A, x, state=None) -> float:
    return instance.marginal_gain(A, x, state)


@dataclass
class SelectionResult:
    selected: list
    gains: list
    reward: float
    evaluations: int
    cumulative: list = field(default_factory=list)
    accepted_probability: list = field(default_factory=list)
    rejected: list = field(default_factory=list)


def greedy_select(instance: RewardInstance, rho: int, decay: TemporalDecayModel | None = None,
                  rng: np.random.Generator | None = None, lazy: bool = False) -> SelectionResult:
    """Greedy enabler selection with optional temporal acceptance trials.

    Each step takes the candidate with the largest marginal gain (ties by
    id). With a decay model the provisional pick is kept with probability
    m(gap) where the gap is measured from the weighted mean target year;
    rejected candidates are dropped for good. Stops when the budget is
    spent, the pool is exhausted, or the best gain is zero.

    ``lazy`` keeps stale gains as upper bounds in a priority queue. The
    bounds are valid only when the reward is submodular, which holds for
    the average aggregator.
    """
    if instance.n_candidates == 0:
        raise ValueError("empty candidate set")
    if rho < 1:
        raise ValueError("budget must be at least 1")
    if lazy and instance.aggregator.kind != "average":
        warnings.warn(f"lazy evaluation assumes a submodular reward; the {instance.aggregator.kind} "
                      "aggregator does not guarantee it", RuntimeWarning, stacklevel=2)
    if decay is not None:
        if rng is None:
            raise ValueError("temporal acceptance needs an rng")
        if instance.candidate_years is None:
            raise ValueError("temporal acceptance needs candidate years")
        ref_year = instance.mean_target_year()

    def trial(pos):
        if decay is None:
            return True, 1.0
        m = acceptance_probability(decay, ref_year - instance.candidate_years[pos])
        return bool(rng.random() < m), m

    state = instance.empty_state()
    alive = np.ones(instance.n_candidates, dtype=bool)
    result = SelectionResult([], [], 0.0, 0)
    evaluations = 0
    heap = []
    if lazy:
        all_pos = np.arange(instance.n_candidates)
        g0 = instance.gains(state, all_pos)
        evaluations += len(all_pos)
        heap = [(-float(g), int(p), 0) for p, g in zip(all_pos, g0)]
        heapq.heapify(heap)

    for step in range(rho):
        pick, gain, prob = None, 0.0, 1.0
        if lazy:
            while heap:
                neg, pos, stamp = heap[0]
                if stamp != step:
                    heapq.heapreplace(heap, (-float(instance.gains(state, [pos])[0]), pos, step))
                    evaluations += 1
                    continue
                heapq.heappop(heap)
                ok, prob = trial(pos)
                if ok:
                    pick, gain = pos, -neg
                    break
                alive[pos] = False
                result.rejected.append(instance.candidates[pos])
        else:
            cols = np.flatnonzero(alive)
            if not len(cols):
                break
            g = instance.gains(state, cols)
            evaluations += len(cols)
            for n in np.lexsort((cols, -g)):
                ok, prob = trial(cols[n])
                if ok:
                    pick, gain = int(cols[n]), float(g[n])
                    break
                alive[cols[n]] = False
                result.rejected.append(instance.candidates[cols[n]])
        if pick is None or gain == 0.0:
            break
        alive[pick] = False
        instance.add(state, pick)
        result.selected.append(instance.candidates[pick])
        result.gains.append(gain)
        result.accepted_probability.append(prob)
        result.cumulative.append(instance.reward_of_state(state))
    result.reward = instance.reward_of_state(state)
    result.evaluations = evaluations
    return result


def brute_force_select(instance: RewardInstance, rho: int, max_candidates: int = 20, max_rho: int = 5):
    """Exhaustive optimum over all subsets of size at most ``rho``.

    Among equal rewards the smallest set, then the first in id order, wins.
    """
    n = instance.n_candidates
    if n > max_candidates or rho > max_rho:
        raise ValueError(f"brute force limited to {max_candidates} candidates and budget {max_rho}")
    best, best_r = (), 0.0
    for size in range(1, min(rho, n) + 1):
        for combo in combinations(range(n), size):
            r = instance.reward(combo)
            if r > best_r:
                best, best_r = combo, r
    return [instance.candidates[p] for p in best], best_r


def precision(selected: Iterable[str], reading_set: Iterable[str]) -> float:
    selected = list(selected)
    if not selected:
        raise ValueError("precision of an empty selection is undefined")
    q = set(reading_set)
    return sum(1 for x in selected if x in q) / len(selected)
