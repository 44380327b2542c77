"""Reading impact, enablers, and the preparation / inspiration split."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable

import numpy as np

from .aggregation import EmptyAggregation, aggregate
from .corpus import AnalysisConfig, Corpus
from .metrics import PairScorer, ScoreColumns, resolvable_references
from .temporal import TemporalDecayModel, acceptance_probability

log = logging.getLogger(__name__)

# bulk scores may differ from the scalar route in the last few ulps; entries
# this close to a decision boundary are recomputed exactly
EXACT_TOL = 1e-12


def pair_impact(phi_ij: float, phi_ix: float, phi_xj: float) -> float:
    """Reduction in the difficulty of connecting (i, j) once x is known."""
    return phi_ij - min(phi_ij, max(phi_ix, phi_xj))


def path_impact(phi_ij: float, chain_scores) -> float:
    """Impact of a chain i -> x1 -> ... -> xn -> j; the hardest hop dominates."""
    chain = list(chain_scores)
    if not chain:
        raise ValueError("empty chain")
    return phi_ij - min(phi_ij, max(chain))


def best_enabler(pair, reading_set: Iterable[str], score_fn: Callable[[str, str], float]):
    """Reading paper with the largest positive impact on ``pair``; ties by id.

    Returns ``(None, 0.0)`` when no candidate has positive impact.
    """
    i, j = pair
    phi_ij = score_fn(i, j)
    best, best_delta = None, 0.0
    for x in sorted(set(reading_set)):
        if x in (i, j):
            continue
        delta = pair_impact(phi_ij, score_fn(i, x), score_fn(x, j))
        if delta > best_delta:
            best, best_delta = x, delta
    return best, best_delta


def ranked_candidates(deltas: np.ndarray) -> np.ndarray:
    """Positions with positive impact, by decreasing impact then position."""
    pos = np.flatnonzero(deltas > 0)
    return pos[np.argsort(-deltas[pos], kind="stable")]


def sample_enabler(pair, reading_set: Iterable[str], decay: TemporalDecayModel | None,
                   k_publish_year: float, rng: np.random.Generator,
                   score_fn: Callable[[str, str], float], time_of: Callable[[str], float]):
    """Walk candidates from most to least impactful, accepting each with m(tau).

    ``time_of(x)`` gives the candidate's time in (fractional) years;
    ``tau = k_publish_year - time_of(x)``. One uniform draw is consumed per
    candidate tried. Without a decay model the first candidate is taken.
    """
    i, j = pair
    phi_ij = score_fn(i, j)
    cands = sorted(x for x in set(reading_set) if x not in (i, j))
    deltas = np.array([pair_impact(phi_ij, score_fn(i, x), score_fn(x, j)) for x in cands], dtype=float)
    order = ranked_candidates(deltas)
    if decay is None:
        if len(order):
            return cands[order[0]], float(deltas[order[0]])
        return None, 0.0
    for pos in order:
        m = acceptance_probability(decay, k_publish_year - time_of(cands[pos]))
        if rng.random() < m:
            return cands[pos], float(deltas[pos])
    return None, 0.0


def pair_rng(seed: int, k: str, i: str, j: str) -> np.random.Generator:
    """Independent stream for one (paper, pair) so results do not depend on scheduling."""
    digest = hashlib.blake2b(f"{k}\x00{i}\x00{j}".encode(), digest_size=16).digest()
    words = [int.from_bytes(digest[n:n + 4], "little") for n in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([seed % 2**64] + words))


@dataclass(frozen=True)
class PairRecord:
    i: str
    j: str
    phi: float
    enabler: str | None
    delta: float


@dataclass
class DecompositionResult:
    paper_id: str
    phi: float
    psi: float
    chi: float
    pairs: list = field(default_factory=list)
    flag: str = ""

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    @property
    def n_pairs_with_enabler(self) -> int:
        return sum(1 for p in self.pairs if p.enabler is not None)


def split_creativity(phis, deltas, agg) -> tuple[float, float, float]:
    """(phi_k, psi_k, chi_k) from per-pair scores and impacts."""
    phi = aggregate(phis, agg)
    chi = aggregate([p - d for p, d in zip(phis, deltas)], agg)
    return phi, phi - chi, chi


def reference_impacts(scorer: PairScorer, k: str, candidates):
    """Reference pairs of ``k``, their scores, and the (pairs x candidates) impact matrix.

    Scores are taken at ``k``'s publish year. A candidate that is itself
    one of the pair's endpoints has zero impact on that pair. ``candidates``
    is a list of ids or a prepared :class:`~scicreativity.metrics.ScoreColumns`.
    """
    pairs, phis, delta, _ = _impacts(scorer, k, candidates)
    return pairs, phis, delta


def _impacts(scorer: PairScorer, k: str, candidates):
    # also returns a mask of entries equal to the scalar route bitwise (None: all of them)
    corpus = scorer.corpus
    t = corpus[k].publish_year
    refs = resolvable_references(corpus, k)
    pairs = list(combinations(refs, 2))
    phis = np.array([scorer.score(a, b, t) for a, b in pairs], dtype=float)
    if not pairs or not len(candidates):
        shape = (len(pairs), len(candidates))
        return pairs, phis, np.zeros(shape), None
    cand_ids = candidates.ids if isinstance(candidates, ScoreColumns) else list(candidates)
    ref_scores, ref_exact = scorer.bulk(refs, candidates, t, with_exact=True)
    ref_scores = np.where(np.isnan(ref_scores), np.inf, ref_scores)
    pos = {r: n for n, r in enumerate(refs)}
    ia = np.array([pos[a] for a, _ in pairs])
    ib = np.array([pos[b] for _, b in pairs])
    left, right = ref_scores[ia], ref_scores[ib]
    slack = phis[:, None] - np.maximum(left, right)
    delta = np.maximum(slack, 0.0)
    if ref_exact.all():
        return pairs, phis, delta, None
    # only the side that decides the maximum has to be exact
    ex_l, ex_r = ref_exact[ia], ref_exact[ib]
    exact = np.where(left > right + EXACT_TOL, ex_l, np.where(right > left + EXACT_TOL, ex_r, ex_l & ex_r))
    for n, c in np.argwhere((np.abs(slack) <= EXACT_TOL) & ~exact):
        delta[n, c] = exact_impact(scorer, pairs[n], phis[n], cand_ids[c], t)
        exact[n, c] = True
    return pairs, phis, delta, exact


def exact_impact(scorer: PairScorer, pair, phi_ij: float, x: str, t: int) -> float:
    """Impact of ``x`` on ``pair`` from scalar scores."""
    a, b = pair
    if x in (a, b):
        return 0.0
    return pair_impact(phi_ij, scorer.score(a, x, t), scorer.score(x, b, t))


class Decomposer:
    """Runs the per-pair enabler search for papers of one corpus.

    ``reading_set`` is the pool of candidate enablers. ``time_of`` maps a
    candidate to its time in years when a decay model is used: the median
    reading time for reading-based decay, the publish year for
    publishing-based decay.
    """

    def __init__(self, scorer: PairScorer, reading_set: Iterable[str], config: AnalysisConfig | None = None,
                 decay: TemporalDecayModel | None = None, time_of: Callable[[str], float] | None = None):
        self.scorer = scorer
        self.corpus: Corpus = scorer.corpus
        self.config = config or AnalysisConfig()
        self.decay = decay
        if decay is not None and time_of is None:
            raise ValueError("a decay model needs time_of")
        self.time_of = time_of
        pool = sorted(set(reading_set))
        skipped = [x for x in pool if not self.corpus.resolvable(x)]
        if skipped:
            log.warning("%d reading paper(s) lack corpus topics and cannot act as enablers", len(skipped))
        self.candidates = [x for x in pool if self.corpus.resolvable(x)]
        self._columns = scorer.columns(self.candidates) if self.candidates else []
        self._times = None
        if decay is not None:
            self._times = np.array([time_of(x) for x in self.candidates], dtype=float)

    def deltas(self, k: str):
        return reference_impacts(self.scorer, k, self._columns)

    def decompose(self, k: str, seed: int | None = None) -> DecompositionResult:
        agg = self.config.aggregator
        seed = self.config.rng_seed if seed is None else seed
        pairs, phis, delta, exact = _impacts(self.scorer, k, self._columns)
        if len(pairs) == 0:
            return DecompositionResult(k, 0.0, 0.0, 0.0, [], "insufficient references")
        year = self.corpus[k].publish_year
        if self.decay is not None and len(self.candidates):
            probs = np.array([acceptance_probability(self.decay, year - tx) for tx in self._times])
        chosen_delta = np.zeros(len(pairs))
        records = []
        for n, (a, b) in enumerate(pairs):
            enabler = None
            if len(self.candidates):
                row = delta[n]
                if self.decay is None:
                    top = row.max()
                    if top > 0:
                        # settle near-ties with scalar scores; the first (smallest id) maximum wins
                        near = np.flatnonzero(row >= top - EXACT_TOL)
                        vals = [row[c] if exact is None or exact[n, c] else
                                exact_impact(self.scorer, (a, b), phis[n], self.candidates[c], year) for c in near]
                        best = int(np.argmax(vals))
                        if vals[best] > 0:
                            enabler, chosen_delta[n] = self.candidates[near[best]], vals[best]
                else:
                    order = ranked_candidates(row)
                    if len(order):
                        draws = pair_rng(seed, k, a, b).random(len(order))
                        hit = np.flatnonzero(draws < probs[order])
                        if len(hit):
                            pos = order[hit[0]]
                            enabler = self.candidates[pos]
                            chosen_delta[n] = row[pos] if exact is None or exact[n, pos] else \
                                exact_impact(self.scorer, (a, b), phis[n], enabler, year)
            records.append(PairRecord(a, b, float(phis[n]), enabler, float(chosen_delta[n])))
        phi, psi, chi = split_creativity(phis.tolist(), chosen_delta.tolist(), agg)
        return DecompositionResult(k, phi, psi, chi, records)


def decompose(k, reading_set, corpus, hierarchy, index, decay=None, config=None, rng=None,
              time_of=None, scorer: PairScorer | None = None) -> DecompositionResult:
    """One-shot decomposition of paper ``k``; see :class:`Decomposer` for batches.

    ``rng`` may be an integer seed overriding ``config.rng_seed``.
    """
    config = config or AnalysisConfig()
    scorer = scorer or PairScorer(corpus, hierarchy, index, config.sigma)
    seed = rng if isinstance(rng, (int, np.integer)) else None
    return Decomposer(scorer, reading_set, config, decay, time_of).decompose(k, seed)


__all__ = [
    "DecompositionResult", "Decomposer", "EmptyAggregation", "exact_impact", "PairRecord", "best_enabler", "decompose",
    "pair_impact", "pair_rng", "path_impact", "ranked_candidates", "reference_impacts", "sample_enabler", "split_creativity",
]
