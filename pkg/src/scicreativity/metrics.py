"""Rarity, pair creativity scores and paper-level creativity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import sparse

from .aggregation import EmptyAggregation, aggregate
from .corpus import AnalysisConfig, Corpus, PaperRecord, TopicHierarchy
from .ingest import CoCitationIndex
from .similarity import UndefinedDisconnect, disconnect, topic_pair_similarity


class DegeneratePair(ValueError):
    pass


def rarity_from_count(c: int) -> float:
    return 1.0 / (1.0 + math.log2(c + 1))


def rarity(index: CoCitationIndex, i: str, j: str, t: int) -> float:
    """Inverse-log rarity of the pair's co-citations before year ``t``."""
    if i == j:
        raise DegeneratePair(f"degenerate pair ({i!r}, {i!r})")
    return rarity_from_count(index.count_till(i, j, t))


@dataclass(frozen=True)
class PairScore:
    i: str
    j: str
    rarity: float
    disconnect: float
    creativity: float
    year: int


def creativity_score(hierarchy: TopicHierarchy, index: CoCitationIndex, paper_i: PaperRecord,
                     paper_j: PaperRecord, t: int, sigma: float = 0.8) -> PairScore:
    if paper_i.id == paper_j.id:
        raise DegeneratePair(f"degenerate pair ({paper_i.id!r}, {paper_i.id!r})")
    a, b = (paper_i, paper_j) if paper_i.id < paper_j.id else (paper_j, paper_i)
    d = disconnect(hierarchy, a.topics, b.topics, sigma)
    r = rarity(index, a.id, b.id, t)
    return PairScore(a.id, b.id, r, d, d * r, t)


@dataclass
class PaperCreativity:
    paper_id: str
    phi: float
    trace: list = field(default_factory=list)
    flag: str = ""  # "insufficient references" when fewer than two usable references

    def __iter__(self):
        # allows ``phi, trace = paper_creativity(...)``
        return iter((self.phi, self.trace))


def resolvable_references(corpus: Corpus, k: str) -> list[str]:
    return sorted(r for r in set(corpus[k].references) if corpus.resolvable(r))


def paper_creativity(hierarchy: TopicHierarchy, index: CoCitationIndex, corpus: Corpus, k: str,
                     config: AnalysisConfig | None = None) -> PaperCreativity:
    """Aggregate pair scores over all unordered pairs of the paper's references.

    Only references present in the corpus with at least one topic are used.
    Papers left with fewer than two such references score 0 and are flagged.
    """
    config = config or AnalysisConfig()
    paper = corpus[k]
    refs = resolvable_references(corpus, k)
    trace = [creativity_score(hierarchy, index, corpus[a], corpus[b], paper.publish_year, config.sigma)
             for a, b in combinations(refs, 2)]
    try:
        phi = aggregate([s.creativity for s in trace], config.aggregator)
    except EmptyAggregation:
        return PaperCreativity(k, 0.0, trace, "insufficient references")
    return PaperCreativity(k, phi, trace)


class PairScorer:
    """Creativity scores between corpus papers, scalar or in bulk.

    The topic-similarity matrix over every topic used in the corpus is
    built once; bulk disconnects are then ``B_i S B_j^T / (|T_i| |T_j|)``
    with ``B`` the paper-topic incidence matrix.
    """

    def __init__(self, corpus: Corpus, hierarchy: TopicHierarchy, index: CoCitationIndex, sigma: float = 0.8):
        self.corpus = corpus
        self.hierarchy = hierarchy
        self.index = index
        self.sigma = sigma
        self._scalar: dict[tuple[str, str, int], float] = {}
        self._rarity_table = None
        self._dense = None

    # -- scalar ------------------------------------------------------------
    def score(self, i: str, j: str, t: int) -> float:
        a, b = (i, j) if i < j else (j, i)
        key = (a, b, t)
        val = self._scalar.get(key)
        if val is None:
            val = creativity_score(self.hierarchy, self.index, self.corpus[a], self.corpus[b], t, self.sigma).creativity
            self._scalar[key] = val
        return val

    # -- bulk ----------------------------------------------------------------
    def _prepare(self):
        if self._dense is not None:
            return
        papers = [p for p in self.corpus if p.topics]
        topics = sorted({t for p in papers for t in p.topics})
        t_index = {t: n for n, t in enumerate(topics)}
        n = len(topics)
        sim = np.zeros((n, n))
        for a in range(n):
            sim[a, a] = topic_pair_similarity(self.hierarchy, topics[a], topics[a], self.sigma)
            for b in range(a + 1, n):
                sim[a, b] = sim[b, a] = topic_pair_similarity(self.hierarchy, topics[a], topics[b], self.sigma)
        rows, cols = [], []
        for r, p in enumerate(papers):
            for t in p.topics:
                rows.append(r)
                cols.append(t_index[t])
        self._row = {p.id: r for r, p in enumerate(papers)}
        self._incidence = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(papers), n))
        self._n_topics = np.array([len(p.topics) for p in papers], dtype=float)
        self._sim = sim
        self._limbs, self._bad = _split_limbs(sim)
        self._id_idx = self.index.index_of(p.id for p in papers)
        self._dense = True

    def _rarity_of_counts(self, counts: np.ndarray) -> np.ndarray:
        # table of math.log2-based values keeps bulk results identical to the scalar route
        top = int(counts.max()) if counts.size else 0
        if self._rarity_table is None or len(self._rarity_table) <= top:
            self._rarity_table = np.array([rarity_from_count(c) for c in range(max(top + 1, 64))])
        return self._rarity_table[counts]

    def columns(self, col_ids) -> "ScoreColumns":
        """Pre-resolve a column set reused across many :meth:`matrix` calls."""
        self._prepare()
        cols = np.array([self._row[j] for j in col_ids], dtype=np.int64)
        id_idx = self._id_idx[cols]
        known = id_idx[id_idx >= 0]
        lookup = None
        if len(np.unique(known)) == len(known):
            lookup = np.full(len(self.index.ids), -1, dtype=np.int64)
            lookup[known] = np.flatnonzero(id_idx >= 0)
        return ScoreColumns(list(col_ids), cols, self._incidence[cols].T.tocsr(),
                            self._n_topics[cols], id_idx, lookup)

    def matrix(self, row_ids, col_ids, t: int) -> np.ndarray:
        """Scores between every row paper and every column paper at year ``t``.

        All ids must be resolvable; ``col_ids`` may be a :class:`ScoreColumns`.
        Entries where the row and column paper coincide are NaN.
        """
        return self.bulk(row_ids, col_ids, t)[0]

    def bulk(self, row_ids, col_ids, t: int, with_exact: bool = False):
        """``(scores, exact)``; ``exact`` marks entries known to equal :meth:`score` bitwise.

        Topic-pair sums are carried out in exact integer limbs and rounded
        once, which reproduces the correctly rounded scalar sum. Entries
        touching a similarity too small for the limbs, or with very many
        topic pairs, are not guaranteed. ``exact`` is None unless requested.
        """
        self._prepare()
        cols = col_ids if isinstance(col_ids, ScoreColumns) else self.columns(col_ids)
        rows = np.array([self._row[i] for i in row_ids], dtype=np.int64)
        if not len(rows) or not len(cols.pos):
            shape = (len(rows), len(cols.pos))
            return np.zeros(shape), (np.ones(shape, dtype=bool) if with_exact else None)
        d = self._disconnect(rows, cols)
        if cols.lookup is not None:
            counts = self.index.count_till_rows(self._id_idx[rows], cols.lookup, len(cols.pos), t)
        else:
            counts = self.index.count_till_many(self._id_idx[rows][:, None], cols.id_idx[None, :], t)
        out = d * self._rarity_of_counts(counts)
        out[rows[:, None] == cols.pos[None, :]] = np.nan
        exact = None
        if with_exact:
            if self._bad is None and self._n_topics[rows].max() * cols.n_topics.max() <= MAX_EXACT_TERMS:
                return out, np.ones(out.shape, dtype=bool)
            exact = np.outer(self._n_topics[rows], cols.n_topics) <= MAX_EXACT_TERMS
            if self._bad is not None:
                bad = np.asarray(cols.incidence_t.T @ (self._incidence[rows] @ self._bad).T).T
                exact &= bad == 0
        return out, exact

    def _disconnect(self, rows, cols):
        n = len(rows)
        left = self._incidence[rows] @ self._limbs                  # (n_rows, 2 * n_topics)
        t = self._sim.shape[0]
        stacked = np.vstack([left[:, :t], left[:, t:]])              # high limbs, then low limbs
        sums = np.asarray(cols.incidence_t.T @ stacked.T).T          # (2 * n_rows, n_cols), exact integers
        shared = (sums[:n] * _LIMB + sums[n:]) * _SCALE              # one rounding
        denom = np.outer(self._n_topics[rows], cols.n_topics)
        return np.maximum(1.0 - shared / denom, 0.0)

    def disconnect_matrix(self, row_ids, col_ids) -> np.ndarray:
        self._prepare()
        cols = col_ids if isinstance(col_ids, ScoreColumns) else self.columns(col_ids)
        rows = np.array([self._row[i] for i in row_ids], dtype=np.int64)
        if not len(rows) or not len(cols.pos):
            return np.zeros((len(rows), len(cols.pos)))
        return self._disconnect(rows, cols)


# similarities are held as s * 2**82 = hi * 2**41 + lo with hi, lo < 2**41, so
# sums of up to 2**12 terms stay exact in float64
_LIMB = 2.0 ** 41
_SCALE = 2.0 ** -82
MAX_EXACT_TERMS = 4096


def _split_limbs(sim: np.ndarray):
    hi = np.floor(sim * _LIMB)
    lo = (sim * _LIMB - hi) * _LIMB
    ok = lo == np.floor(lo)
    lo = np.where(ok, lo, np.floor(lo))
    bad = None if ok.all() else (~ok).astype(float)
    return np.hstack([hi, lo]), bad


@dataclass(frozen=True)
class ScoreColumns:
    ids: list
    pos: np.ndarray
    incidence_t: sparse.csr_matrix
    n_topics: np.ndarray
    id_idx: np.ndarray
    lookup: np.ndarray | None = None  # id index -> column, when injective

    def __len__(self):
        return len(self.ids)


__all__ = [
    "DegeneratePair", "PairScore", "PairScorer", "ScoreColumns", "PaperCreativity", "UndefinedDisconnect",
    "creativity_score", "paper_creativity", "rarity", "rarity_from_count", "resolvable_references",
]
