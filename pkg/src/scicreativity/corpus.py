"""Domain types shared across the package: papers, topic hierarchy, config."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .aggregation import Aggregator

N_LEVELS = 4
TOP_LEVEL = N_LEVELS - 1
WEIGHT_TOL = 1e-9


class HierarchyError(ValueError):
    """Raised when topic records do not form a valid weighted hierarchy."""


@dataclass(frozen=True)
class PaperRecord:
    id: str
    publish_year: int
    topics: frozenset = frozenset()
    # kept as an ordered tuple so duplicates stay detectable by validation
    references: tuple = ()

    @property
    def reference_set(self) -> frozenset:
        return frozenset(self.references)


@dataclass(frozen=True)
class TopicNode:
    id: str
    level: int
    parents: tuple = ()  # ((parent_id, weight), ...)


@dataclass(frozen=True)
class ReadingEvent:
    paper_id: str
    timestamp: int

    def __post_init__(self):
        if self.timestamp <= 0:
            raise ValueError(f"reading timestamp must be positive, got {self.timestamp}")


class TopicHierarchy:
    """Four-level weighted DAG of topics.

    Level 0 holds the most specific subjects, level 3 the disciplines. A node
    may have several parents one level up; their weights sum to one. Weights
    to non-adjacent ancestors are obtained by summing edge-weight products
    over every upward path, which keeps each level's weights summing to one.
    """

    def __init__(self, nodes: Mapping[str, TopicNode], keyword_map: Mapping[str, str] | None = None):
        self.nodes = dict(nodes)
        self.keyword_map = dict(keyword_map or {})
        self._check()
        self._ancestors: dict[tuple[str, int], dict[str, float]] = {}
        self._similarity: dict[tuple[str, str, float], float] = {}
        for node_id in sorted(self.nodes):
            for offset in range(TOP_LEVEL - self.nodes[node_id].level + 1):
                self.ancestors(node_id, offset)

    @classmethod
    def from_nodes(cls, nodes: Iterable[TopicNode], keyword_map=None) -> "TopicHierarchy":
        table = {}
        for node in nodes:
            if node.id in table:
                raise HierarchyError(f"duplicate topic id {node.id!r}")
            table[node.id] = node
        return cls(table, keyword_map)

    def _check(self):
        for node in self.nodes.values():
            if not node.id:
                raise HierarchyError("empty topic id")
            if node.level not in range(N_LEVELS):
                raise HierarchyError(f"topic {node.id!r}: level {node.level} outside 0..{TOP_LEVEL}")
            if node.level == TOP_LEVEL:
                if node.parents:
                    raise HierarchyError(f"topic {node.id!r}: level-{TOP_LEVEL} topics take no parents")
                continue
            if not node.parents:
                raise HierarchyError(f"topic {node.id!r}: level-{node.level} topic has no parents")
            seen = set()
            for parent_id, weight in node.parents:
                if parent_id in seen:
                    raise HierarchyError(f"topic {node.id!r}: parent {parent_id!r} listed twice")
                seen.add(parent_id)
                if parent_id == node.id:
                    raise HierarchyError(f"topic {node.id!r}: cycle through itself")
                parent = self.nodes.get(parent_id)
                if parent is None:
                    raise HierarchyError(f"topic {node.id!r}: missing parent {parent_id!r}")
                if parent.level != node.level + 1:
                    raise HierarchyError(
                        f"topic {node.id!r} (level {node.level}): parent {parent_id!r} "
                        f"is at level {parent.level}, expected {node.level + 1}"
                    )
                if not (0.0 < weight <= 1.0) or not math.isfinite(weight):
                    raise HierarchyError(f"topic {node.id!r}: parent weight {weight} outside (0, 1]")
            total = math.fsum(w for _, w in node.parents)
            if abs(total - 1.0) > WEIGHT_TOL:
                raise HierarchyError(f"topic {node.id!r}: parent weights sum to {total!r}, not 1")
        # strict one-level-up edges already rule out cycles; this guards the invariant explicitly
        for node in self.nodes.values():
            self._assert_acyclic(node.id)

    def _assert_acyclic(self, start: str):
        stack, on_path = [(start, iter(self.nodes[start].parents))], {start}
        while stack:
            node_id, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                on_path.discard(node_id)
                continue
            parent_id = nxt[0]
            if parent_id in on_path:
                raise HierarchyError(f"cycle through topic {parent_id!r}")
            on_path.add(parent_id)
            stack.append((parent_id, iter(self.nodes[parent_id].parents)))

    def __contains__(self, topic_id) -> bool:
        return topic_id in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def level(self, topic_id: str) -> int:
        try:
            return self.nodes[topic_id].level
        except KeyError:
            raise KeyError(f"unknown topic {topic_id!r}") from None

    def ancestors(self, topic_id: str, offset: int) -> dict[str, float]:
        """Propagated ancestor weights ``offset`` levels above ``topic_id``.

        Offset 0 is the topic itself with weight 1. Offsets past level 3
        give an empty mapping.
        """
        key = (topic_id, offset)
        cached = self._ancestors.get(key)
        if cached is not None:
            return cached
        node = self.nodes.get(topic_id)
        if node is None:
            raise KeyError(f"unknown topic {topic_id!r}")
        if offset < 0:
            raise ValueError("ancestor offset must be non-negative")
        if offset == 0:
            result = {topic_id: 1.0}
        elif node.level + offset > TOP_LEVEL:
            result = {}
        else:
            acc: dict[str, list[float]] = {}
            for parent_id, weight in node.parents:
                for anc, w in self.ancestors(parent_id, offset - 1).items():
                    acc.setdefault(anc, []).append(weight * w)
            result = {anc: math.fsum(parts) for anc, parts in sorted(acc.items())}
        self._ancestors[key] = result
        return result

    def ancestors_at_level(self, topic_id: str, level: int) -> dict[str, float]:
        return self.ancestors(topic_id, level - self.level(topic_id))

    def discipline_of(self, topics: Iterable[str]) -> str | None:
        """Level-3 ancestor carrying the largest propagated weight, ties by id."""
        topics = sorted(topics)
        if not topics:
            return None
        acc: dict[str, float] = {}
        for t in topics:
            for anc, w in self.ancestors_at_level(t, TOP_LEVEL).items():
                acc[anc] = acc.get(anc, 0.0) + w / len(topics)
        return min(acc, key=lambda a: (-acc[a], a))

    def resolve_keywords(self, keywords: Iterable[str]) -> set[str]:
        return {self.keyword_map[k] for k in keywords if k in self.keyword_map}


class Corpus:
    """Papers keyed by id, in insertion order."""

    def __init__(self, papers: Iterable[PaperRecord]):
        self.papers: dict[str, PaperRecord] = {}
        for p in papers:
            if p.id in self.papers:
                raise ValueError(f"duplicate paper id {p.id!r}")
            self.papers[p.id] = p

    def __contains__(self, paper_id) -> bool:
        return paper_id in self.papers

    def __getitem__(self, paper_id) -> PaperRecord:
        return self.papers[paper_id]

    def __iter__(self):
        return iter(self.papers.values())

    def __len__(self) -> int:
        return len(self.papers)

    def get(self, paper_id, default=None):
        return self.papers.get(paper_id, default)

    def ids(self) -> list[str]:
        return list(self.papers)

    def resolvable(self, paper_id: str) -> bool:
        """True when the paper is in the corpus and has at least one topic."""
        p = self.papers.get(paper_id)
        return p is not None and bool(p.topics)

    def published_in(self, year: int) -> list[PaperRecord]:
        return [p for p in self.papers.values() if p.publish_year == year]

    def years(self) -> list[int]:
        return sorted({p.publish_year for p in self.papers.values()})


DECAY_MODES = ("none", "reading", "publishing")


@dataclass(frozen=True)
class AnalysisConfig:
    sigma: float = 0.8
    aggregator: Aggregator = field(default_factory=Aggregator)
    budget_rho: int = 10
    rng_seed: int = 0
    decay_mode: str = "none"

    def __post_init__(self):
        if not (0.0 < self.sigma <= 1.0):
            raise ValueError(f"sigma must lie in (0, 1], got {self.sigma}")
        if self.budget_rho < 1:
            raise ValueError(f"budget must be at least 1, got {self.budget_rho}")
        if self.decay_mode not in DECAY_MODES:
            raise ValueError(f"decay mode must be one of {DECAY_MODES}, got {self.decay_mode!r}")
        if not (-(2**63) <= self.rng_seed < 2**64):
            raise ValueError("rng seed must fit in 64 bits")


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    message: str
    severity: str = "error"  # or "warning"

    def __str__(self):
        return f"{self.severity}: {self.kind}: {self.subject}: {self.message}"


def validate_corpus(papers: Iterable[PaperRecord], hierarchy: TopicHierarchy) -> list[Violation]:
    """Check paper invariants against the hierarchy.

    Returns every violation found, errors and warnings alike, in a stable
    order. An empty list means the corpus is fully clean; callers that only
    care about errors should filter on ``severity``.
    """
    papers = list(papers)
    report: list[Violation] = []
    seen: set[str] = set()
    ids = {p.id for p in papers}
    for p in papers:
        if not p.id:
            report.append(Violation("empty id", "<paper>", "paper id must be nonempty"))
        if p.id in seen:
            report.append(Violation("duplicate id", p.id, "paper id appears more than once"))
        seen.add(p.id)
        if p.id in p.references:
            report.append(Violation("self-citation", p.id, "paper cites itself"))
        if len(set(p.references)) != len(p.references):
            report.append(Violation("duplicate reference", p.id, "reference list contains duplicates"))
        for t in sorted(p.topics):
            if t not in hierarchy:
                report.append(Violation("unknown topic", p.id, f"topic {t!r} absent from hierarchy"))
        if not p.topics:
            report.append(Violation("empty topics", p.id, "paper has no topics", "warning"))
        for r in sorted(set(p.references)):
            if r != p.id and r not in ids:
                report.append(Violation("dangling reference", p.id, f"cited paper {r!r} not in corpus", "warning"))
    return report


def errors_only(report: Iterable[Violation]) -> list[Violation]:
    return [v for v in report if v.severity == "error"]
