"""Deterministic synthetic corpora with planted enablers.

Regular papers only cite papers of their own discipline, so every
cross-discipline pair is uncited before the target year. Each target cites
one paper from each of two disciplines; its planted bridge carries both
endpoints' topics and is the only kind of paper able to lower that pair's
score. All bridges are read.

Run ``python -m scicreativity.synthetic OUTDIR`` to write the JSONL files.
"""

from __future__ import annotations

import argparse
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .corpus import Corpus, PaperRecord, ReadingEvent, TopicHierarchy, TopicNode
from .ingest import ReadingLog


@dataclass
class SyntheticCorpus:
    papers: list
    topics: list
    readings: list
    targets: list = field(default_factory=list)
    bridges: list = field(default_factory=list)
    target_year: int = 2010

    def corpus(self) -> Corpus:
        return Corpus(self.papers)

    def hierarchy(self) -> TopicHierarchy:
        return TopicHierarchy.from_nodes(self.topics)

    def reading_log(self) -> ReadingLog:
        return ReadingLog(self.readings)

    def write(self, outdir: str):
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "papers.jsonl"), "w") as fh:
            for p in self.papers:
                fh.write(json.dumps({"id": p.id, "year": p.publish_year, "topics": sorted(p.topics),
                                     "references": list(p.references)}) + "\n")
        with open(os.path.join(outdir, "topics.jsonl"), "w") as fh:
            for t in self.topics:
                fh.write(json.dumps({"id": t.id, "level": t.level,
                                     "parents": [{"id": a, "weight": w} for a, w in t.parents]}) + "\n")
        with open(os.path.join(outdir, "readings.jsonl"), "w") as fh:
            for ev in self.readings:
                fh.write(json.dumps({"paper_id": ev.paper_id, "timestamp": ev.timestamp}) + "\n")
        with open(os.path.join(outdir, "planted.json"), "w") as fh:
            json.dump({"targets": self.targets, "bridges": self.bridges, "target_year": self.target_year}, fh, indent=1)


def _epoch(year, month=1, day=1):
    return int(datetime(year, month, day, tzinfo=timezone.utc).timestamp())


def make_hierarchy(n_disciplines=4, per_discipline=(4, 10, 35), rng=None):
    """Topic nodes: ``n_disciplines`` roots, each owning its own subtree.

    ``per_discipline`` gives the node counts at levels 2, 1 and 0. Some
    nodes get two parents with split weights.
    """
    rng = rng or np.random.default_rng(0)
    nodes, by_disc = [], {}
    n2, n1, n0 = per_discipline
    for d in range(n_disciplines):
        root = f"D{d}"
        nodes.append(TopicNode(root, 3, ()))
        lvl2 = [f"D{d}.L2.{n}" for n in range(n2)]
        lvl1 = [f"D{d}.L1.{n}" for n in range(n1)]
        lvl0 = [f"D{d}.L0.{n}" for n in range(n0)]
        for t in lvl2:
            nodes.append(TopicNode(t, 2, ((root, 1.0),)))
        for level, names, pool in ((1, lvl1, lvl2), (0, lvl0, lvl1)):
            for t in names:
                if len(pool) > 1 and rng.random() < 0.4:
                    a, b = rng.choice(len(pool), size=2, replace=False)
                    w = float(rng.choice([0.5, 0.25, 0.75]))
                    parents = ((pool[a], w), (pool[b], 1.0 - w))
                else:
                    parents = ((pool[int(rng.integers(len(pool)))], 1.0),)
                nodes.append(TopicNode(t, level, parents))
        by_disc[d] = {"leaf": lvl0, "mid": lvl1}
    return nodes, by_disc


def generate(n_papers=5000, n_readings=20000, n_targets=20, n_disciplines=4, per_discipline=(4, 10, 35),
             first_year=2000, target_year=2010, refs=(3, 10), seed=0) -> SyntheticCorpus:
    rng = np.random.default_rng(seed)
    topics, by_disc = make_hierarchy(n_disciplines, per_discipline, rng)

    n_regular = n_papers - 2 * n_targets
    years = np.sort(rng.integers(first_year, target_year, size=n_regular))
    discs = rng.integers(n_disciplines, size=n_regular)
    papers, pool = [], {d: [] for d in range(n_disciplines)}
    single_topic = {d: [] for d in range(n_disciplines)}
    year_start = {}
    for n in range(n_regular):
        d, year = int(discs[n]), int(years[n])
        if year not in year_start:
            year_start[year] = {dd: len(pool[dd]) for dd in pool}
        leaves = by_disc[d]["leaf"]
        n_topics = int(rng.integers(1, 4))
        chosen = {leaves[int(i)] for i in rng.choice(len(leaves), size=n_topics, replace=False)}
        if rng.random() < 0.1:
            mids = by_disc[d]["mid"]
            chosen.add(mids[int(rng.integers(len(mids)))])
        # only papers from strictly earlier years are citable
        n_citable = year_start[year][d]
        refs_out = ()
        if n_citable:
            k = min(n_citable, int(rng.integers(refs[0], refs[1] + 1)))
            # density rising linearly with position: a preference for recent work
            draws = (n_citable * np.sqrt(rng.random(2 * k + 4))).astype(np.int64)
            _, first = np.unique(draws, return_index=True)
            picks = draws[np.sort(first)][:k]
            refs_out = tuple(pool[d][int(i)] for i in sorted(picks))
        pid = f"P{n:06d}"
        papers.append(PaperRecord(pid, year, frozenset(chosen), refs_out))
        pool[d].append(pid)
        if len(chosen) == 1:
            single_topic[d].append(pid)

    by_id = {p.id: p for p in papers}
    targets, bridges, used = [], [], set()
    for n in range(n_targets):
        a, b = rng.choice(n_disciplines, size=2, replace=False)
        cands_a = [p for p in single_topic[int(a)] if p not in used]
        cands_b = [p for p in single_topic[int(b)] if p not in used]
        i = cands_a[int(rng.integers(len(cands_a)))]
        j = cands_b[int(rng.integers(len(cands_b)))]
        used.update((i, j))
        ti, tj = next(iter(by_id[i].topics)), next(iter(by_id[j].topics))
        bid, kid = f"B{n:04d}", f"T{n:04d}"
        bridge_year = int(rng.integers(max(first_year, target_year - 5), target_year))
        papers.append(PaperRecord(bid, bridge_year, frozenset({ti, tj}), ()))
        papers.append(PaperRecord(kid, target_year, frozenset({ti, tj}), tuple(sorted((i, j)))))
        targets.append(kid)
        bridges.append(bid)

    # readings: every bridge a few times, the rest spread over popular regular papers
    readings = []
    lo, hi = _epoch(target_year - 4, 9, 1), _epoch(target_year, 6, 1)
    for bid in bridges:
        for _ in range(int(rng.integers(3, 6))):
            readings.append(ReadingEvent(bid, int(rng.integers(_epoch(target_year - 2), _epoch(target_year)))))
    n_rest = max(0, n_readings - len(readings))
    popularity = rng.pareto(1.5, size=n_regular) + 1.0
    picks = rng.choice(n_regular, size=n_rest, p=popularity / popularity.sum())
    stamps = rng.integers(lo, hi, size=n_rest)
    for n, (pi, ts) in enumerate(zip(picks, stamps)):
        pid = papers[int(pi)].id if n % 50 else f"EXT{n:06d}"  # some reads fall outside the corpus
        readings.append(ReadingEvent(pid, int(ts)))
    return SyntheticCorpus(papers, topics, readings, targets, bridges, target_year)


def main(argv=None):
    ap = argparse.ArgumentParser(description="write a synthetic corpus with planted enablers")
    ap.add_argument("outdir")
    ap.add_argument("--papers", type=int, default=5000)
    ap.add_argument("--readings", type=int, default=20000)
    ap.add_argument("--targets", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    generate(args.papers, args.readings, args.targets, seed=args.seed).write(args.outdir)


if __name__ == "__main__":
    main()
