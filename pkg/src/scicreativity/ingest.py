"""Line-delimited JSON parsers, the co-citation index and the reading log."""

from __future__ import annotations

import io
import json
import logging
from bisect import bisect_left
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator

import numpy as np

from .corpus import HierarchyError, PaperRecord, ReadingEvent, TopicHierarchy, TopicNode

log = logging.getLogger(__name__)


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _lines(stream) -> Iterator[tuple[int, str]]:
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    elif isinstance(stream, str):
        stream = io.StringIO(stream)
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, (bytes, bytearray)):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"invalid UTF-8: {exc}", lineno) from None
        text = raw.strip()
        if text:
            yield lineno, text


def _records(stream) -> Iterator[tuple[int, dict]]:
    for lineno, text in _lines(stream):
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc.msg}", lineno) from None
        if not isinstance(rec, dict):
            raise ParseError("record must be a JSON object", lineno)
        yield lineno, rec


def _require(rec: dict, key: str, kind, lineno: int):
    if key not in rec:
        raise ParseError(f"missing required field {key!r}", lineno)
    value = rec[key]
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"field {key!r} must be an integer", lineno)
    elif kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"field {key!r} must be a number", lineno)
    elif kind is list:
        if not isinstance(value, list):
            raise ParseError(f"field {key!r} must be a list", lineno)
    elif not isinstance(value, kind):
        raise ParseError(f"field {key!r} must be {kind.__name__}", lineno)
    return value


def _str_list(rec, key, lineno):
    values = _require(rec, key, list, lineno)
    if not all(isinstance(v, str) for v in values):
        raise ParseError(f"field {key!r} must be a list of strings", lineno)
    return values


def parse_papers(stream: IO | bytes | str, hierarchy: TopicHierarchy | None = None) -> list[PaperRecord]:
    """Parse the papers file, one record per line.

    An optional ``keywords`` list is resolved to topics through the
    hierarchy's keyword map and merged with ``topics``.
    """
    papers, seen = [], set()
    for lineno, rec in _records(stream):
        pid = _require(rec, "id", str, lineno)
        if not pid:
            raise ParseError("paper id must be nonempty", lineno)
        if pid in seen:
            raise ParseError(f"duplicate paper id {pid!r}", lineno)
        seen.add(pid)
        year = _require(rec, "year", int, lineno)
        topics = set(_str_list(rec, "topics", lineno))
        refs = tuple(_str_list(rec, "references", lineno))
        if "keywords" in rec and hierarchy is not None:
            kws = _str_list(rec, "keywords", lineno)
            resolved = hierarchy.resolve_keywords(kws)
            if len(resolved) < len(set(kws)):
                log.warning("line %d: %d keyword(s) of %s have no topic", lineno,
                            len(set(kws)) - len(resolved), pid)
            topics |= resolved
        papers.append(PaperRecord(pid, year, frozenset(topics), refs))
    return papers


def parse_topic_hierarchy(stream: IO | bytes | str) -> TopicHierarchy:
    nodes, keyword_map = [], {}
    for lineno, rec in _records(stream):
        tid = _require(rec, "id", str, lineno)
        level = _require(rec, "level", int, lineno)
        parents = []
        for entry in _require(rec, "parents", list, lineno):
            if not isinstance(entry, dict):
                raise ParseError("parent entries must be objects", lineno)
            parents.append((_require(entry, "id", str, lineno), float(_require(entry, "weight", float, lineno))))
        for kw in rec.get("keywords", []) or []:
            keyword_map[kw] = tid
        nodes.append(TopicNode(tid, level, tuple(parents)))
    try:
        return TopicHierarchy.from_nodes(nodes, keyword_map)
    except HierarchyError as exc:
        raise ParseError(str(exc)) from None


# ---------------------------------------------------------------------------
# reading log


def fractional_year(timestamp: float) -> float:
    """Calendar year plus the elapsed fraction of that year (UTC)."""
    dt = datetime.fromtimestamp(timestamp, tz=timezone.utc)
    start = datetime(dt.year, 1, 1, tzinfo=timezone.utc).timestamp()
    end = datetime(dt.year + 1, 1, 1, tzinfo=timezone.utc).timestamp()
    return dt.year + (timestamp - start) / (end - start)


class ReadingLog:
    def __init__(self, events: Iterable[ReadingEvent]):
        grouped: dict[str, list[int]] = {}
        for ev in events:
            grouped.setdefault(ev.paper_id, []).append(ev.timestamp)
        self.events = {pid: sorted(ts) for pid, ts in sorted(grouped.items())}
        # lower median keeps the reading time an observed event
        self.median_time = {pid: ts[(len(ts) - 1) // 2] for pid, ts in self.events.items()}

    def __contains__(self, paper_id) -> bool:
        return paper_id in self.median_time

    def __len__(self) -> int:
        return len(self.median_time)

    def paper_ids(self) -> list[str]:
        return list(self.median_time)

    def reading_year(self, paper_id: str) -> int:
        return datetime.fromtimestamp(self.median_time[paper_id], tz=timezone.utc).year

    def reading_time_years(self, paper_id: str) -> float:
        return fractional_year(self.median_time[paper_id])

    def read_in(self, year: int) -> set[str]:
        return {pid for pid in self.median_time if self.reading_year(pid) == year}

    def n_events(self) -> int:
        return sum(len(v) for v in self.events.values())


def parse_readings(stream: IO | bytes | str) -> ReadingLog:
    events = []
    for lineno, rec in _records(stream):
        pid = _require(rec, "paper_id", str, lineno)
        ts = _require(rec, "timestamp", int, lineno)
        if ts <= 0:
            raise ParseError(f"timestamp must be positive, got {ts}", lineno)
        events.append(ReadingEvent(pid, ts))
    return ReadingLog(events)


# ---------------------------------------------------------------------------
# co-citation index


class CoCitationIndex:
    """Cumulative co-citation counts per unordered paper pair and year.

    Paper ids are numbered in lexicographic order, a pair ``{a, b}`` is
    encoded as ``lo * n_ids + hi`` and each (pair, year) entry as
    ``code * span + (year - min_year)``. Entries are sorted, so "count
    before year t" is one binary search.
    """

    def __init__(self, ids: list[str], keys: np.ndarray, cumulative: np.ndarray, min_year: int, span: int):
        self.ids = ids
        self.id_index = {pid: n for n, pid in enumerate(ids)}
        self.keys = keys
        self.cumulative = cumulative
        self.min_year = min_year
        self.span = span
        self._adj = None

    @classmethod
    def empty(cls) -> "CoCitationIndex":
        return cls([], np.zeros(0, np.int64), np.zeros(0, np.int64), 0, 1)

    # -- scalar queries --------------------------------------------------
    def _code(self, i: str, j: str) -> int | None:
        a, b = self.id_index.get(i), self.id_index.get(j)
        if a is None or b is None or a == b:
            return None
        lo, hi = (a, b) if a < b else (b, a)
        return lo * len(self.ids) + hi

    def _offset(self, t: int) -> int:
        return min(max(t - self.min_year, 0), self.span - 1)

    def count_till(self, i: str, j: str, t: int) -> int:
        """Co-citations of ``{i, j}`` by papers published strictly before ``t``."""
        code = self._code(i, j)
        if code is None or not len(self.keys):
            return 0
        pos = int(np.searchsorted(self.keys, code * self.span + self._offset(t), side="left")) - 1
        if pos >= 0 and int(self.keys[pos]) // self.span == code:
            return int(self.cumulative[pos])
        return 0

    def total(self, i: str, j: str) -> int:
        code = self._code(i, j)
        if code is None or not len(self.keys):
            return 0
        pos = int(np.searchsorted(self.keys, (code + 1) * self.span, side="left")) - 1
        if pos >= 0 and int(self.keys[pos]) // self.span == code:
            return int(self.cumulative[pos])
        return 0

    # -- vectorised query -------------------------------------------------
    def count_till_many(self, a_idx: np.ndarray, b_idx: np.ndarray, t: int) -> np.ndarray:
        """Vector form of :meth:`count_till` on integer id indices (-1 = unknown)."""
        a_idx = np.asarray(a_idx, dtype=np.int64)
        b_idx = np.asarray(b_idx, dtype=np.int64)
        out = np.zeros(np.broadcast(a_idx, b_idx).shape, dtype=np.int64)
        if not len(self.keys):
            return out
        a_idx, b_idx = np.broadcast_arrays(a_idx, b_idx)
        ok = (a_idx >= 0) & (b_idx >= 0) & (a_idx != b_idx)
        lo = np.minimum(a_idx, b_idx)[ok]
        hi = np.maximum(a_idx, b_idx)[ok]
        code = lo * len(self.ids) + hi
        pos = np.searchsorted(self.keys, code * self.span + self._offset(t), side="left") - 1
        safe = np.maximum(pos, 0)
        hit = (pos >= 0) & (self.keys[safe] // self.span == code)
        out[ok] = np.where(hit, self.cumulative[safe], 0)
        return out

    def _adjacency(self):
        # per paper: co-cited partners and the matching pair codes, CSR layout
        if self._adj is None:
            n = len(self.ids)
            codes = self.keys // self.span
            first = np.r_[True, codes[1:] != codes[:-1]] if len(codes) else np.zeros(0, bool)
            pair = codes[first]
            lo, hi = pair // n, pair % n
            node = np.concatenate([lo, hi])
            order = np.argsort(node, kind="stable")
            partner = np.concatenate([hi, lo])[order]
            indptr = np.searchsorted(node[order], np.arange(n + 1))
            self._adj = (indptr, partner, np.concatenate([pair, pair])[order])
        return self._adj

    def count_till_rows(self, a_idx: np.ndarray, col_lookup: np.ndarray, n_cols: int, t: int) -> np.ndarray:
        """``count_till`` for every row paper against a column set.

        ``col_lookup`` maps an id index to its column (-1 when absent) and
        must be injective. Only each row's co-cited partners are visited.
        """
        out = np.zeros((len(a_idx), n_cols), dtype=np.int64)
        if not len(self.keys):
            return out
        indptr, partner, pair = self._adjacency()
        off = self._offset(t)
        for r, a in enumerate(np.asarray(a_idx, dtype=np.int64)):
            if a < 0:
                continue
            s, e = indptr[a], indptr[a + 1]
            cols = col_lookup[partner[s:e]]
            keep = cols >= 0
            if not keep.any():
                continue
            code = pair[s:e][keep]
            pos = np.searchsorted(self.keys, code * self.span + off, side="left") - 1
            safe = np.maximum(pos, 0)
            hit = (pos >= 0) & (self.keys[safe] // self.span == code)
            out[r, cols[keep]] = np.where(hit, self.cumulative[safe], 0)
        return out

    def index_of(self, paper_ids: Iterable[str]) -> np.ndarray:
        return np.array([self.id_index.get(p, -1) for p in paper_ids], dtype=np.int64)

    # -- whole-index views -------------------------------------------------
    def items(self) -> Iterator[tuple[str, str, list[tuple[int, int]]]]:
        """Yield ``(i, j, [(year, cumulative), ...])`` with ``i < j``."""
        n = len(self.ids)
        codes = self.keys // self.span
        years = self.keys % self.span + self.min_year
        start = 0
        while start < len(codes):
            end = start
            while end < len(codes) and codes[end] == codes[start]:
                end += 1
            lo, hi = divmod(int(codes[start]), n)
            yield self.ids[lo], self.ids[hi], [(int(y), int(c)) for y, c in zip(years[start:end], self.cumulative[start:end])]
            start = end

    def grand_total(self) -> int:
        if not len(self.keys):
            return 0
        codes = self.keys // self.span
        last = np.r_[codes[1:] != codes[:-1], True]
        return int(self.cumulative[last].sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoCitationIndex):
            return NotImplemented
        return (self.ids == other.ids and self.min_year == other.min_year and self.span == other.span
                and np.array_equal(self.keys, other.keys) and np.array_equal(self.cumulative, other.cumulative))


_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triu(n: int):
    pair = _TRIU_CACHE.get(n)
    if pair is None:
        pair = np.triu_indices(n, k=1)
        _TRIU_CACHE[n] = pair
    return pair


def build_cocitation_index(papers: Iterable[PaperRecord]) -> CoCitationIndex:
    """Count, for every unordered pair, how many papers cite both, by year.

    Each paper contributes one count at its publish year for every
    unordered pair in its (deduplicated) reference list.
    """
    papers = list(papers)
    ids = sorted({r for p in papers for r in p.references} | {p.id for p in papers})
    if not papers or not ids:
        return CoCitationIndex.empty()
    id_index = {pid: n for n, pid in enumerate(ids)}
    n_ids = len(ids)
    min_year = min(p.publish_year for p in papers)
    max_year = max(p.publish_year for p in papers)
    span = max_year - min_year + 2
    if (n_ids * n_ids) * span >= 2**63:
        raise OverflowError("corpus too large for 64-bit pair keys")

    chunks = []
    for p in papers:
        refs = sorted({id_index[r] for r in p.references})
        if len(refs) < 2:
            continue
        arr = np.asarray(refs, dtype=np.int64)
        a, b = _triu(len(arr))
        chunks.append((arr[a] * n_ids + arr[b]) * span + (p.publish_year - min_year))
    if not chunks:
        return CoCitationIndex(ids, np.zeros(0, np.int64), np.zeros(0, np.int64), min_year, span)
    entries = np.sort(np.concatenate(chunks), kind="stable")
    keys, counts = np.unique(entries, return_counts=True)
    codes = keys // span
    running = np.cumsum(counts)
    seg_start = np.r_[True, codes[1:] != codes[:-1]]
    # subtract the running total reached before each pair's first entry
    before = np.where(seg_start, running - counts, 0)
    before = np.maximum.accumulate(before)
    cumulative = running - before
    return CoCitationIndex(ids, keys.astype(np.int64), cumulative.astype(np.int64), min_year, span)
