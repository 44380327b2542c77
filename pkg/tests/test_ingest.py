import itertools
import math
import time
from datetime import datetime, timezone

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from factories import diamond_hierarchy, diamond_nodes, random_corpus, random_hierarchy, topics_jsonl
from scicreativity.corpus import PaperRecord
from scicreativity.ingest import (CoCitationIndex, ParseError, ReadingLog, build_cocitation_index,
                                  fractional_year, parse_papers, parse_readings, parse_topic_hierarchy)


def test_parse_single_paper():
    papers = parse_papers(b'{"id":"p1","year":2011,"topics":["t1"],"references":[]}\n')
    assert papers == [PaperRecord("p1", 2011, frozenset({"t1"}), ())]


def test_parse_empty_stream():
    assert parse_papers(b"") == []
    assert parse_papers(b"\n\n") == []


def test_duplicate_id_rejected_with_line():
    line = b'{"id":"p1","year":2011,"topics":[],"references":[]}\n'
    with pytest.raises(ParseError) as exc:
        parse_papers(line + line)
    assert exc.value.line == 2


@pytest.mark.parametrize("text", [
    b'{"id":"p1","year":2011,"topics":[]}',
    b'{"id":"p1","year":"2011","topics":[],"references":[]}',
    b'{"id":"p1","year":2011,"topics":"t1","references":[]}',
    b'not json',
    b'[1, 2]',
])
def test_malformed_records(text):
    with pytest.raises(ParseError) as exc:
        parse_papers(b'{"id":"ok","year":1,"topics":[],"references":[]}\n' + text)
    assert exc.value.line == 2


def test_unknown_fields_ignored_and_order_kept():
    papers = parse_papers(b'{"id":"b","year":1,"topics":[],"references":["a"],"venue":"x"}\n'
                          b'{"id":"a","year":0,"topics":[],"references":[]}\n')
    assert [p.id for p in papers] == ["b", "a"]


def test_keywords_resolve_to_topics():
    nodes = topics_jsonl(diamond_nodes()).replace('"id": "u3", "level": 0,', '"id": "u3", "level": 0, "keywords": ["kw"],')
    h = parse_topic_hierarchy(nodes.encode())
    (p,) = parse_papers(b'{"id":"p","year":1,"topics":["u1"],"keywords":["kw","unmapped"],"references":[]}', h)
    assert p.topics == frozenset({"u1", "u3"})


def test_topic_parser_examples():
    h = parse_topic_hierarchy(topics_jsonl(diamond_nodes()).encode())
    assert h.ancestors("u2", 1) == {"u5": 0.5, "u6": 0.5}
    bad = (b'{"id":"r","level":3,"parents":[]}\n{"id":"s","level":3,"parents":[]}\n'
           b'{"id":"c","level":2,"parents":[{"id":"r","weight":0.5},{"id":"s","weight":0.6}]}\n')
    with pytest.raises(ParseError):
        parse_topic_hierarchy(bad)


@pytest.mark.parametrize("stamps, median", [([100], 100), ([100, 300, 200], 200), ([100, 200], 100)])
def test_median_reading_time(stamps, median):
    text = "".join(f'{{"paper_id":"p1","timestamp":{t}}}\n' for t in stamps)
    assert parse_readings(text.encode()).median_time["p1"] == median


def test_bad_timestamp_reports_line():
    with pytest.raises(ParseError) as exc:
        parse_readings(b'{"paper_id":"p","timestamp":5}\n{"paper_id":"p","timestamp":"x"}\n')
    assert exc.value.line == 2
    with pytest.raises(ParseError):
        parse_readings(b'{"paper_id":"p","timestamp":-3}\n')


def test_fractional_year_midpoint():
    ts = datetime(2008, 7, 2, 0, 0, tzinfo=timezone.utc).timestamp()
    assert fractional_year(ts) == pytest.approx(2008.5, abs=0.01)


def test_reading_years():
    log = parse_readings(b'{"paper_id":"a","timestamp":1230000000}\n{"paper_id":"b","timestamp":1300000000}\n')
    assert log.reading_year("a") == 2008
    assert log.read_in(2011) == {"b"}


def _cite(pid, year, refs):
    return PaperRecord(pid, year, frozenset(), tuple(refs))


def test_single_contributor_strict_before():
    idx = build_cocitation_index([_cite("k", 2005, ["i", "j"])])
    assert idx.count_till("i", "j", 2011) == 1
    assert idx.count_till("i", "j", 2005) == 0


def test_no_cocitation():
    idx = build_cocitation_index([_cite("k", 2005, ["i"]), _cite("m", 2006, ["j"])])
    assert idx.count_till("i", "j", 3000) == 0
    assert idx.count_till("zz", "i", 3000) == 0


def test_three_contributors():
    idx = build_cocitation_index([_cite("a", 2001, ["i", "j"]), _cite("b", 2003, ["i", "j"]),
                                  _cite("c", 2003, ["j", "i"])])
    assert idx.count_till("i", "j", 2004) == 3
    assert idx.count_till("i", "j", 2003) == 1
    assert idx.count_till("j", "i", 2003) == 1
    assert idx.total("i", "j") == 3
    assert list(idx.items()) == [("i", "j", [(2001, 1), (2003, 3)])]


def test_empty_index():
    idx = build_cocitation_index([])
    assert idx == CoCitationIndex.empty()
    assert idx.count_till("a", "b", 2000) == 0


def _brute_count(papers, i, j, t):
    return sum(1 for p in papers if p.publish_year < t and i in p.references and j in p.references)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_index_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    papers = random_corpus(rng, diamond_hierarchy(), 30, refs=(0, 6), n_years=6)
    idx = build_cocitation_index(papers)
    ids = [p.id for p in papers]
    for _ in range(40):
        i, j = rng.choice(ids, size=2, replace=False)
        t = int(rng.integers(1999, 2008))
        assert idx.count_till(i, j, t) == _brute_count(papers, i, j, t) == idx.count_till(j, i, t)
    # cumulative counts never decrease
    for _, _, series in idx.items():
        counts = [c for _, c in series]
        assert counts == sorted(counts)
    assert idx.grand_total() == sum(math.comb(len(set(p.references)), 2) for p in papers)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_index_is_order_independent(seed):
    rng = np.random.default_rng(seed)
    papers = random_corpus(rng, diamond_hierarchy(), 25)
    shuffled = [papers[int(n)] for n in rng.permutation(len(papers))]
    assert build_cocitation_index(papers) == build_cocitation_index(shuffled)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_vector_queries_match_scalar(seed):
    rng = np.random.default_rng(seed)
    papers = random_corpus(rng, diamond_hierarchy(), 30)
    idx = build_cocitation_index(papers)
    ids = [p.id for p in papers] + ["missing"]
    a = idx.index_of(ids)
    for t in (2000, 2004, 2012):
        many = idx.count_till_many(a[:, None], a[None, :], t)
        lookup = np.full(len(idx.ids), -1)
        lookup[a[a >= 0]] = np.flatnonzero(a >= 0)
        rows = idx.count_till_rows(a, lookup, len(ids), t)
        for (n, i), (m, j) in itertools.product(enumerate(ids), repeat=2):
            expect = 0 if i == j else idx.count_till(i, j, t)
            assert many[n, m] == expect == rows[n, m]


@pytest.mark.slow
def test_index_build_speed():
    rng = np.random.default_rng(0)
    n = 100_000
    years = rng.integers(1990, 2020, size=n)
    refs = rng.integers(0, n, size=(n, 20))
    papers = [PaperRecord(f"p{n:06d}", int(years[n]), frozenset(), tuple(f"p{r:06d}" for r in refs[n]))
              for n in range(n)]
    start = time.perf_counter()
    idx = build_cocitation_index(papers)
    elapsed = time.perf_counter() - start
    print(f"index build over {n} papers x 20 refs: {elapsed:.2f}s")
    assert elapsed < 10.0
    assert idx.grand_total() == sum(math.comb(len(set(p.references)), 2) for p in papers)


def test_reading_log_grouping():
    log = ReadingLog([])
    assert len(log) == 0 and log.paper_ids() == []
