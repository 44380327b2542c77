import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from factories import World, diamond_hierarchy
from scicreativity.corpus import Corpus, PaperRecord
from scicreativity.dependency import (citation_counts, cited_by_year, impact_correlation, paper_level_dependency,
                                      pearson, topic_level_dependency)
from scicreativity.decomposition import DecompositionResult


def test_overlap_examples():
    assert paper_level_dependency({"a", "b"}, {"b", "c", "d"}) == 0.5
    assert paper_level_dependency({"a"}, {"a", "b", "c"}) == 1.0
    assert paper_level_dependency({"a"}, {"b"}) == 0.0
    with pytest.raises(ValueError):
        paper_level_dependency(set(), {"a"})


@settings(max_examples=200)
@given(st.sets(st.integers(0, 30), min_size=1), st.sets(st.integers(0, 30), min_size=1))
def test_overlap_bounds_and_symmetry(a, b):
    v = paper_level_dependency(a, b)
    assert 0.0 <= v <= 1.0 and v == paper_level_dependency(b, a)
    assert (v == 1.0) == (a <= b or b <= a)


def test_topic_level_worked_value():
    h = diamond_hierarchy()
    pub = [PaperRecord("p", 2011, frozenset({"u2"}), ())]
    read = [PaperRecord("q", 2010, frozenset({"u4"}), ()), PaperRecord("e", 2010, frozenset(), ())]
    assert topic_level_dependency(pub, read, h) == pytest.approx(0.72, abs=1e-12)
    with pytest.raises(ValueError):
        topic_level_dependency(pub, read[1:], h)


def test_topic_level_bulk_matches_pairwise():
    w = World(9, n_papers=40)
    pub = [p for p in w.papers if p.publish_year == 2005]
    read = [w.corpus[x] for x in w.readings.paper_ids()]
    a = topic_level_dependency(pub, read, w.hierarchy)
    b = topic_level_dependency(pub, read, w.hierarchy, scorer=w.scorer)
    assert a == pytest.approx(b, abs=1e-12)


def test_pearson():
    assert pearson([1, 2, 3, 4], [2, 4, 6, 8]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert pearson([1, 1, 1], [1, 2, 3]) is None
    with pytest.raises(ValueError):
        pearson([1, 2], [1])


def test_pearson_agrees_with_numpy():
    rng = np.random.default_rng(1)
    x, y = rng.random(50), rng.random(50)
    assert pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)


def test_citation_counts_and_cited_sets():
    papers = [PaperRecord("a", 2000, frozenset(), ()), PaperRecord("b", 2001, frozenset(), ("a", "a", "x")),
              PaperRecord("c", 2001, frozenset(), ("a", "b"))]
    c = Corpus(papers)
    assert citation_counts(c) == {"a": 2, "b": 1, "c": 0}
    assert cited_by_year(c, 2001) == {"a", "b", "x"}


def _res(pid, psi, chi, flag=""):
    return DecompositionResult(pid, psi + chi, psi, chi, [], flag)


def test_impact_correlation():
    res = [_res("a", 0.1, 0.5), _res("b", 0.2, 0.4), _res("c", 0.3, 0.3), _res("d", 0.9, 0.0, "x")]
    corr = impact_correlation(res, {"a": 1, "b": 2, "c": 3, "d": 100})
    assert corr.n == 3
    assert corr.preparation == pytest.approx(1.0) and corr.inspiration == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        impact_correlation(res[:2], {"a": 1, "b": 2})
