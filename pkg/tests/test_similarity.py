import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from factories import diamond_hierarchy, random_hierarchy
from scicreativity.corpus import TopicHierarchy, TopicNode
from scicreativity.similarity import (UndefinedDisconnect, disconnect, level_similarity, similarity_trace,
                                      topic_pair_similarity)


@pytest.fixture(scope="module")
def diamond():
    return diamond_hierarchy()


def test_level_similarity_examples(diamond):
    assert level_similarity(diamond, "u1", "u1", 0) == 1.0
    assert level_similarity(diamond, "u2", "u4", 0) == 0.0
    assert level_similarity(diamond, "u2", "u4", 1) == pytest.approx(0.5)
    assert level_similarity(diamond, "u2", "u4", 2) == pytest.approx(1.0)


def test_worked_similarity(diamond):
    # 0 + 0.5 * 0.8 + (1 - 0.5) * 1 * 0.8 ** 2
    assert topic_pair_similarity(diamond, "u2", "u4", 0.8) == pytest.approx(0.72, abs=1e-12)
    assert disconnect(diamond, {"u2"}, {"u4"}, 0.8) == pytest.approx(0.28, abs=1e-12)


def test_trace_budgets(diamond):
    tr = similarity_trace(diamond, "u2", "u4", 0.8)
    assert tr.level_similarity == pytest.approx((0.0, 0.5, 1.0, 1.0))
    assert tr.budget == pytest.approx((1.0, 1.0, 0.5, 0.0))
    assert tr.total == pytest.approx(sum(tr.contribution))


def test_disjoint_subtrees():
    h = TopicHierarchy.from_nodes([TopicNode("A", 3, ()), TopicNode("B", 3, ()),
                                   TopicNode("a", 2, (("A", 1.0),)), TopicNode("b", 2, (("B", 1.0),))])
    assert topic_pair_similarity(h, "a", "b") == 0.0
    assert disconnect(h, {"a"}, {"b"}) == 1.0


def test_identical_sets(diamond):
    assert disconnect(diamond, {"u3"}, {"u3"}) == 0.0


def test_empty_topic_set(diamond):
    with pytest.raises(UndefinedDisconnect):
        disconnect(diamond, set(), {"u1"})


def test_cross_level_lift(diamond):
    # u2 lifted to level 1 is half u5 and half u6
    expect = 0.5 * topic_pair_similarity(diamond, "u5", "u6") + 0.5 * topic_pair_similarity(diamond, "u6", "u6")
    assert topic_pair_similarity(diamond, "u2", "u6") == pytest.approx(expect)
    assert topic_pair_similarity(diamond, "u2", "u10") == 1.0


def test_sigma_guard(diamond):
    with pytest.raises(ValueError):
        topic_pair_similarity(diamond, "u1", "u2", 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 1.0))
def test_similarity_properties(seed, sigma):
    rng = np.random.default_rng(seed)
    h = random_hierarchy(rng)
    topics = sorted(h.nodes)
    for u in topics:
        assert topic_pair_similarity(h, u, u, sigma) == 1.0
    for _ in range(30):
        u, v = rng.choice(topics, size=2)
        s = topic_pair_similarity(h, u, v, sigma)
        assert 0.0 <= s <= 1.0
        assert s == topic_pair_similarity(h, v, u, sigma)
    for _ in range(10):
        a = set(rng.choice(topics, size=int(rng.integers(1, 4))))
        b = set(rng.choice(topics, size=int(rng.integers(1, 4))))
        d = disconnect(h, a, b, sigma)
        assert 0.0 <= d <= 1.0
        assert d == disconnect(h, b, a, sigma)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.95), st.floats(0.0, 1.0))
def test_monotone_in_sigma(seed, lo, frac):
    rng = np.random.default_rng(seed)
    h = random_hierarchy(rng)
    hi = lo + (1.0 - lo) * frac
    level0 = [t for t in h.nodes if h.level(t) == 0]
    for _ in range(15):
        u, v = rng.choice(level0, size=2, replace=False)
        assert topic_pair_similarity(h, u, v, lo) <= topic_pair_similarity(h, u, v, hi) + 1e-15


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exhausted_budget_stops(seed):
    rng = np.random.default_rng(seed)
    h = random_hierarchy(rng)
    level0 = [t for t in h.nodes if h.level(t) == 0]
    u, v = rng.choice(level0, size=2, replace=False)
    tr = similarity_trace(h, u, v, 0.8)
    used = 0.0
    for s, budget, c in zip(tr.level_similarity, tr.budget, tr.contribution):
        if used >= 1.0:
            assert budget == 0.0 and c == 0.0
        used += s
