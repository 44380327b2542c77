import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from factories import diamond_hierarchy, random_corpus, random_hierarchy
from scicreativity.corpus import (AnalysisConfig, Corpus, HierarchyError, PaperRecord, ReadingEvent,
                                  TopicHierarchy, TopicNode, errors_only, validate_corpus)
from scicreativity.aggregation import Aggregator


def test_hierarchy_accepts_root_alone():
    h = TopicHierarchy.from_nodes([TopicNode("d", 3, ())])
    assert h.level("d") == 3
    assert h.ancestors("d", 0) == {"d": 1.0}


def test_two_parent_weights_propagate():
    h = TopicHierarchy.from_nodes([
        TopicNode("d", 3, ()), TopicNode("c", 2, (("d", 1.0),)),
        TopicNode("b1", 1, (("c", 1.0),)), TopicNode("b2", 1, (("c", 1.0),)),
        TopicNode("a", 0, (("b1", 0.5), ("b2", 0.5))),
    ])
    assert h.ancestors("a", 1) == {"b1": 0.5, "b2": 0.5}
    assert h.ancestors("a", 2) == {"c": 1.0}
    assert h.ancestors("a", 3) == {"d": 1.0}


def test_path_product_sum_on_diamond():
    h = diamond_hierarchy()
    assert h.ancestors("u2", 2) == pytest.approx({"u8": 0.5, "u9": 0.5})
    assert h.ancestors("u2", 3) == pytest.approx({"u10": 1.0})


@pytest.mark.parametrize("nodes, message", [
    ([TopicNode("d", 3, ()), TopicNode("c", 2, (("d", 0.5), ("e", 0.6))), TopicNode("e", 3, ())], "sum"),
    ([TopicNode("d", 3, ()), TopicNode("a", 1, (("d", 1.0),))], "level"),
    ([TopicNode("c", 2, (("zz", 1.0),))], "unknown"),
    ([TopicNode("d", 3, (("e", 1.0),)), TopicNode("e", 3, ())], "level 3"),
    ([TopicNode("d", 4, ())], "level"),
])
def test_hierarchy_rejects(nodes, message):
    with pytest.raises(HierarchyError):
        TopicHierarchy.from_nodes(nodes)


def test_duplicate_topic_rejected():
    with pytest.raises(HierarchyError):
        TopicHierarchy.from_nodes([TopicNode("d", 3, ()), TopicNode("d", 3, ())])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_propagated_weights_sum_to_one(seed):
    h = random_hierarchy(np.random.default_rng(seed))
    for u in h.nodes:
        for off in range(3 - h.level(u) + 1):
            assert math.fsum(h.ancestors(u, off).values()) == pytest.approx(1.0, abs=1e-9)


def test_discipline_of_picks_heaviest_root():
    h = TopicHierarchy.from_nodes([
        TopicNode("A", 3, ()), TopicNode("B", 3, ()),
        TopicNode("a2", 2, (("A", 0.25), ("B", 0.75))), TopicNode("b2", 2, (("B", 1.0),)),
    ])
    assert h.discipline_of({"a2"}) == "B"
    tie = TopicHierarchy.from_nodes([TopicNode("A", 3, ()), TopicNode("B", 3, ()),
                                     TopicNode("x", 2, (("A", 0.5), ("B", 0.5)))])
    assert tie.discipline_of({"x"}) == "A"
    assert h.discipline_of(set()) is None


def test_reading_event_needs_positive_timestamp():
    with pytest.raises(ValueError):
        ReadingEvent("p", 0)


@pytest.mark.parametrize("kwargs", [dict(sigma=0.0), dict(sigma=1.5), dict(budget_rho=0),
                                    dict(decay_mode="sometimes")])
def test_config_guards(kwargs):
    with pytest.raises(ValueError):
        AnalysisConfig(**kwargs)


def test_percentile_range_guard():
    with pytest.raises(ValueError):
        Aggregator("percentile", 101.0)


def test_valid_single_paper_gives_empty_report():
    h = diamond_hierarchy()
    assert validate_corpus([PaperRecord("p1", 2011, frozenset({"u1"}), ())], h) == []


def test_self_citation_and_unknown_topic():
    h = diamond_hierarchy()
    report = validate_corpus([PaperRecord("p1", 2011, frozenset({"nope"}), ("p1",))], h)
    kinds = {v.kind for v in errors_only(report)}
    assert kinds == {"self-citation", "unknown topic"}


def test_dangling_reference_and_empty_topics_are_warnings():
    h = diamond_hierarchy()
    report = validate_corpus([PaperRecord("p1", 2011, frozenset(), ("elsewhere",))], h)
    assert {v.kind for v in report} == {"dangling reference", "empty topics"}
    assert errors_only(report) == []


def test_duplicate_ids_and_references():
    h = diamond_hierarchy()
    papers = [PaperRecord("p1", 2011, frozenset({"u1"}), ("p2", "p2")),
              PaperRecord("p1", 2012, frozenset({"u1"}), ()), PaperRecord("p2", 2010, frozenset({"u2"}), ())]
    kinds = [v.kind for v in validate_corpus(papers, h)]
    assert "duplicate id" in kinds and "duplicate reference" in kinds


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_validation_is_pure(seed):
    rng = np.random.default_rng(seed)
    h = random_hierarchy(rng)
    papers = random_corpus(rng, h, 30, empty_topic_rate=0.2)
    assert validate_corpus(papers, h) == validate_corpus(list(papers), h)


def test_corpus_lookup_and_years():
    c = Corpus([PaperRecord("b", 2001, frozenset({"u1"}), ()), PaperRecord("a", 2000, frozenset(), ())])
    assert c.ids() == ["b", "a"]  # input order
    assert c.resolvable("b") and not c.resolvable("a") and not c.resolvable("zz")
    assert c.years() == [2000, 2001]
    assert [p.id for p in c.published_in(2001)] == ["b"]
