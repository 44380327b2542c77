import json

import pytest

from scicreativity.corpus import errors_only, validate_corpus
from scicreativity.ingest import parse_papers, parse_readings, parse_topic_hierarchy
from scicreativity.synthetic import generate, main


@pytest.fixture(scope="module")
def syn():
    return generate(n_papers=600, n_readings=2000, n_targets=5, seed=3)


def test_sizes_and_validity(syn):
    assert len(syn.papers) == 600 and len(syn.readings) == 2000
    assert errors_only(validate_corpus(syn.papers, syn.hierarchy())) == []
    assert len(syn.targets) == len(syn.bridges) == 5


def test_references_point_backwards(syn):
    c = syn.corpus()
    for p in syn.papers:
        for r in p.references:
            assert c[r].publish_year < p.publish_year


def test_regular_papers_stay_in_discipline(syn):
    h, c = syn.hierarchy(), syn.corpus()
    for p in syn.papers:
        if p.id.startswith("P") and p.references:
            d = h.discipline_of(p.topics)
            assert all(h.discipline_of(c[r].topics) == d for r in p.references)


def test_bridges_are_read_and_carry_both_topics(syn):
    c = syn.corpus()
    read = {ev.paper_id for ev in syn.readings}
    for k, b in zip(syn.targets, syn.bridges):
        assert b in read
        i, j = c[k].references
        assert c[i].topics | c[j].topics == c[b].topics


def test_deterministic():
    a = generate(n_papers=200, n_readings=300, n_targets=2, seed=1)
    b = generate(n_papers=200, n_readings=300, n_targets=2, seed=1)
    assert a.papers == b.papers and a.readings == b.readings


def test_main_writes_parsable_files(tmp_path):
    main([str(tmp_path), "--papers", "150", "--readings", "200", "--targets", "2"])
    h = parse_topic_hierarchy((tmp_path / "topics.jsonl").read_bytes())
    papers = parse_papers((tmp_path / "papers.jsonl").read_bytes(), h)
    assert len(papers) == 150
    log = parse_readings((tmp_path / "readings.jsonl").read_bytes())
    assert sum(len(ts) for ts in log.events.values()) == 200
    assert len(json.loads((tmp_path / "planted.json").read_text())["bridges"]) == 2
