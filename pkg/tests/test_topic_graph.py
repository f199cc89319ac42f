from __future__ import annotations

import numpy as np
import pytest

from atem.clustering import TopicSet
from atem.topic_graph import (
    TopicCitationGraph,
    build_topic_citation_graph,
    connected_pairs,
    read_topic_graph,
    slice_graph,
    write_topic_graph,
)
from atem.topics import slice_topics

from conftest import make_corpus
from oracles import brute_force_topic_graph


def sliced(corpus, *doc_sets, min_docs=1):
    ts = TopicSet(topics=[frozenset(s) for s in doc_sets],
                  ids=[f"T{i}" for i in range(len(doc_sets))])
    return slice_topics(ts, corpus, min_docs=min_docs)


class TestBuild:
    def test_single_citation_single_edge(self):
        corpus = make_corpus(
            {"x": 2002, "y": 2001}, [("x", "y")])
        topics = sliced(corpus, {"x"}, {"y"})
        graph = build_topic_citation_graph(topics, corpus)
        assert graph.edges == {("T0", "T1", 1): 1}

    def test_two_citations_same_target_topic_sum(self):
        # citations from the period-2 cluster into the target topic's period-0
        # and period-2 clusters produce one edge of weight 2
        corpus = make_corpus(
            {"s1": 2002, "s2": 2002, "old": 2000, "new": 2002},
            [("s1", "old"), ("s2", "new")])
        topics = sliced(corpus, {"s1", "s2"}, {"old", "new"})
        graph = build_topic_citation_graph(topics, corpus)
        assert graph.edges == {("T0", "T1", 2): 2}

    def test_later_target_no_edge_diagnostics(self):
        corpus = make_corpus({"x": 2001, "y": 2003}, [("x", "y")])
        topics = sliced(corpus, {"x"}, {"y"})
        graph = build_topic_citation_graph(topics, corpus)
        assert graph.edges == {}
        assert graph.diagnostics.acausal == 1

    def test_unassigned_endpoint_diagnostics(self):
        corpus = make_corpus({"x": 2001, "y": 2000, "z": 2000},
                             [("x", "y"), ("x", "z")])
        topics = sliced(corpus, {"x"}, {"y"})  # z is in no topic
        graph = build_topic_citation_graph(topics, corpus)
        assert graph.diagnostics.unassigned == 1
        assert graph.edges == {("T0", "T1", 1): 1}

    def test_self_loops_retained(self):
        corpus = make_corpus({"a": 2001, "b": 2000}, [("a", "b")])
        topics = sliced(corpus, {"a", "b"})
        graph = build_topic_citation_graph(topics, corpus)
        assert graph.edges == {("T0", "T0", 1): 1}

    def test_weight_plus_diagnostics_balance(self, rng):
        corpus, topics = _random_instance(rng, overlap=False)
        graph = build_topic_citation_graph(topics, corpus)
        in_topics = 0
        member = {d for t in topics for docs in t.per_period_docs for d in docs}
        for e in corpus.citations:
            if e.src in member and e.dst in member:
                in_topics += 1
        assert graph.total_weight() + graph.diagnostics.acausal == in_topics


def _random_instance(rng, overlap: bool):
    n_docs = int(rng.integers(10, 50))
    years = {f"d{i}": int(rng.integers(2000, 2004)) for i in range(n_docs)}
    window, over = (2, 1) if overlap else (1, 0)
    n_topics = int(rng.integers(2, 6))
    doc_ids = list(years)
    doc_sets = [set() for _ in range(n_topics)]
    for d in doc_ids:
        if overlap and rng.random() < 0.2:
            for t in rng.choice(n_topics, size=2, replace=False):
                doc_sets[t].add(d)
        elif rng.random() < 0.9:
            doc_sets[int(rng.integers(0, n_topics))].add(d)
    pairs = set()
    for _ in range(int(rng.integers(5, 60))):
        a, b = rng.choice(n_docs, size=2, replace=False)
        pairs.add((f"d{a}", f"d{b}"))
    corpus = make_corpus(years, sorted(pairs), window_years=window, overlap_years=over)
    topics = sliced(corpus, *[s for s in doc_sets if s])
    return corpus, topics


class TestOracleEquivalence:
    @pytest.mark.parametrize("case", range(10))
    def test_matches_brute_force(self, case):
        rng = np.random.default_rng(1000 + case)
        corpus, topics = _random_instance(rng, overlap=bool(case % 2))
        graph = build_topic_citation_graph(topics, corpus)
        assert graph.edges == brute_force_topic_graph(topics, corpus)


class TestSlice:
    def _graph(self):
        return TopicCitationGraph(
            nodes=["a", "b"],
            edges={("a", "b", 1): 2, ("a", "b", 2): 3, ("b", "a", 3): 1},
            n_periods=5,
        )

    def test_cumulative_includes_earlier(self):
        sl = slice_graph(self._graph(), 2, cumulative=True)
        assert sl.edges == {("a", "b"): 5}

    def test_exact_period_only(self):
        g = TopicCitationGraph(nodes=["a", "b"],
                               edges={("a", "b", 1): 2, ("b", "a", 3): 1}, n_periods=5)
        assert slice_graph(g, 2, cumulative=False).edges == {}

    def test_weights_summed(self):
        sl = slice_graph(self._graph(), 3, cumulative=True)
        assert sl.edges == {("a", "b"): 5, ("b", "a"): 1}

    def test_period_bounds(self):
        with pytest.raises(ValueError):
            slice_graph(self._graph(), 7, cumulative=True)


class TestConnectedPairs:
    def _path_graph(self):
        names = ["a", "b", "c", "d", "e"]
        edges = {(names[i], names[i + 1], 0): 1 for i in range(4)}
        return TopicCitationGraph(nodes=names, edges=edges, n_periods=2)

    def test_three_hop_reachability(self):
        got = connected_pairs(self._path_graph(), "a", 1, max_len=3, count=10, seed=0)
        assert sorted(got) == ["b", "c", "d"]

    def test_fewer_available_than_requested(self):
        g = TopicCitationGraph(nodes=["a", "b", "c"],
                               edges={("a", "b", 0): 1, ("b", "c", 0): 1}, n_periods=1)
        got = connected_pairs(g, "a", 0, max_len=1, count=10, seed=0)
        assert got == ["b"]

    def test_seeded_determinism(self):
        g = self._path_graph()
        s1 = connected_pairs(g, "a", 1, max_len=3, count=2, seed=9)
        s2 = connected_pairs(g, "a", 1, max_len=3, count=2, seed=9)
        assert s1 == s2

    def test_isolated_topic_empty(self):
        g = TopicCitationGraph(nodes=["a", "b", "lone"],
                               edges={("a", "b", 0): 1}, n_periods=1)
        assert connected_pairs(g, "lone", 0) == []


class TestPersistence:
    def test_roundtrip(self, tmp_path):
        g = TopicCitationGraph(nodes=["a", "b"],
                               edges={("a", "b", 1): 2, ("b", "a", 3): 1}, n_periods=5)
        path = tmp_path / "graph.csv"
        write_topic_graph(g, path)
        loaded = read_topic_graph(path, n_periods=5)
        assert loaded.edges == g.edges
