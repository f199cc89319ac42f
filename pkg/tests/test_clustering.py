from __future__ import annotations

import numpy as np
from hypothesis import given, strategies as st
import pytest

from atem.clustering import (
    NOISE,
    ClusterAssignment,
    CommunityParams,
    DensityParams,
    UndirectedGraph,
    aggregate,
    build_citation_graph,
    density_cluster,
    detect_communities,
    modularity,
    principal_component_variances,
    reduce_dimensions,
)

from conftest import make_corpus
from oracles import adjusted_rand_index, modularity_by_definition, singleton_noise


def blobs(rng, centers, n_per=100, sigma=1.0):
    vectors, labels = {}, {}
    k = 0
    for ci, c in enumerate(centers):
        pts = rng.normal(loc=c, scale=sigma, size=(n_per, len(c)))
        for p in pts:
            vectors[f"p{k}"] = p
            labels[f"p{k}"] = ci
            k += 1
    return vectors, labels


class TestReduce:
    def test_identity_passthrough(self, rng):
        vectors = {f"d{i}": rng.standard_normal(6) for i in range(10)}
        out = reduce_dimensions(vectors, 6, method="identity")
        for k in vectors:
            assert np.array_equal(out[k], vectors[k])

    def test_rank_one_line_recovered(self, rng):
        xs = rng.standard_normal(40)
        vectors = {f"d{i}": np.array([x, 2 * x]) for i, x in enumerate(xs)}
        reduced = reduce_dimensions(vectors, 1, method="pca")
        total_var = np.var([v for v in xs]) * 5  # var(x) + var(2x)
        reduced_var = np.var([reduced[k][0] for k in vectors])
        assert abs(total_var - reduced_var) < 1e-6 * total_var

    def test_component_variances_non_increasing(self, rng):
        vectors = {f"d{i}": rng.standard_normal(8) for i in range(60)}
        variances = principal_component_variances(vectors)
        assert all(variances[i] >= variances[i + 1] - 1e-12 for i in range(len(variances) - 1))

    def test_distance_ordering_preserved_on_low_rank_data(self, rng):
        basis = rng.standard_normal((2, 7))
        coords = rng.standard_normal((25, 2))
        vectors = {f"d{i}": coords[i] @ basis for i in range(25)}
        reduced = reduce_dimensions(vectors, 2, method="pca")
        ids = sorted(vectors)
        orig, red = [], []
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                orig.append(np.linalg.norm(vectors[a] - vectors[b]))
                red.append(np.linalg.norm(reduced[a] - reduced[b]))
        assert np.argsort(orig).tolist() == np.argsort(red).tolist()

    def test_bad_target_dim(self, rng):
        vectors = {"a": rng.standard_normal(4)}
        with pytest.raises(ValueError):
            reduce_dimensions(vectors, 0)
        with pytest.raises(ValueError):
            reduce_dimensions(vectors, 9)


class TestDensityCluster:
    def test_three_well_separated_blobs(self, rng):
        vectors, truth = blobs(rng, [(0, 0), (10, 0), (0, 10)], n_per=100)
        got = density_cluster(vectors, DensityParams(eps_quantile=0.95))
        assert got.cluster_count == 3
        ari = adjusted_rand_index(singleton_noise(got.labels), truth)
        assert ari >= 0.95

    def test_uniform_noise_mostly_unclustered(self):
        rng = np.random.default_rng(99)
        vectors = {f"p{i}": rng.uniform(0, 1, size=2) for i in range(100)}
        got = density_cluster(vectors, DensityParams(min_cluster_size=50))
        assert got.cluster_count <= 1

    def test_duplicated_points_single_cluster(self):
        vectors = {f"p{i}": np.array([1.0, 2.0]) for i in range(20)}
        got = density_cluster(vectors, DensityParams(min_cluster_size=5))
        assert got.cluster_count == 1
        assert all(v == 0 for v in got.labels.values())

    def test_too_few_points_all_noise(self, rng):
        vectors = {f"p{i}": rng.standard_normal(2) for i in range(3)}
        got = density_cluster(vectors, DensityParams(min_cluster_size=5))
        assert got.cluster_count == 0
        assert all(v == NOISE for v in got.labels.values())

    def test_permutation_invariant_partition(self, rng):
        vectors, _ = blobs(rng, [(0, 0), (8, 8)], n_per=40)
        got1 = density_cluster(vectors, DensityParams())
        shuffled_ids = list(vectors)
        np.random.default_rng(1).shuffle(shuffled_ids)
        got2 = density_cluster({k: vectors[k] for k in shuffled_ids}, DensityParams())
        assert adjusted_rand_index(singleton_noise(got1.labels),
                                   singleton_noise(got2.labels)) == 1.0


def clique_corpus(sizes: list[int], bridges: list[tuple[str, str]]):
    """Cliques of documents connected by explicit bridge citations."""
    years, citations = {}, []
    for ci, size in enumerate(sizes):
        members = [f"c{ci}n{i}" for i in range(size)]
        for m in members:
            years[m] = 2000
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                citations.append((a, b))
    years.update({d: 2000 for pair in bridges for d in pair if d not in years})
    citations += bridges
    return make_corpus(years, citations)


class TestModularity:
    def test_singleton_partition_formula(self):
        corpus = clique_corpus([4, 4], [("c0n0", "c1n0")])
        g = build_citation_graph(corpus)
        labels = {v: i for i, v in enumerate(g.nodes())}
        m = g.total_weight()
        expected = -sum((g.degree(v) / (2 * m)) ** 2 for v in g.nodes())
        assert modularity(labels, g) == pytest.approx(expected)

    def test_two_disconnected_triangles(self):
        corpus = clique_corpus([3, 3], [])
        g = build_citation_graph(corpus)
        labels = {v: 0 if v.startswith("c0") else 1 for v in g.nodes()}
        assert modularity(labels, g) == pytest.approx(0.5)

    def test_all_in_one_partition_zero(self):
        corpus = clique_corpus([5], [])
        g = build_citation_graph(corpus)
        assert modularity({v: 0 for v in g.nodes()}, g) == pytest.approx(0.0)

    def test_matches_definition_oracle(self, rng):
        g = UndirectedGraph()
        nodes = [f"n{i}" for i in range(12)]
        edges = []
        for _ in range(30):
            a, b = rng.choice(12, size=2)
            g.add_edge(nodes[a], nodes[b], 1.0)
            edges.append((nodes[a], nodes[b], 1.0))
        for n in nodes:
            g.add_node(n)
        labels = {n: int(rng.integers(0, 3)) for n in nodes}
        assert modularity(labels, g) == pytest.approx(
            modularity_by_definition(labels, edges, nodes))


class TestCommunities:
    def test_two_cliques_with_bridge(self):
        corpus = clique_corpus([10, 10], [("c0n0", "c1n0")])
        got = detect_communities(corpus, CommunityParams(seed=1))
        assert got.cluster_count == 2
        blocks = {}
        for doc, lab in got.labels.items():
            blocks.setdefault(lab, set()).add(doc[:2])
        assert all(len(b) == 1 for b in blocks.values())

    def test_single_triangle(self):
        corpus = clique_corpus([3], [])
        got = detect_communities(corpus, CommunityParams(seed=1))
        assert got.cluster_count == 1

    def test_beats_random_partitions(self, rng):
        years = {f"d{i}": 2000 for i in range(24)}
        citations = [(f"d{int(a)}", f"d{int(b)}") for a, b in
                     rng.integers(0, 24, size=(60, 2)) if a != b]
        corpus = make_corpus(years, citations)
        g = build_citation_graph(corpus)
        got = detect_communities(corpus, CommunityParams(seed=3))
        q = modularity(got.labels, g)
        for s in range(20):
            rand = {v: int(x) for v, x in zip(sorted(g.nodes()),
                                              np.random.default_rng(s).integers(0, 2, 24))}
            assert q >= modularity(rand, g)

    def test_at_least_singleton_modularity(self, rng):
        years = {f"d{i}": 2000 for i in range(20)}
        citations = [(f"d{int(a)}", f"d{int(b)}") for a, b in
                     rng.integers(0, 20, size=(40, 2)) if a != b]
        corpus = make_corpus(years, citations)
        g = build_citation_graph(corpus)
        got = detect_communities(corpus, CommunityParams(seed=3))
        singleton = {v: i for i, v in enumerate(g.nodes())}
        assert modularity(got.labels, g) >= modularity(singleton, g)

    def test_empty_graph_singletons(self, caplog):
        corpus = make_corpus({"a": 2000, "b": 2001, "c": 2002})
        with caplog.at_level("WARNING"):
            got = detect_communities(corpus)
        assert got.cluster_count == 3

    def test_no_internally_disconnected_community(self, rng):
        years = {f"d{i}": 2000 for i in range(30)}
        citations = [(f"d{int(a)}", f"d{int(b)}") for a, b in
                     rng.integers(0, 30, size=(45, 2)) if a != b]
        corpus = make_corpus(years, citations)
        g = build_citation_graph(corpus)
        got = detect_communities(corpus, CommunityParams(seed=7))
        members: dict[int, set] = {}
        for v, c in got.labels.items():
            members.setdefault(c, set()).add(v)
        for community in members.values():
            start = next(iter(community))
            seen = {start}
            frontier = [start]
            while frontier:
                v = frontier.pop()
                for u in g.adj[v]:
                    if u in community and u not in seen:
                        seen.add(u)
                        frontier.append(u)
            assert seen == community

    def test_isolated_documents_allowed(self):
        corpus = make_corpus({"a": 2000, "b": 2001, "c": 2002, "lone": 2003},
                             [("a", "b"), ("b", "c"), ("a", "c")])
        got = detect_communities(corpus, CommunityParams(seed=1))
        assert "lone" in got.labels


class TestAggregate:
    def test_set_algebra_example(self):
        content = ClusterAssignment(labels={"a": 0, "b": 0, "c": 0, "d": 1}, cluster_count=2)
        communities = ClusterAssignment(labels={"a": 0, "b": 0, "c": 1, "d": 1}, cluster_count=2)
        ts = aggregate(content, communities)
        assert [set(t) for t in ts.topics] == [{"a", "b"}, {"c"}, {"d"}]
        assert ts.ids == ["T0C0", "T0C1", "T1C1"]

    def test_noise_docs_in_no_topic(self):
        content = ClusterAssignment(labels={"a": 0, "b": NOISE}, cluster_count=1)
        communities = ClusterAssignment(labels={"a": 0, "b": 0}, cluster_count=1)
        ts = aggregate(content, communities)
        assert all("b" not in t for t in ts.topics)

    def test_topic_count_bound(self, rng):
        docs = [f"d{i}" for i in range(40)]
        content = ClusterAssignment(
            labels={d: int(rng.integers(0, 4)) for d in docs}, cluster_count=4)
        communities = ClusterAssignment(
            labels={d: int(rng.integers(0, 3)) for d in docs}, cluster_count=3)
        ts = aggregate(content, communities)
        assert len(ts.topics) <= 12

    @given(st.lists(st.tuples(st.integers(-1, 3), st.integers(0, 2)), min_size=1, max_size=40))
    def test_partition_property(self, assignments):
        docs = [f"d{i}" for i in range(len(assignments))]
        content = ClusterAssignment(
            labels={d: a for d, (a, _) in zip(docs, assignments)}, cluster_count=4)
        communities = ClusterAssignment(
            labels={d: b for d, (_, b) in zip(docs, assignments)}, cluster_count=3)
        ts = aggregate(content, communities)
        non_noise = {d for d, (a, _) in zip(docs, assignments) if a != NOISE}
        covered: set = set()
        for t in ts.topics:
            assert t, "empty topic emitted"
            assert not (covered & t)
            covered |= t
        assert covered == non_noise

    def test_partition_of_non_noise(self, rng):
        docs = [f"d{i}" for i in range(30)]
        content = ClusterAssignment(
            labels={d: int(rng.integers(-1, 3)) for d in docs}, cluster_count=3)
        communities = ClusterAssignment(
            labels={d: int(rng.integers(0, 2)) for d in docs}, cluster_count=2)
        ts = aggregate(content, communities)
        non_noise = {d for d in docs if content.labels[d] != NOISE}
        covered: set = set()
        for t in ts.topics:
            assert not (covered & t), "topics overlap"
            covered |= t
        assert covered == non_noise
