from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

import atem
from atem.emergence import DetectionParams
from atem.evaluation import (
    PairRow,
    _aggregate,
    bootstrap_mean_difference,
    correlations,
    future_past_ratio,
    predictability,
    run_protocol,
)
from atem.synthetic import truth_topic_set


class TestPredictability:
    def test_all_future(self):
        assert predictability(0, 7) == 1.0

    def test_balanced(self):
        assert predictability(4, 4) == 0.0

    def test_future_leaning(self):
        assert predictability(3, 5) == 0.25

    def test_empty_pair_undefined(self):
        assert predictability(0, 0) is None

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            predictability(-1, 3)

    @given(p=st.integers(0, 100), f=st.integers(0, 100))
    def test_bounded_and_antisymmetric(self, p, f):
        if p + f == 0:
            assert predictability(p, f) is None
            return
        e = predictability(p, f)
        assert -1.0 <= e <= 1.0
        assert e == -predictability(f, p)


class TestFuturePastRatio:
    def test_balanced_is_one(self):
        assert future_past_ratio(0.0) == 1.0

    def test_worked_example(self):
        # e = 0.25 means 1.25/0.75 times more publications after than before
        assert future_past_ratio(0.25) == pytest.approx(1.25 / 0.75)
        assert future_past_ratio(0.25) == pytest.approx(5 / 3)

    def test_all_past_is_zero(self):
        assert future_past_ratio(-1.0) == 0.0

    def test_all_future_infinite(self):
        assert future_past_ratio(1.0) == math.inf

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            future_past_ratio(1.5)

    def test_identity_with_counts(self):
        for p in range(1, 101):
            for f in range(0, 101):
                e = predictability(p, f)
                ratio = future_past_ratio(e)
                assert abs(ratio - f / p) <= 1e-12 * max(1.0, f / p)


class TestCorrelations:
    def test_self_correlation_one(self):
        labels, m = correlations({"x": [1.0, 2.0, 3.0], "y": [2.0, 4.0, 9.0]})
        assert m[0][0] == 1.0 and m[1][1] == 1.0

    def test_linear_relation(self):
        labels, m = correlations({"x": [1.0, 2.0, 3.0, 4.0], "y": [2.0, 4.0, 6.0, 8.0]})
        assert m[0][1] == pytest.approx(1.0)

    def test_constant_column_null(self):
        labels, m = correlations({"x": [1.0, 2.0, 3.0], "c": [5.0, 5.0, 5.0]})
        assert m[0][1] is None and m[1][1] is None

    def test_pairwise_complete(self):
        labels, m = correlations({"x": [1.0, None, 2.0, 3.0, 4.0],
                                  "y": [2.0, 9.0, 4.0, 6.0, 8.0]})
        assert m[0][1] == pytest.approx(1.0)

    def test_symmetric(self, rng):
        cols = {k: list(rng.standard_normal(20)) for k in "abc"}
        _, m = correlations(cols)
        for i in range(3):
            for j in range(3):
                assert m[i][j] == m[j][i]


class TestBootstrap:
    def test_clear_separation_excludes_zero(self, rng):
        a = list(rng.normal(1.0, 0.1, 50))
        b = list(rng.normal(0.0, 0.1, 50))
        lo, hi, point = bootstrap_mean_difference(a, b, n_boot=500, seed=1)
        assert lo > 0 and point == pytest.approx(1.0, abs=0.1)

    def test_deterministic(self, rng):
        a, b = list(rng.normal(0, 1, 30)), list(rng.normal(0, 1, 30))
        assert bootstrap_mean_difference(a, b, seed=4) == bootstrap_mean_difference(a, b, seed=4)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            bootstrap_mean_difference([], [1.0])


def _rows():
    return [
        PairRow("a", "b", "N", 2, 0.1, past=1, future=3, emergence=0.5),
        PairRow("a", "c", "N", 2, 0.15, past=0, future=0, emergence=None),
        PairRow("a", "d", "C", 2, None, past=2, future=2, emergence=0.0),
        PairRow("b", "c", "C", 3, None, past=3, future=1, emergence=-0.5),
    ]


class TestAggregation:
    def test_undefined_pairs_excluded_from_means(self):
        corpus = _toy_corpus_for_agg()
        agg = _aggregate(_rows(), corpus, {}, ["a", "b"])
        assert agg["mean_emergence"]["N"] == 0.5
        assert agg["pairs_without_documents"]["N"] == 1
        assert agg["mean_emergence"]["C"] == pytest.approx(-0.25)

    def test_order_invariant(self):
        corpus = _toy_corpus_for_agg()
        rows = _rows()
        a1 = _aggregate(rows, corpus, {}, ["a"])
        a2 = _aggregate(list(reversed(rows)), corpus, {}, ["a"])
        assert a1 == a2


def _toy_corpus_for_agg():
    from conftest import make_corpus

    return make_corpus({f"d{i}": 2000 + i for i in range(5)})


@pytest.fixture(scope="module")
def protocol_setup():
    corpus, truth = atem.generate_corpus(atem.default_spec(seed=21))
    evolving = atem.slice_topics(truth_topic_set(truth), corpus, min_docs=3)
    evolving = atem.represent_ctfidf(evolving, corpus)
    graph = atem.build_topic_citation_graph(evolving, corpus)
    series = atem.train_dynamic_embeddings(
        graph, len(corpus.timeline),
        atem.WalkParams(dim=32, seed=23, half_life_periods=1.0))
    return corpus, evolving, graph, series


class TestProtocol:
    def test_neighbors_score_above_connected_baseline(self, protocol_setup):
        corpus, evolving, graph, series = protocol_setup
        report = run_protocol(corpus, evolving, graph, series, DetectionParams(),
                              sample_size=200, seed=5)
        means = report.aggregates["mean_emergence"]
        assert means["N"] is not None and means["C"] is not None
        assert means["N"] > means["C"]

    def test_fixed_seed_identical_bytes(self, protocol_setup):
        corpus, evolving, graph, series = protocol_setup
        r1 = run_protocol(corpus, evolving, graph, series, DetectionParams(), seed=5)
        r2 = run_protocol(corpus, evolving, graph, series, DetectionParams(), seed=5)
        assert r1.to_csv() == r2.to_csv()
        assert r1.aggregates_json() == r2.aggregates_json()
        assert r1.correlations_csv() == r2.correlations_csv()

    def test_oversized_sample_uses_all_topics(self, protocol_setup, caplog):
        corpus, evolving, graph, series = protocol_setup
        with caplog.at_level("WARNING"):
            report = run_protocol(corpus, evolving, graph, series, DetectionParams(),
                                  sample_size=10_000, seed=5)
        assert report.aggregates["sampled_topics"] == len(evolving)

    def test_csv_schema(self, protocol_setup):
        corpus, evolving, graph, series = protocol_setup
        report = run_protocol(corpus, evolving, graph, series, DetectionParams(), seed=5)
        header = report.to_csv().splitlines()[0]
        assert header == "pair_src,pair_dst,source,period,distance,past,future,emergence"

    def test_counts_per_period_present(self, protocol_setup):
        corpus, evolving, graph, series = protocol_setup
        report = run_protocol(corpus, evolving, graph, series, DetectionParams(), seed=5)
        for period, counts in report.counts_per_period.items():
            assert set(counts) == {"n", "c", "cn"}
            assert counts["cn"] <= min(counts["n"], counts["c"])
