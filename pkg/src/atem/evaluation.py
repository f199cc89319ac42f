"""Emergence predictability and the neighbor-vs-connected comparison protocol.

For a detected pair, predictability scores how the pair's shared documents
split around the emergence period: +1 when everything is published at the
emergence period or later, -1 when everything predates it. The protocol
samples evolving topics, builds two candidate sets per topic and period --
new embedding neighbors (N) and a seeded random sample of citation-connected
topics (C) -- scores every resulting pair, and aggregates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .emergence import DetectionParams, detect_new_neighbors, form_emerging_pair
from .topic_graph import connected_pairs
from .util import canonical_json, stable_seed

log = logging.getLogger(__name__)


def predictability(past: int, future: int) -> float | None:
    """(future - past) / (future + past); None when the pair has no documents."""
    if past < 0 or future < 0:
        raise ValueError("document counts must be non-negative")
    total = past + future
    if total == 0:
        return None
    return (future - past) / total


def future_past_ratio(e: float) -> float:
    """Publications-after over publications-before implied by a predictability
    score: (e + 1) / (1 - e). Infinite when everything is in the future."""
    if not (-1.0 <= e <= 1.0):
        raise ValueError(f"predictability must be in [-1, 1], got {e}")
    if e == 1.0:
        return math.inf
    return (e + 1.0) / (1.0 - e)


@dataclass
class PairRow:
    pair_src: str
    pair_dst: str
    source: str  # "N" (new embedding neighbor) or "C" (citation-connected baseline)
    period: int
    distance: float | None
    past: int
    future: int
    emergence: float | None

    @property
    def cluster_size(self) -> int:
        return self.past + self.future


@dataclass
class EvaluationReport:
    rows: list[PairRow]
    aggregates: dict
    correlation_labels: list[str]
    correlation_matrix: list[list[float | None]]
    counts_per_period: dict[int, dict[str, int]] = field(default_factory=dict)

    def to_csv(self) -> str:
        out = ["pair_src,pair_dst,source,period,distance,past,future,emergence"]
        for r in self.rows:
            dist = "" if r.distance is None else repr(float(r.distance))
            em = "" if r.emergence is None else repr(float(r.emergence))
            out.append(f"{r.pair_src},{r.pair_dst},{r.source},{r.period},{dist},{r.past},{r.future},{em}")
        return "\n".join(out) + "\n"

    def correlations_csv(self) -> str:
        out = ["," + ",".join(self.correlation_labels)]
        for label, row in zip(self.correlation_labels, self.correlation_matrix):
            cells = ["" if v is None else repr(float(v)) for v in row]
            out.append(label + "," + ",".join(cells))
        return "\n".join(out) + "\n"

    def aggregates_json(self) -> str:
        return canonical_json(self.aggregates)


def correlations(columns: dict[str, list[float | None]]) -> tuple[list[str], list[list[float | None]]]:
    """Pairwise-complete Pearson matrix; zero-variance columns yield None."""
    labels = list(columns)
    k = len(labels)
    matrix: list[list[float | None]] = [[None] * k for _ in range(k)]
    for i in range(k):
        for j in range(i, k):
            xs, ys = [], []
            for a, b in zip(columns[labels[i]], columns[labels[j]]):
                if a is not None and b is not None:
                    xs.append(float(a))
                    ys.append(float(b))
            val: float | None = None
            if len(xs) >= 3:
                x, y = np.asarray(xs), np.asarray(ys)
                sx, sy = x.std(), y.std()
                if sx > 0 and sy > 0:
                    val = float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy))
                    if i == j:
                        val = 1.0
            matrix[i][j] = matrix[j][i] = val
    return labels, matrix


def bootstrap_mean_difference(a: list[float], b: list[float], n_boot: int = 2000,
                              ci: float = 0.9, seed: int = 0) -> tuple[float, float, float]:
    """Seeded bootstrap CI for mean(a) - mean(b); returns (low, high, point)."""
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    rng = np.random.default_rng(seed)
    a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    point = float(a_arr.mean() - b_arr.mean())
    diffs = np.empty(n_boot)
    for i in range(n_boot):
        diffs[i] = (a_arr[rng.integers(0, len(a_arr), len(a_arr))].mean()
                    - b_arr[rng.integers(0, len(b_arr), len(b_arr))].mean())
    alpha = (1.0 - ci) / 2.0
    lo, hi = np.quantile(diffs, [alpha, 1.0 - alpha])
    return float(lo), float(hi), point


def run_protocol(corpus, evolving_topics, graph, series,
                 detection: DetectionParams | None = None,
                 sample_size: int = 200, count: int = 10, max_len: int = 3,
                 seed: int = 0) -> EvaluationReport:
    """Score new-neighbor pairs against citation-connected baseline pairs.

    For every sampled topic and period, the N set comes from new-nearest-
    neighbor detection and the C set is a seeded random sample of topics
    within max_len citation hops. Every pair is merged and scored; pairs
    with no shared documents keep a null score and are counted separately.
    """
    detection = detection or DetectionParams()
    topic_map = {t.topic_id: t for t in evolving_topics}
    ids = sorted(topic_map)
    rng = np.random.default_rng(stable_seed(seed, "protocol-sample"))
    if sample_size >= len(ids):
        if sample_size > len(ids):
            log.warning("sample_size %d exceeds %d available topics; using all",
                        sample_size, len(ids))
        sampled = ids
    else:
        picked = rng.choice(len(ids), size=sample_size, replace=False)
        sampled = [ids[i] for i in sorted(picked)]

    n_periods = series.n_periods()
    rows: list[PairRow] = []
    counts_per_period = {i: {"n": 0, "c": 0, "cn": 0} for i in range(n_periods)}
    cache: dict = {}
    for topic in sampled:
        for period in range(n_periods):
            result = detect_new_neighbors(series, topic, period, detection, _cache=cache)
            n_partners = {tx: d for tx, d in result.neighbors}
            c_partners = [tx for tx in connected_pairs(graph, topic, period, max_len, count,
                                                       seed=stable_seed(seed, "baseline"))
                          if tx != topic and tx in topic_map]
            counts_per_period[period]["n"] += len(n_partners)
            counts_per_period[period]["c"] += len(c_partners)
            counts_per_period[period]["cn"] += len(set(n_partners) & set(c_partners))
            for tx, dist in sorted(n_partners.items()):
                if tx not in topic_map:
                    continue
                rows.append(_score_pair(topic, tx, "N", period, dist, topic_map, corpus))
            for tx in c_partners:
                dist = _safe_distance(series, topic, tx, period, detection.min_norm)
                rows.append(_score_pair(topic, tx, "C", period, dist, topic_map, corpus))

    aggregates = _aggregate(rows, corpus, counts_per_period, sampled)
    col_labels, matrix = correlations(_correlation_columns(rows, corpus))
    return EvaluationReport(
        rows=rows,
        aggregates=aggregates,
        correlation_labels=col_labels,
        correlation_matrix=matrix,
        counts_per_period=counts_per_period,
    )


def _safe_distance(series, a, b, period, min_norm) -> float | None:
    na, nb = series.norm(a, period), series.norm(b, period)
    if na is None or nb is None or na < min_norm or nb < min_norm:
        return None
    return series.distance(a, b, period)


def _score_pair(t, tx, source, period, dist, topic_map, corpus) -> PairRow:
    pair = form_emerging_pair(t, tx, period, topic_map, corpus, distance=dist)
    return PairRow(
        pair_src=t,
        pair_dst=tx,
        source=source,
        period=period,
        distance=dist,
        past=pair.past_count,
        future=pair.future_count,
        emergence=predictability(pair.past_count, pair.future_count),
    )


def _mean(values: list[float]) -> float | None:
    return float(np.mean(values)) if values else None


def _aggregate(rows, corpus, counts_per_period, sampled) -> dict:
    by_source: dict[str, list[float]] = {"N": [], "C": []}
    by_year: dict[str, dict[int, list[float]]] = {"N": {}, "C": {}}
    undefined = {"N": 0, "C": 0}
    for r in rows:
        if r.emergence is None:
            undefined[r.source] += 1
            continue
        by_source[r.source].append(r.emergence)
        year = corpus.timeline.periods[r.period].start_year
        by_year[r.source].setdefault(year, []).append(r.emergence)

    def quartiles(vals):
        if not vals:
            return None
        q = np.quantile(vals, [0.25, 0.5, 0.75])
        return [float(x) for x in q]

    return {
        "sampled_topics": len(sampled),
        "pairs": {s: sum(1 for r in rows if r.source == s) for s in ("N", "C")},
        "pairs_with_documents": {s: len(by_source[s]) for s in ("N", "C")},
        "pairs_without_documents": undefined,
        "mean_emergence": {s: _mean(by_source[s]) for s in ("N", "C")},
        "emergence_quartiles": {s: quartiles(by_source[s]) for s in ("N", "C")},
        "mean_emergence_by_year": {
            s: {str(y): _mean(v) for y, v in sorted(by_year[s].items())} for s in ("N", "C")
        },
        "counts_per_period": {str(p): c for p, c in sorted(counts_per_period.items())},
    }


def _correlation_columns(rows, corpus) -> dict[str, list[float | None]]:
    years, dists, emergences, sizes = [], [], [], []
    for r in rows:
        years.append(float(corpus.timeline.periods[r.period].start_year))
        dists.append(r.distance)
        emergences.append(r.emergence)
        sizes.append(float(r.cluster_size))
    return {"year": years, "distance": dists, "emergence": emergences, "cluster_size": sizes}
