"""Emerging-topic detection over the embedding series.

Two detection modes:

* new-nearest-neighbor search: a pair (t, tx) emerges at period i when
  their embedding distance first drops to the threshold, having stayed
  above it in every earlier period where both were measurable;
* per-period clustering: density clusters of a snapshot's (normalized)
  vectors, each multi-topic cluster read as one emergent set.

Detected members are merged into an emerging topic: term representations
united per period, document clusters intersected per period, and the pooled
documents split into past/future around the emergence period.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .clustering import NOISE, DensityParams, density_cluster
from .graph_embedding import TopicEmbeddingSeries
from .topics import EvolvingTopic, TermVector

log = logging.getLogger(__name__)


@dataclass
class DetectionParams:
    k: int = 10
    max_distance: float = 0.2
    min_norm: float = 0.22
    mode: str = "knn"

    def validate(self) -> None:
        if not (0.0 < self.max_distance <= 2.0):
            raise ValueError(f"max_distance must be in (0, 2], got {self.max_distance}")
        if self.min_norm < 0:
            raise ValueError("min_norm must be >= 0")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.mode not in ("knn", "cluster"):
            raise ValueError(f"mode must be knn or cluster, got {self.mode!r}")


@dataclass
class DetectionResult:
    topic: str
    period: int
    neighbors: list[tuple[str, float]]
    reason: str | None = None  # set when empty: "absent" | "low_norm" | "no_candidates"


@dataclass
class EmergingTopic:
    members: tuple[str, ...]
    emergence_period: int
    distance_at_emergence: float | None
    rep: list[TermVector | None]
    docs: list[frozenset[str]]
    past_docs: frozenset[str]
    future_docs: frozenset[str]

    @property
    def past_count(self) -> int:
        return len(self.past_docs)

    @property
    def future_count(self) -> int:
        return len(self.future_docs)


class _SnapshotView:
    """Matrix view of one snapshot after the min-norm filter."""

    def __init__(self, series: TopicEmbeddingSeries, period: int, min_norm: float):
        snap = series.snapshots[period]
        self.ids = [t for t in sorted(snap) if series.norm(t, period) >= min_norm]
        if self.ids:
            self.X = np.stack([snap[t] for t in self.ids])
            norms = np.linalg.norm(self.X, axis=1)
            self.unit = self.X / norms[:, None]
        else:
            self.X = np.zeros((0, series.dim))
            self.unit = self.X
        self.pos = {t: i for i, t in enumerate(self.ids)}


def _snapshot_view(series, period, min_norm, cache: dict | None = None) -> _SnapshotView:
    if cache is None:
        return _SnapshotView(series, period, min_norm)
    key = (period, min_norm)
    if key not in cache:
        cache[key] = _SnapshotView(series, period, min_norm)
    return cache[key]


class CosineLSH:
    """Random-hyperplane index over one snapshot; an accelerator only.

    Query results are candidate pools; callers re-rank with exact distances.
    With the default table count the returned neighbor sets agree with exact
    search on the large majority of queries, and the exact path remains the
    reference.
    """

    def __init__(self, view: _SnapshotView, n_bits: int = 6, n_tables: int = 20, seed: int = 0):
        self.view = view
        rng = np.random.default_rng(seed)
        dim = view.unit.shape[1] if len(view.ids) else 1
        self.planes = rng.standard_normal((n_tables, dim, n_bits))
        self.tables: list[dict[int, list[int]]] = []
        powers = 1 << np.arange(n_bits)
        for t in range(n_tables):
            codes = (view.unit @ self.planes[t] > 0) @ powers
            buckets: dict[int, list[int]] = {}
            for i, code in enumerate(codes):
                buckets.setdefault(int(code), []).append(i)
            self.tables.append(buckets)
        self._powers = powers

    def candidates(self, vec: np.ndarray) -> list[int]:
        unit = vec / np.linalg.norm(vec)
        out: set[int] = set()
        for t, buckets in enumerate(self.tables):
            code = int((unit @ self.planes[t] > 0) @ self._powers)
            out.update(buckets.get(code, ()))
        return sorted(out)


def detect_new_neighbors(series: TopicEmbeddingSeries, topic: str, period: int,
                         params: DetectionParams | None = None,
                         index: CosineLSH | None = None,
                         _cache: dict | None = None) -> DetectionResult:
    """Up to k topics that first come within max_distance of `topic` at `period`.

    Candidates must pass the min-norm filter, sit at distance <= max_distance
    now, and have been farther than max_distance in every earlier period
    where both embeddings existed and passed the filter. Sorted by distance.
    An optional index narrows the candidate pool; exact search is the
    reference behavior.
    """
    params = params or DetectionParams()
    params.validate()
    snap = series.snapshots[period]
    if topic not in snap:
        return DetectionResult(topic, period, [], reason="absent")
    norm = series.norm(topic, period)
    if not (np.isfinite(norm) and norm >= params.min_norm):
        return DetectionResult(topic, period, [], reason="low_norm")

    view = _snapshot_view(series, period, params.min_norm, _cache)
    q = view.pos[topic]
    if index is not None:
        pool = [i for i in index.candidates(view.X[q]) if i != q]
    else:
        pool = [i for i in range(len(view.ids)) if i != q]
    if not pool:
        return DetectionResult(topic, period, [], reason="no_candidates")

    dists = 1.0 - view.unit[pool] @ view.unit[q]
    near = [(view.ids[i], float(max(0.0, d))) for i, d in zip(pool, dists) if d <= params.max_distance]

    fresh: list[tuple[str, float]] = []
    for tx, d in near:
        if _was_neighbor_before(series, topic, tx, period, params, _cache):
            continue
        fresh.append((tx, d))
    fresh.sort(key=lambda e: (e[1], e[0]))
    return DetectionResult(topic, period, fresh[:params.k],
                           reason=None if fresh else "no_candidates")


def _was_neighbor_before(series, a, b, period, params, cache) -> bool:
    for j in range(period):
        na, nb = series.norm(a, j), series.norm(b, j)
        if na is None or nb is None or na < params.min_norm or nb < params.min_norm:
            continue
        if series.distance(a, b, j) <= params.max_distance:
            return True
    return False


def cluster_period_embeddings(series: TopicEmbeddingSeries, period: int,
                              params: DetectionParams | None = None,
                              density: DensityParams | None = None) -> list[list[str]]:
    """Density-cluster one snapshot's unit vectors; emit multi-topic clusters.

    Vectors are L2-normalized first so Euclidean proximity tracks the cosine
    distance used everywhere else on embeddings. Because the density eps is
    a quantile (relative, not absolute), emitted clusters are additionally
    required to be tight in the detection sense: no two members farther than
    twice the max_distance threshold.
    """
    params = params or DetectionParams()
    view = _SnapshotView(series, period, params.min_norm)
    if not view.ids:
        return []
    if density is None:
        density = DensityParams(min_cluster_size=2, k_core=max(1, min(4, len(view.ids) // 3)))
    assignment = density_cluster({t: view.unit[i] for i, t in enumerate(view.ids)}, density)
    groups: dict[int, list[str]] = {}
    for topic, lab in assignment.labels.items():
        if lab != NOISE:
            groups.setdefault(lab, []).append(topic)
    out = []
    for lab, members in sorted(groups.items()):
        if len(members) < 2:
            continue
        unit = np.stack([view.unit[view.pos[t]] for t in members])
        diameter = float(np.max(1.0 - unit @ unit.T))
        if diameter <= 2.0 * params.max_distance:
            out.append(sorted(members))
    return out


def detect_emerging_sets(series: TopicEmbeddingSeries, params: DetectionParams | None = None,
                         density: DensityParams | None = None) -> list[tuple[tuple[str, ...], int]]:
    """Cluster-mode detection across all periods.

    Each distinct topic set is stamped with the first period it appears.
    """
    seen: dict[tuple[str, ...], int] = {}
    for period in range(series.n_periods()):
        for members in cluster_period_embeddings(series, period, params, density):
            key = tuple(members)
            if key not in seen:
                seen[key] = period
    return sorted(seen.items(), key=lambda kv: (kv[1], kv[0]))


def _merge_reps(reps: list[TermVector | None]) -> TermVector | None:
    merged: dict[str, float] = {}
    any_rep = False
    for rep in reps:
        if rep is None:
            continue
        any_rep = True
        for tok, w in rep.entries:
            merged[tok] = max(w, merged.get(tok, float("-inf")))
    if not any_rep:
        return None
    entries = sorted(merged.items(), key=lambda e: (-e[1], e[0]))
    return TermVector(entries=entries)


def form_emerging_topic(members: list[str], period: int,
                        evolving_topics: dict[str, EvolvingTopic], corpus,
                        distance: float | None = None) -> EmergingTopic:
    """Merge member topics into one emerging topic at `period`.

    Per period, representations are united (max weight on collisions) and
    document clusters intersected. Pooled documents published before the
    emergence period's first year are past; the rest, emergence period
    included, are future.
    """
    if len(set(members)) < 2:
        raise ValueError("an emerging topic needs at least two distinct members")
    topics = [evolving_topics[m] for m in members]
    n = len(topics[0].per_period_docs)
    rep: list[TermVector | None] = []
    docs: list[frozenset[str]] = []
    for j in range(n):
        rep.append(_merge_reps([t.per_period_rep[j] for t in topics]))
        inter = topics[0].per_period_docs[j]
        for t in topics[1:]:
            inter = inter & t.per_period_docs[j]
        docs.append(frozenset(inter))
    pooled: set[str] = set()
    for d in docs:
        pooled |= d
    start_year = corpus.timeline.periods[period].start_year
    past = frozenset(d for d in pooled if corpus.documents[d].year < start_year)
    future = frozenset(pooled - past)
    return EmergingTopic(
        members=tuple(sorted(set(members))),
        emergence_period=period,
        distance_at_emergence=distance,
        rep=rep,
        docs=docs,
        past_docs=past,
        future_docs=future,
    )


def form_emerging_pair(t: str, tx: str, period: int,
                       evolving_topics: dict[str, EvolvingTopic], corpus,
                       distance: float | None = None) -> EmergingTopic:
    if t == tx:
        raise ValueError("pair members must differ")
    return form_emerging_topic([t, tx], period, evolving_topics, corpus, distance)


# --- persistence -----------------------------------------------------------

def write_emerging(records: list[dict], path) -> None:
    from .util import atomic_write_text

    lines = [json.dumps(rec, sort_keys=True, ensure_ascii=False) for rec in records]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def emerging_record(pair: EmergingTopic, emergence: float | None,
                    rep_sample_size: int = 5) -> dict:
    rep_at = pair.rep[pair.emergence_period] if pair.emergence_period < len(pair.rep) else None
    sample = [t for t, _ in rep_at.entries[:rep_sample_size]] if rep_at else []
    t, tx = pair.members[0], pair.members[-1] if len(pair.members) > 1 else pair.members[0]
    return {
        "t": t,
        "tx": tx,
        "period": pair.emergence_period,
        "distance": pair.distance_at_emergence,
        "past_count": pair.past_count,
        "future_count": pair.future_count,
        "emergence": emergence,
        "rep_sample": sample,
    }
