"""Temporal topic-citation graph.

Document citations are projected into topic space: a directed edge
(src_topic, dst_topic, period j) exists when some document of src_topic's
period-j sub-cluster cites a document that dst_topic holds in any period
k <= j. The weight is the number of distinct document citations behind the
edge. Later-period targets never produce edges, so a slice at period i is
a pure function of citations up to i.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .util import stable_seed

log = logging.getLogger(__name__)


@dataclass
class GraphDiagnostics:
    unassigned: int = 0  # citations with an endpoint in no per-period sub-cluster
    acausal: int = 0     # citing sub-cluster precedes every cited sub-cluster


@dataclass
class TopicCitationGraph:
    nodes: list[str]
    edges: dict[tuple[str, str, int], int]
    n_periods: int
    diagnostics: GraphDiagnostics = field(default_factory=GraphDiagnostics)

    def total_weight(self) -> int:
        return sum(self.edges.values())


@dataclass
class GraphSlice:
    period: int
    cumulative: bool
    nodes: set[str]
    edges: dict[tuple[str, str], int]

    def neighbors(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {n: set() for n in self.nodes}
        for (a, b), _ in self.edges.items():
            adj[a].add(b)
            adj[b].add(a)
        return adj


def build_topic_citation_graph(evolving_topics, corpus) -> TopicCitationGraph:
    """Project document citations onto evolving topics, period by period.

    A citing document in several (overlapping) periods contributes one
    weight increment per period it occupies; a cited document appearing in
    several periods of the same topic counts once per citation. Self-loop
    topic edges are kept. Citations that touch no sub-cluster, or whose
    target only exists in later periods, go to the diagnostics tally.
    """
    if corpus.timeline is None:
        raise ValueError("corpus has no timeline; call build_timeline first")
    n_periods = len(corpus.timeline)

    citing: dict[str, list[tuple[str, int]]] = {}
    earliest: dict[str, dict[str, int]] = {}  # doc -> topic -> first period held
    for topic in evolving_topics:
        for period, docs in enumerate(topic.per_period_docs):
            for doc_id in docs:
                citing.setdefault(doc_id, []).append((topic.topic_id, period))
                first = earliest.setdefault(doc_id, {})
                if topic.topic_id not in first or period < first[topic.topic_id]:
                    first[topic.topic_id] = period

    edges: dict[tuple[str, str, int], int] = {}
    diag = GraphDiagnostics()
    for edge in corpus.citations:
        src_memb = citing.get(edge.src)
        dst_first = earliest.get(edge.dst)
        if not src_memb or not dst_first:
            diag.unassigned += 1
            continue
        for src_topic, j in src_memb:
            hit = False
            for dst_topic, k_min in dst_first.items():
                if k_min <= j:
                    key = (src_topic, dst_topic, j)
                    edges[key] = edges.get(key, 0) + 1
                    hit = True
            if not hit:
                diag.acausal += 1

    return TopicCitationGraph(
        nodes=[t.topic_id for t in evolving_topics],
        edges=edges,
        n_periods=n_periods,
        diagnostics=diag,
    )


def slice_graph(graph: TopicCitationGraph, period: int, cumulative: bool = False) -> GraphSlice:
    """Static weighted digraph at one period (or the union of all periods up
    to it, weights summed)."""
    if not (0 <= period < graph.n_periods):
        raise ValueError(f"period {period} outside [0, {graph.n_periods})")
    edges: dict[tuple[str, str], int] = {}
    for (src, dst, j), w in graph.edges.items():
        if (cumulative and j <= period) or (not cumulative and j == period):
            edges[(src, dst)] = edges.get((src, dst), 0) + w
    nodes = set()
    for (src, dst) in edges:
        nodes.add(src)
        nodes.add(dst)
    return GraphSlice(period=period, cumulative=cumulative, nodes=nodes, edges=edges)


def reachable_within(sl: GraphSlice, start: str, max_len: int) -> set[str]:
    """Topics reachable from start within max_len undirected hops, start excluded."""
    if start not in sl.nodes:
        return set()
    adj = sl.neighbors()
    seen = {start}
    frontier = {start}
    out: set[str] = set()
    for _ in range(max_len):
        nxt: set[str] = set()
        for v in frontier:
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    nxt.add(u)
        out |= nxt
        frontier = nxt
        if not frontier:
            break
    return out


def connected_pairs(graph: TopicCitationGraph, topic: str, period: int,
                    max_len: int = 3, count: int = 10, seed: int = 0) -> list[str]:
    """Seeded uniform sample (no replacement) of topics connected to `topic`
    by a citation path of at most max_len hops on the cumulative slice."""
    sl = slice_graph(graph, period, cumulative=True)
    candidates = sorted(reachable_within(sl, topic, max_len))
    if not candidates:
        return []
    rng = np.random.default_rng(stable_seed(seed, "connected", topic, period))
    take = min(count, len(candidates))
    picked = rng.choice(len(candidates), size=take, replace=False)
    return [candidates[i] for i in sorted(picked)]


# --- persistence -----------------------------------------------------------

def write_topic_graph(graph: TopicCitationGraph, path) -> None:
    from .util import atomic_write_text

    rows = ["src,dst,period,weight"]
    for (src, dst, period) in sorted(graph.edges):
        rows.append(f"{src},{dst},{period},{graph.edges[(src, dst, period)]}")
    atomic_write_text(path, "\n".join(rows) + "\n")


def read_topic_graph(path, n_periods: int | None = None) -> TopicCitationGraph:
    edges: dict[tuple[str, str, int], int] = {}
    nodes: set[str] = set()
    max_period = -1
    with open(path, "r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            src, dst = row["src"], row["dst"]
            period, weight = int(row["period"]), int(row["weight"])
            edges[(src, dst, period)] = weight
            nodes.add(src)
            nodes.add(dst)
            max_period = max(max_period, period)
    return TopicCitationGraph(
        nodes=sorted(nodes),
        edges=edges,
        n_periods=n_periods if n_periods is not None else max_period + 1,
    )
