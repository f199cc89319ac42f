"""Content clustering, citation communities, and their aggregation.

Three ways of splitting a corpus into document groups live here:

* density clustering of (reduced) content vectors, with a NOISE label for
  points in no dense region;
* modularity-based community detection on the undirected citation graph,
  with a refinement pass that splits internally disconnected communities;
* the aggregation that intersects content clusters with citation
  communities into topic clusters.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

NOISE = -1


@dataclass
class ClusterAssignment:
    labels: dict[str, int]
    cluster_count: int

    def members(self, cluster_id: int) -> list[str]:
        return [k for k, v in self.labels.items() if v == cluster_id]


@dataclass
class TopicSet:
    topics: list[frozenset[str]]
    ids: list[str]
    provenance: list[tuple[int, int]] = field(default_factory=list)


# --- dimensionality reduction ------------------------------------------------

def reduce_dimensions(vectors, target_dim: int, method: str = "pca") -> dict[str, np.ndarray]:
    """Project vectors to target_dim via centered PCA, or pass them through.

    Accepts an id -> vector map or anything with a .doc_vectors attribute.
    PCA keeps the top principal components, so component variances are
    non-increasing and rank-limited data is reproduced exactly.
    """
    if target_dim <= 0:
        raise ValueError(f"target_dim must be positive, got {target_dim}")
    if hasattr(vectors, "doc_vectors"):
        vectors = vectors.doc_vectors
    ids = list(vectors)
    X = np.stack([vectors[i] for i in ids]).astype(np.float64)
    if target_dim > X.shape[1]:
        raise ValueError(f"target_dim {target_dim} exceeds input dim {X.shape[1]}")
    if method == "identity":
        return {i: vectors[i].copy() for i in ids}
    if method != "pca":
        raise ValueError(f"unknown reduction method {method!r}")
    mean = X.mean(axis=0)
    Xc = X - mean
    _, _, vt = np.linalg.svd(Xc, full_matrices=False)
    reduced = Xc @ vt[:target_dim].T
    return {i: reduced[k] for k, i in enumerate(ids)}


def principal_component_variances(vectors: dict[str, np.ndarray]) -> np.ndarray:
    X = np.stack([vectors[i] for i in vectors]).astype(np.float64)
    Xc = X - X.mean(axis=0)
    _, s, _ = np.linalg.svd(Xc, full_matrices=False)
    return (s ** 2) / max(1, len(X) - 1)


# --- density clustering -------------------------------------------------------

@dataclass
class DensityParams:
    min_cluster_size: int = 5
    eps_quantile: float = 0.9
    k_core: int = 5


def _pairwise_distances(X: np.ndarray, chunk: int = 1024) -> np.ndarray:
    n = len(X)
    sq = np.einsum("ij,ij->i", X, X)
    D = np.empty((n, n))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * (X[lo:hi] @ X.T)
        np.maximum(d2, 0.0, out=d2)
        D[lo:hi] = np.sqrt(d2)
    np.fill_diagonal(D, 0.0)
    return D


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def density_cluster(vectors: dict[str, np.ndarray],
                    params: DensityParams | None = None) -> ClusterAssignment:
    """Density clustering via core distances and mutual reachability.

    Core distance of a point is the distance to its k_core-th nearest other
    point; eps is the eps_quantile of core distances. Clusters are connected
    components of core points at mutual-reachability <= eps, border points
    attach to their nearest core point within eps, everything else is NOISE,
    and clusters smaller than min_cluster_size are dissolved into NOISE.
    """
    params = params or DensityParams()
    ids = list(vectors)
    n = len(ids)
    if n == 0:
        return ClusterAssignment(labels={}, cluster_count=0)
    if n < params.min_cluster_size:
        log.warning("only %d points for min_cluster_size=%d; everything is noise",
                    n, params.min_cluster_size)
        return ClusterAssignment(labels={i: NOISE for i in ids}, cluster_count=0)

    X = np.stack([vectors[i] for i in ids]).astype(np.float64)
    D = _pairwise_distances(X)
    k = min(params.k_core, n - 1)
    core = np.sort(D, axis=1)[:, k]
    eps = float(np.quantile(core, params.eps_quantile))

    is_core = core <= eps
    core_idx = np.flatnonzero(is_core)
    uf = _UnionFind(n)
    # mutual reachability of two core points <= eps reduces to distance <= eps
    sub = D[np.ix_(core_idx, core_idx)] <= eps
    for a_pos, a in enumerate(core_idx):
        for b_pos in np.flatnonzero(sub[a_pos]):
            b = core_idx[b_pos]
            if b > a:
                uf.union(int(a), int(b))

    labels = np.full(n, NOISE, dtype=np.int64)
    for a in core_idx:
        labels[a] = uf.find(int(a))
    if len(core_idx):
        non_core = np.flatnonzero(~is_core)
        if len(non_core):
            dist_to_core = D[np.ix_(non_core, core_idx)]
            nearest = np.argmin(dist_to_core, axis=1)
            for row, p in enumerate(non_core):
                if dist_to_core[row, nearest[row]] <= eps:
                    labels[p] = labels[core_idx[nearest[row]]]

    # dissolve undersized clusters, then relabel densely by first appearance
    sizes: dict[int, int] = {}
    for lab in labels:
        if lab != NOISE:
            sizes[lab] = sizes.get(lab, 0) + 1
    keep = {lab for lab, s in sizes.items() if s >= params.min_cluster_size}
    remap: dict[int, int] = {}
    final = {}
    for pos, doc_id in enumerate(ids):
        lab = labels[pos]
        if lab in keep:
            if lab not in remap:
                remap[lab] = len(remap)
            final[doc_id] = remap[lab]
        else:
            final[doc_id] = NOISE
    if not remap:
        log.warning("density clustering found no cluster; all %d points are noise", n)
    return ClusterAssignment(labels=final, cluster_count=len(remap))


# --- citation communities ------------------------------------------------------

@dataclass
class CommunityParams:
    resolution: float = 1.0
    passes: int = 10
    seed: int = 0

    def validate(self) -> None:
        if self.passes < 1:
            raise ValueError("passes must be >= 1")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")


class UndirectedGraph:
    """Weighted undirected graph with self-loops, used by the community pass."""

    def __init__(self):
        self.adj: dict = {}

    def add_node(self, v) -> None:
        self.adj.setdefault(v, {})

    def add_edge(self, a, b, w: float = 1.0) -> None:
        self.add_node(a)
        self.add_node(b)
        if a == b:
            self.adj[a][a] = self.adj[a].get(a, 0.0) + w
        else:
            self.adj[a][b] = self.adj[a].get(b, 0.0) + w
            self.adj[b][a] = self.adj[b].get(a, 0.0) + w

    def degree(self, v) -> float:
        # self-loops count twice, as in the usual null model
        return sum(w for u, w in self.adj[v].items() if u != v) + 2.0 * self.adj[v].get(v, 0.0)

    def total_weight(self) -> float:
        m = 0.0
        for v, nbrs in self.adj.items():
            for u, w in nbrs.items():
                m += w if u == v else w / 2.0
        return m

    def nodes(self):
        return list(self.adj)


def build_citation_graph(corpus) -> UndirectedGraph:
    """Symmetrized citation graph; edge weight is the citation multiplicity."""
    g = UndirectedGraph()
    for doc_id in corpus.documents:
        g.add_node(doc_id)
    for edge in corpus.citations:
        g.add_edge(edge.src, edge.dst, float(edge.multiplicity))
    return g


def modularity(labels: dict, graph: UndirectedGraph, resolution: float = 1.0) -> float:
    """Newman modularity of a total partition, in [-0.5, 1]."""
    m = graph.total_weight()
    if m <= 0:
        return 0.0
    intra: dict = {}
    deg: dict = {}
    for v in graph.adj:
        c = labels[v]
        deg[c] = deg.get(c, 0.0) + graph.degree(v)
        for u, w in graph.adj[v].items():
            if labels.get(u) == c:
                intra[c] = intra.get(c, 0.0) + (w if u == v else w / 2.0)
    q = 0.0
    for c, d in deg.items():
        q += intra.get(c, 0.0) / m - resolution * (d / (2.0 * m)) ** 2
    return q


def _local_move(g: UndirectedGraph, labels: dict, m: float, resolution: float,
                rng: np.random.Generator) -> bool:
    """One round of greedy node moves; returns True if anything moved."""
    deg_tot: dict = {}
    sizes: dict = {}
    for v in g.adj:
        deg_tot[labels[v]] = deg_tot.get(labels[v], 0.0) + g.degree(v)
        sizes[labels[v]] = sizes.get(labels[v], 0) + 1
    nodes = sorted(g.adj, key=str)
    fresh = max(int(c) for c in deg_tot) + len(nodes) + 1
    improved = False
    for _ in range(50):  # safety bound; loop exits on a clean sweep
        moved = False
        order = list(rng.permutation(len(nodes)))
        for pos in order:
            v = nodes[pos]
            c_old = labels[v]
            k_v = g.degree(v)
            deg_tot[c_old] -= k_v
            sizes[c_old] -= 1
            # weight from v to each adjacent community (self-loops excluded)
            w_to: dict = {}
            for u, w in g.adj[v].items():
                if u != v:
                    w_to[labels[u]] = w_to.get(labels[u], 0.0) + w
            # candidates: old community, a fresh singleton (pointless when v
            # was already alone), and every neighbor community; gains are
            # relative to v standing isolated
            best_c = c_old
            best_gain = w_to.get(c_old, 0.0) / m - resolution * deg_tot.get(c_old, 0.0) * k_v / (2.0 * m * m)
            if sizes[c_old] > 0 and 0.0 > best_gain + 1e-12:
                best_c, best_gain = fresh, 0.0
            for c, w in sorted(w_to.items(), key=lambda kv: str(kv[0])):
                if c == c_old:
                    continue
                gain = w / m - resolution * deg_tot.get(c, 0.0) * k_v / (2.0 * m * m)
                if gain > best_gain + 1e-12:
                    best_c, best_gain = c, gain
            labels[v] = best_c
            deg_tot[best_c] = deg_tot.get(best_c, 0.0) + k_v
            sizes[best_c] = sizes.get(best_c, 0) + 1
            if best_c != c_old:
                moved = improved = True
                if best_c == fresh:
                    fresh += 1
        if not moved:
            break
    return improved


def _aggregate_graph(g: UndirectedGraph, labels: dict) -> tuple[UndirectedGraph, dict]:
    comms = sorted({labels[v] for v in g.adj}, key=str)
    cid = {c: i for i, c in enumerate(comms)}
    agg = UndirectedGraph()
    for i in range(len(comms)):
        agg.add_node(i)
    for v in g.adj:
        for u, w in g.adj[v].items():
            a, b = cid[labels[v]], cid[labels[u]]
            if u == v:
                agg.add_edge(a, a, w)
            elif str(u) > str(v):
                agg.add_edge(a, b, w)
    return agg, cid


def _split_disconnected(g: UndirectedGraph, labels: dict) -> dict:
    """Split every community into its connected components (refinement pass).

    Splitting a disconnected community always raises modularity: the intra
    weight is unchanged while the squared-degree penalty strictly drops.
    """
    members: dict = {}
    for v, c in labels.items():
        members.setdefault(c, []).append(v)
    out = {}
    next_label = 0
    for c in sorted(members, key=str):
        todo = set(members[c])
        while todo:
            start = min(todo, key=str)
            comp = {start}
            frontier = [start]
            while frontier:
                v = frontier.pop()
                for u in g.adj[v]:
                    if u in todo and u not in comp:
                        comp.add(u)
                        frontier.append(u)
            todo -= comp
            for v in comp:
                out[v] = next_label
            next_label += 1
    return out


def detect_communities(corpus, params: CommunityParams | None = None) -> ClusterAssignment:
    """Louvain-style modularity maximization over the symmetrized citation
    graph, followed by a split of internally disconnected communities.

    Every document gets a label (isolated documents become singletons). The
    result's modularity is never below the singleton partition's.
    """
    params = params or CommunityParams()
    params.validate()
    g0 = build_citation_graph(corpus)
    nodes = g0.nodes()
    if not any(g0.adj[v] for v in nodes):
        log.warning("citation graph has no edges; every document is its own community")
        return ClusterAssignment(labels={v: i for i, v in enumerate(nodes)},
                                 cluster_count=len(nodes))

    rng = np.random.default_rng(params.seed)
    m = g0.total_weight()
    labels = {v: i for i, v in enumerate(nodes)}
    g = g0
    mapping = {v: v for v in nodes}  # original node -> current super-node
    for _ in range(params.passes):
        level_labels = {v: i for i, v in enumerate(g.nodes())}
        improved = _local_move(g, level_labels, m, params.resolution, rng)
        # push down to original nodes
        for v in nodes:
            labels[v] = level_labels[mapping[v]]
        if not improved:
            break
        n_comms = len(set(level_labels.values()))
        if n_comms == len(g.nodes()):
            break
        g, cid = _aggregate_graph(g, level_labels)
        for v in nodes:
            mapping[v] = cid[level_labels[mapping[v]]]

    labels = _split_disconnected(g0, labels)
    count = len(set(labels.values()))
    return ClusterAssignment(labels=labels, cluster_count=count)


# --- aggregation ---------------------------------------------------------------

def aggregate(content: ClusterAssignment, communities: ClusterAssignment) -> TopicSet:
    """Intersect content clusters with citation communities.

    Every nonempty intersection of a content cluster (noise excluded) and a
    community becomes one topic; the pair of source ids is kept as provenance
    and in the topic id (T<content>C<community>).
    """
    buckets: dict[tuple[int, int], set[str]] = {}
    for doc_id, c_lab in content.labels.items():
        if c_lab == NOISE:
            continue
        g_lab = communities.labels[doc_id]
        buckets.setdefault((c_lab, g_lab), set()).add(doc_id)
    topics, ids, provenance = [], [], []
    for (c_lab, g_lab) in sorted(buckets):
        topics.append(frozenset(buckets[(c_lab, g_lab)]))
        ids.append(f"T{c_lab}C{g_lab}")
        provenance.append((c_lab, g_lab))
    return TopicSet(topics=topics, ids=ids, provenance=provenance)
