"""Per-period topic embeddings over the temporal topic-citation graph.

Each period is processed in order: random walks are drawn on the cumulative
graph slice with edge probabilities decayed by age, then a skip-gram model
with negative sampling trains on the walks, warm-starting every vector from
the previous period's snapshot. A snapshot therefore depends only on edges
labeled at or before its period, which is the causality guarantee the
detection stage relies on.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .doc_embedding import _NoiseTable, _scatter_add, _sgns_batch, read_vectors, save_vectors
from .topic_graph import TopicCitationGraph, slice_graph

log = logging.getLogger(__name__)


@dataclass
class WalkParams:
    walks_per_node: int = 10
    walk_length: int = 8
    half_life_periods: float = 2.0
    dim: int = 32
    epochs_per_period: int = 5
    negatives: int = 5
    learning_rate: float = 0.025
    seed: int = 42

    def validate(self) -> None:
        if self.walk_length < 2:
            raise ValueError("walk_length must be >= 2")
        if self.half_life_periods <= 0:
            raise ValueError("half_life_periods must be positive")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")


@dataclass
class TopicEmbeddingSeries:
    dim: int
    snapshots: list[dict[str, np.ndarray]]
    norms: list[dict[str, float]] = field(default_factory=list)

    def __post_init__(self):
        if not self.norms:
            self.norms = [
                {t: float(np.linalg.norm(v)) for t, v in snap.items()}
                for snap in self.snapshots
            ]

    def n_periods(self) -> int:
        return len(self.snapshots)

    def vector(self, topic: str, period: int) -> np.ndarray | None:
        return self.snapshots[period].get(topic)

    def norm(self, topic: str, period: int) -> float | None:
        return self.norms[period].get(topic)

    def distance(self, a: str, b: str, period: int) -> float | None:
        va, vb = self.vector(a, period), self.vector(b, period)
        if va is None or vb is None:
            return None
        return embedding_distance(va, vb)


def embedding_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine distance 1 - cos(u, v), in [0, 2]."""
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine distance undefined for zero-norm vectors")
    d = 1.0 - float(np.dot(u, v) / (nu * nv))
    return min(2.0, max(0.0, d))


def _decayed_transitions(graph: TopicCitationGraph, period: int, half_life: float):
    """Undirected adjacency with weights decayed by edge age at `period`.

    Self-loops are skipped: a walk step must move, and the citation context
    of a topic is made of the *other* topics around it.
    """
    adj: dict[str, dict[str, float]] = {}
    for (src, dst, j), w in graph.edges.items():
        if j > period or src == dst:
            continue
        decayed = w * 2.0 ** (-(period - j) / half_life)
        fwd = adj.setdefault(src, {})
        fwd[dst] = fwd.get(dst, 0.0) + decayed
        rev = adj.setdefault(dst, {})
        rev[src] = rev.get(src, 0.0) + decayed
    return adj


def generate_walks(graph: TopicCitationGraph, period: int, params: WalkParams | None = None,
                   rng: np.random.Generator | None = None) -> list[list[str]]:
    """Time-decayed random walks on the cumulative slice at `period`.

    Transition probability along an edge is proportional to weight times
    2^(-age/half_life); edges are traversed in both directions. Nodes with
    no edge yet emit single-node walks.
    """
    params = params or WalkParams()
    params.validate()
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence([params.seed, period]))
    adj = _decayed_transitions(graph, period, params.half_life_periods)
    if not adj and not any(j <= period for (_, _, j) in graph.edges):
        return []  # nothing has happened yet at this period

    # precompute cumulative transition tables for O(log deg) sampling
    tables: dict[str, tuple[list[str], np.ndarray]] = {}
    for node in sorted(adj):
        nbrs = sorted(adj[node])
        weights = np.asarray([adj[node][u] for u in nbrs], dtype=np.float64)
        cum = np.cumsum(weights / weights.sum())
        cum[-1] = 1.0
        tables[node] = (nbrs, cum)

    walks: list[list[str]] = []
    for start in sorted(set(graph.nodes) | set(adj)):
        for _ in range(params.walks_per_node):
            walk = [start]
            while len(walk) < params.walk_length:
                table = tables.get(walk[-1])
                if table is None:
                    break
                nbrs, cum = table
                walk.append(nbrs[int(np.searchsorted(cum, rng.random(), side="right"))])
            walks.append(walk)
    return walks


def train_dynamic_embeddings(graph: TopicCitationGraph, n_periods: int | None = None,
                             params: WalkParams | None = None) -> TopicEmbeddingSeries:
    """Train the per-period embedding series with warm starts.

    Vectors exist for every topic incident to an edge labeled at or before
    the snapshot's period. Periods whose cumulative slice is unchanged and
    empty copy the previous snapshot forward. Deterministic for a fixed seed.
    """
    params = params or WalkParams()
    params.validate()
    if n_periods is None:
        n_periods = graph.n_periods
    elif not isinstance(n_periods, int):
        n_periods = len(n_periods)  # a Timeline works too

    emb_in: dict[str, np.ndarray] = {}
    emb_out: dict[str, np.ndarray] = {}
    snapshots: list[dict[str, np.ndarray]] = []

    for period in range(n_periods):
        rng = np.random.default_rng(np.random.SeedSequence([params.seed, period]))
        sl = slice_graph(graph, period, cumulative=True)
        active = sorted(sl.nodes)
        for node in active:
            if node not in emb_in:
                emb_in[node] = ((rng.random(params.dim) - 0.5) / params.dim).astype(np.float32)
                emb_out[node] = np.zeros(params.dim, dtype=np.float32)
        if active:
            walks = generate_walks(graph, period, params, rng)
            _train_period(walks, emb_in, emb_out, active, params, rng)
        snapshots.append({t: emb_in[t].copy() for t in sorted(emb_in)})

    return TopicEmbeddingSeries(dim=params.dim, snapshots=snapshots)


def _train_period(walks, emb_in, emb_out, active, params, rng) -> None:
    index = {t: i for i, t in enumerate(active)}
    centers, contexts = [], []
    counts = np.zeros(len(active), dtype=np.int64)
    for walk in walks:
        idx = [index[t] for t in walk if t in index]
        np.add.at(counts, idx, 1)
        # context window spans the whole walk
        for p in range(len(idx)):
            for q in range(len(idx)):
                if p != q:
                    centers.append(idx[p])
                    contexts.append(idx[q])
    if not centers:
        return
    centers = np.asarray(centers, dtype=np.int64)
    contexts = np.asarray(contexts, dtype=np.int64)
    noise = _NoiseTable(np.maximum(counts, 1))

    W_in = np.stack([emb_in[t] for t in active])
    W_out = np.stack([emb_out[t] for t in active])
    n_pairs = len(centers)
    lr0, lr_min = params.learning_rate, params.learning_rate * 0.1
    # bound accumulated per-row updates per step: small graphs get small batches
    batch = max(64, min(4096, 16 * len(active)))
    total_epochs = params.epochs_per_period
    for epoch in range(total_epochs):
        lr = lr0 + (lr_min - lr0) * (epoch / max(1, total_epochs - 1)) if total_epochs > 1 else lr0
        order = rng.permutation(n_pairs)
        for lo in range(0, n_pairs, batch):
            sel = order[lo:lo + batch]
            c, x = centers[sel], contexts[sel]
            grad = _sgns_batch(W_in[c], x, W_out, lr, rng, noise, params.negatives)
            _scatter_add(W_in, c, grad)

    for i, t in enumerate(active):
        emb_in[t] = W_in[i]
        emb_out[t] = W_out[i]


# --- persistence -----------------------------------------------------------

def save_series(series: TopicEmbeddingSeries, workdir, params: WalkParams | None = None) -> list[str]:
    """Write one vector file per period plus a manifest of what exists."""
    from pathlib import Path

    from .util import atomic_write_text

    workdir = Path(workdir)
    files = []
    for i, snap in enumerate(series.snapshots):
        path = workdir / f"embeddings_p{i}.vec"
        save_vectors({t: snap[t] for t in sorted(snap)}, path)
        files.append(path.name)
    manifest = {
        "dim": series.dim,
        "snapshots": files,
        "params": params.__dict__ if params else None,
    }
    atomic_write_text(workdir / "embedding_manifest.json", json.dumps(manifest, sort_keys=True, indent=1))
    return files


def load_series(workdir) -> TopicEmbeddingSeries:
    from pathlib import Path

    workdir = Path(workdir)
    with open(workdir / "embedding_manifest.json", "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    snapshots = []
    for name in manifest["snapshots"]:
        vectors, _ = read_vectors(workdir / name)
        snapshots.append(vectors)
    return TopicEmbeddingSeries(dim=manifest["dim"], snapshots=snapshots)
