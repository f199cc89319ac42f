"""Joint word/document embeddings.

The built-in trainer is a distributed-bag-of-words model: each document
vector learns to predict the document's own tokens through negative
sampling, and a word-word skip-gram component (controlled by `window`)
keeps word vectors in the same space as document vectors. Precomputed
vectors can be loaded instead, so downstream stages never depend on this
trainer's quality.
"""

from __future__ import annotations

import logging
import re
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_VEC_MAGIC = b"AEMB"


class EmbeddingError(Exception):
    pass


def tokenize(text: str) -> list[str]:
    """Lowercased unicode-alphanumeric tokens; everything else is a separator."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class EmbedParams:
    dim: int = 64
    epochs: int = 20
    window: int = 5
    negatives: int = 5
    learning_rate: float = 0.025
    min_token_count: int = 3
    seed: int = 42
    workers: int = 1  # >1 applies unsynchronized concurrent updates (nondeterministic)

    def validate(self) -> None:
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.negatives < 1:
            raise ValueError(f"negatives must be >= 1, got {self.negatives}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class DocEmbeddings:
    dim: int
    doc_vectors: dict[str, np.ndarray]
    word_vectors: dict[int, np.ndarray] = field(default_factory=dict)
    vocab: dict[str, int] = field(default_factory=dict)
    mean_filled: list[str] = field(default_factory=list)

    def matrix(self, ids: list[str] | None = None) -> tuple[list[str], np.ndarray]:
        ids = list(self.doc_vectors) if ids is None else ids
        return ids, np.stack([self.doc_vectors[i] for i in ids])

    def check_finite(self) -> None:
        for vid, vec in self.doc_vectors.items():
            if not np.all(np.isfinite(vec)):
                raise EmbeddingError(f"non-finite components in vector for {vid!r}")


def build_vocabulary(corpus, min_token_count: int = 3) -> dict[str, int]:
    """Count tokens over title+body and keep those seen >= min_token_count times.

    Ids are dense from 0, ordered by descending frequency then token, and are
    written back onto the corpus.
    """
    counts: dict[str, int] = {}
    for doc in corpus.documents.values():
        for tok in tokenize(doc.text):
            counts[tok] = counts.get(tok, 0) + 1
    kept = sorted((t for t, c in counts.items() if c >= min_token_count),
                  key=lambda t: (-counts[t], t))
    vocab = {t: i for i, t in enumerate(kept)}
    corpus.vocabulary = vocab
    return vocab


def _doc_token_ids(corpus, vocab) -> dict[str, np.ndarray]:
    out = {}
    for doc_id, doc in corpus.documents.items():
        ids = [vocab[t] for t in tokenize(doc.text) if t in vocab]
        out[doc_id] = np.asarray(ids, dtype=np.int64)
    return out


class _NoiseTable:
    """Unigram^0.75 negative-sampling distribution, drawn via searchsorted."""

    def __init__(self, token_counts: np.ndarray):
        weights = np.power(token_counts.astype(np.float64), 0.75)
        total = weights.sum()
        if total <= 0:
            raise EmbeddingError("empty vocabulary: nothing to sample negatives from")
        self.cum = np.cumsum(weights / total)
        self.cum[-1] = 1.0

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        return np.searchsorted(self.cum, rng.random(shape), side="right")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -30, 30)))


def _sgns_batch(inputs: np.ndarray, targets: np.ndarray, out_mat: np.ndarray,
                lr: float, rng: np.random.Generator, noise: "_NoiseTable",
                k: int, block: int = 256) -> np.ndarray:
    """One negative-sampling update over a batch of (input vector, target id) pairs.

    Each block of `block` consecutive pairs shares a pool of 8*k negative
    ids, rescaled so the expected gradient matches k independent draws per
    pair; this keeps the negative pass inside batched matrix products while
    bounding how much any single output row accumulates per step. Returns the
    gradient for each input row; output vectors are updated in place.
    """
    dt = out_mat.dtype
    lr_t = dt.type(lr)
    P, dim = inputs.shape
    pos_out = out_mat[targets]                       # (P, dim)
    g_pos = (dt.type(1.0) - _sigmoid((inputs * pos_out).sum(axis=1))) * lr_t
    grad_in = g_pos[:, None] * pos_out

    S = max(16, 8 * k)
    scale = dt.type(lr * (k / S))
    nb = (P + block - 1) // block
    if nb * block != P:
        pad = np.zeros((nb * block - P, dim), dtype=inputs.dtype)
        X = np.concatenate([inputs, pad]).reshape(nb, block, dim)
    else:
        X = inputs.reshape(nb, block, dim)
    negs = noise.draw(rng, (nb, S))
    neg_out = out_mat[negs]                          # (nb, S, dim)
    g_neg = -_sigmoid(X @ neg_out.swapaxes(1, 2)) * scale   # (nb, block, S)
    grad_in += (g_neg @ neg_out).reshape(-1, dim)[:P]

    idx = np.concatenate([targets, negs.reshape(-1)])
    upd = np.concatenate([g_pos[:, None] * inputs,
                          (g_neg.swapaxes(1, 2) @ X).reshape(-1, dim)])
    _scatter_add(out_mat, idx, upd)
    return grad_in


def _scatter_add(mat: np.ndarray, idx: np.ndarray, updates: np.ndarray,
                 max_norm: float = 1.0) -> None:
    """mat[idx] += updates with duplicate ids accumulated (sort + reduceat).

    Per-row accumulated updates are norm-clipped: when one row collects many
    pair updates in a single step (a few nodes dominating the walk pairs, a
    token dominating a batch), the unclipped sum oscillates and diverges.
    """
    if len(idx) == 0:
        return
    order = np.argsort(idx, kind="stable")
    idx_s = idx[order]
    starts = np.flatnonzero(np.r_[True, idx_s[1:] != idx_s[:-1]])
    sums = np.add.reduceat(updates[order], starts, axis=0)
    if max_norm is not None:
        norms = np.linalg.norm(sums, axis=1)
        heavy = norms > max_norm
        if np.any(heavy):
            sums[heavy] *= (max_norm / norms[heavy])[:, None]
    mat[idx_s[starts]] += sums


def _flatten_positions(doc_tokens: dict[str, np.ndarray], trainable: list[str]):
    """Concatenate token streams; per position keep (doc index, token id)."""
    doc_idx, tok_ids = [], []
    for di, doc_id in enumerate(trainable):
        toks = doc_tokens[doc_id]
        doc_idx.append(np.full(len(toks), di, dtype=np.int64))
        tok_ids.append(toks)
    return np.concatenate(doc_idx), np.concatenate(tok_ids)


def _all_window_pairs(doc_tokens: dict[str, np.ndarray], trainable: list[str], window: int):
    """Every (center token, context token) pair up to the maximum window,
    tagged with its center position and offset so epochs can subsample a
    per-position reduced window without regenerating pairs."""
    centers, contexts, offsets, positions = [], [], [], []
    base = 0
    for doc_id in trainable:
        toks = doc_tokens[doc_id]
        T = len(toks)
        for off in range(1, min(window, T - 1) + 1):
            left = np.arange(0, T - off)
            right = left + off
            # center predicts context, both directions
            centers.append(toks[left]); contexts.append(toks[right])
            offsets.append(np.full(T - off, off)); positions.append(base + left)
            centers.append(toks[right]); contexts.append(toks[left])
            offsets.append(np.full(T - off, off)); positions.append(base + right)
        base += T
    if not centers:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, empty
    return (np.concatenate(centers), np.concatenate(contexts),
            np.concatenate(offsets), np.concatenate(positions))


def train_doc_embeddings(corpus, params: EmbedParams | None = None) -> DocEmbeddings:
    """Train document vectors (and word vectors) on the corpus text.

    Updates are applied in shuffled chunks per epoch; deterministic for a
    fixed seed when workers == 1. Documents with no in-vocabulary token get
    the corpus-mean vector and are flagged.
    """
    params = params or EmbedParams()
    params.validate()
    if not corpus.vocabulary:
        build_vocabulary(corpus, params.min_token_count)
    vocab = corpus.vocabulary
    if not vocab:
        raise EmbeddingError("empty vocabulary after frequency filtering")

    doc_tokens = _doc_token_ids(corpus, vocab)
    trainable = [d for d, toks in doc_tokens.items() if len(toks) > 0]
    empty = [d for d, toks in doc_tokens.items() if len(toks) == 0]
    if not trainable:
        raise EmbeddingError("no document has an in-vocabulary token")

    n_words = len(vocab)
    dim = params.dim
    rng = np.random.default_rng(params.seed)
    # float32 throughout: halves memory traffic, still deterministic
    doc_mat = ((rng.random((len(trainable), dim)) - 0.5) / dim).astype(np.float32)
    w_in = ((rng.random((n_words, dim)) - 0.5) / dim).astype(np.float32)
    w_out = np.zeros((n_words, dim), dtype=np.float32)

    token_counts = np.zeros(n_words, dtype=np.int64)
    for toks in doc_tokens.values():
        np.add.at(token_counts, toks, 1)
    noise = _NoiseTable(token_counts)

    pos_doc, pos_tok = _flatten_positions(doc_tokens, trainable)
    sg_center, sg_context, sg_offset, sg_position = _all_window_pairs(
        doc_tokens, trainable, params.window)
    n_positions = len(pos_tok)
    lr0, lr_min = params.learning_rate, params.learning_rate * 0.01
    chunk = 8192

    def dbow_updates(sel: np.ndarray, lr: float, rng_e: np.random.Generator) -> None:
        for lo in range(0, len(sel), chunk):
            s = sel[lo:lo + chunk]
            d, t = pos_doc[s], pos_tok[s]
            grad = _sgns_batch(doc_mat[d], t, w_out, lr, rng_e, noise, params.negatives)
            _scatter_add(doc_mat, d, grad)

    def skipgram_updates(sel: np.ndarray, lr: float, rng_e: np.random.Generator) -> None:
        for lo in range(0, len(sel), chunk):
            s = sel[lo:lo + chunk]
            c, x = sg_center[s], sg_context[s]
            grad = _sgns_batch(w_in[c], x, w_out, lr, rng_e, noise, params.negatives)
            _scatter_add(w_in, c, grad)

    def split_run(fn, sel: np.ndarray, lr: float) -> None:
        if params.workers <= 1:
            fn(sel, lr, rng)
            return
        # unsynchronized concurrent updates on shared weights; not reproducible
        seeds = rng.integers(0, 2**63 - 1, size=params.workers)
        parts = np.array_split(sel, params.workers)
        with ThreadPoolExecutor(max_workers=params.workers) as pool:
            list(pool.map(lambda ps: fn(ps[0], lr, np.random.default_rng(int(ps[1]))),
                          zip(parts, seeds)))

    for epoch in range(params.epochs):
        lr = lr0 + (lr_min - lr0) * (epoch / max(1, params.epochs - 1)) if params.epochs > 1 else lr0
        split_run(dbow_updates, rng.permutation(n_positions), lr)
        if params.window > 0 and len(sg_center):
            # per-position reduced window, resampled every epoch
            b = rng.integers(1, params.window + 1, size=n_positions)
            keep = np.flatnonzero(sg_offset <= b[sg_position])
            split_run(skipgram_updates, keep[rng.permutation(len(keep))], lr)

    doc_vectors = {doc_id: doc_mat[i].copy() for i, doc_id in enumerate(trainable)}
    if empty:
        mean = doc_mat.mean(axis=0)
        for doc_id in empty:
            doc_vectors[doc_id] = mean.copy()
        log.warning("%d documents had no in-vocabulary token; assigned corpus-mean vector", len(empty))
    # reorder to corpus order for stable serialization
    doc_vectors = {doc_id: doc_vectors[doc_id] for doc_id in corpus.documents}

    emb = DocEmbeddings(
        dim=dim,
        doc_vectors=doc_vectors,
        word_vectors={i: w_in[i].copy() for i in range(n_words)},
        vocab=dict(vocab),
        mean_filled=empty,
    )
    emb.check_finite()
    return emb


# --- persistence -----------------------------------------------------------

def save_vectors(vectors: dict[str, np.ndarray], path, format: str = "binary") -> None:
    """Write an id -> vector map. Binary layout: magic, dim u32, count u64,
    then id_len u16 + id bytes + dim little-endian f32 per entry. The text
    variant is one `id v1 v2 ...` line per entry."""
    items = list(vectors.items())
    if not items:
        dim = 0
    else:
        dim = len(next(iter(vectors.values())))
    if format == "binary":
        parts = [_VEC_MAGIC, struct.pack("<IQ", dim, len(items))]
        for vid, vec in items:
            ib = vid.encode("utf-8")
            parts.append(struct.pack("<H", len(ib)))
            parts.append(ib)
            parts.append(np.asarray(vec, dtype="<f4").tobytes())
        from .util import atomic_write_bytes

        atomic_write_bytes(path, b"".join(parts))
    elif format == "text":
        lines = [f"{vid} " + " ".join(repr(float(x)) for x in vec) for vid, vec in items]
        from .util import atomic_write_text

        atomic_write_text(path, "\n".join(lines) + "\n")
    else:
        raise ValueError(f"unknown vector format {format!r}")


def read_vectors(path) -> tuple[dict[str, np.ndarray], int]:
    """Read either vector file variant; returns (vectors, dim)."""
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head == _VEC_MAGIC:
            dim, count = struct.unpack("<IQ", fh.read(12))
            out = {}
            for _ in range(count):
                (id_len,) = struct.unpack("<H", fh.read(2))
                vid = fh.read(id_len).decode("utf-8")
                vec = np.frombuffer(fh.read(4 * dim), dtype="<f4").astype(np.float64)
                out[vid] = vec
            return out, dim
    # text fallback
    out = {}
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            vec = np.asarray([float(x) for x in parts[1:]], dtype=np.float64)
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise EmbeddingError(
                    f"inconsistent vector dimension at line {lineno}: {len(vec)} != {dim}"
                )
            out[parts[0]] = vec
    return out, (dim or 0)


def load_doc_embeddings(path, corpus) -> DocEmbeddings:
    """Load precomputed document vectors, mean-filling corpus documents the
    file does not cover. Word vectors are not part of the file format, so
    nearest-word representations are unavailable on this path."""
    vectors, dim = read_vectors(path)
    if not vectors:
        raise EmbeddingError(f"no vectors found in {path}")
    known = {d: v for d, v in vectors.items() if d in corpus.documents}
    extra = len(vectors) - len(known)
    if extra:
        log.warning("%d vectors in %s do not match any corpus document", extra, path)
    if not known:
        raise EmbeddingError("no vector id matches a corpus document")
    mean = np.mean(np.stack(list(known.values())), axis=0)
    missing = [d for d in corpus.documents if d not in known]
    doc_vectors = {}
    for doc_id in corpus.documents:
        doc_vectors[doc_id] = known.get(doc_id, mean).copy()
    if missing:
        log.warning("%d corpus documents missing from %s; assigned corpus-mean vector",
                    len(missing), path)
    emb = DocEmbeddings(dim=dim, doc_vectors=doc_vectors, mean_filled=missing)
    emb.check_finite()
    return emb
