"""Evolving topics: per-period document sub-clusters and term labels.

A topic's document cluster is split along the timeline into per-period
sub-clusters (a document lands in every window covering its year). Tiny
sub-clusters are emptied. Each non-empty sub-cluster can then be labeled
two ways: group-wise TF-IDF over the corpus, or the vocabulary words
nearest to the sub-cluster's embedding centroid.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .doc_embedding import DocEmbeddings, tokenize

log = logging.getLogger(__name__)


class RepresentationError(Exception):
    pass


@dataclass
class TermVector:
    entries: list[tuple[str, float]]  # sorted by weight desc, token asc

    def tokens(self) -> list[str]:
        return [t for t, _ in self.entries]


@dataclass
class EvolvingTopic:
    topic_id: str
    per_period_docs: list[frozenset[str]]
    per_period_rep: list[TermVector | None] = field(default_factory=list)
    rep_kind: str | None = None

    def all_docs(self) -> frozenset[str]:
        out: set[str] = set()
        for docs in self.per_period_docs:
            out |= docs
        return frozenset(out)

    def active_periods(self) -> list[int]:
        return [i for i, docs in enumerate(self.per_period_docs) if docs]


def slice_topics(topic_set, corpus, min_docs: int = 3) -> list[EvolvingTopic]:
    """Bucket each topic's documents by timeline period.

    Buckets with fewer than min_docs documents are emptied; topics left with
    no non-empty bucket are dropped.
    """
    if corpus.timeline is None:
        raise ValueError("corpus has no timeline; call build_timeline first")
    n = len(corpus.timeline)
    out = []
    for topic_id, docs in zip(topic_set.ids, topic_set.topics):
        buckets: list[set[str]] = [set() for _ in range(n)]
        for doc_id in docs:
            for pi in corpus.timeline.periods_for_year(corpus.documents[doc_id].year):
                buckets[pi].add(doc_id)
        frozen = [frozenset(b) if len(b) >= min_docs else frozenset() for b in buckets]
        if any(frozen):
            out.append(EvolvingTopic(
                topic_id=topic_id,
                per_period_docs=frozen,
                per_period_rep=[None] * n,
            ))
    return out


def _group_token_counts(topic: EvolvingTopic, corpus, cache: dict) -> list[dict[str, int] | None]:
    per_period = []
    for docs in topic.per_period_docs:
        if not docs:
            per_period.append(None)
            continue
        counts: dict[str, int] = {}
        for doc_id in sorted(docs):
            toks = cache.get(doc_id)
            if toks is None:
                toks = tokenize(corpus.documents[doc_id].text)
                cache[doc_id] = toks
            for t in toks:
                counts[t] = counts.get(t, 0) + 1
        per_period.append(counts)
    return per_period


def represent_ctfidf(evolving_topics: list[EvolvingTopic], corpus,
                     top_n: int = 10) -> list[EvolvingTopic]:
    """Label every (topic, period) sub-cluster by group-wise TF-IDF.

    Each non-empty sub-cluster is one group. A token's weight in a group is
    tf * log(1 + A / f), with tf its count inside the group, f its count
    across all groups, and A the average token count per group. Ties in the
    top-n cut break lexicographically.
    """
    cache: dict[str, list[str]] = {}
    group_counts = {t.topic_id: _group_token_counts(t, corpus, cache) for t in evolving_topics}

    total_per_token: dict[str, int] = {}
    n_groups = 0
    total_tokens = 0
    for per_period in group_counts.values():
        for counts in per_period:
            if counts is None:
                continue
            n_groups += 1
            for tok, c in counts.items():
                total_per_token[tok] = total_per_token.get(tok, 0) + c
                total_tokens += c
    if n_groups == 0:
        return evolving_topics
    avg_tokens = total_tokens / n_groups

    for topic in evolving_topics:
        reps: list[TermVector | None] = []
        for counts in group_counts[topic.topic_id]:
            if counts is None:
                reps.append(None)
                continue
            weighted = [(tok, c * math.log(1.0 + avg_tokens / total_per_token[tok]))
                        for tok, c in counts.items()]
            weighted.sort(key=lambda e: (-e[1], e[0]))
            reps.append(TermVector(entries=weighted[:top_n]))
        topic.per_period_rep = reps
        topic.rep_kind = "ctfidf"
    return evolving_topics


def represent_nearest_words(evolving_topics: list[EvolvingTopic], embeddings: DocEmbeddings,
                            top_n: int = 10) -> list[EvolvingTopic]:
    """Label every sub-cluster by the words nearest its embedding centroid.

    Requires jointly trained word vectors; precomputed document vectors alone
    cannot support this path.
    """
    if not embeddings.word_vectors:
        raise RepresentationError(
            "embeddings carry no word vectors (loaded from file?); "
            "use the group TF-IDF representation instead"
        )
    id_to_token = {i: t for t, i in embeddings.vocab.items()}
    word_ids = sorted(embeddings.word_vectors)
    W = np.stack([embeddings.word_vectors[i] for i in word_ids])
    w_norms = np.linalg.norm(W, axis=1)
    w_norms[w_norms == 0] = 1.0

    for topic in evolving_topics:
        reps: list[TermVector | None] = []
        for docs in topic.per_period_docs:
            if not docs:
                reps.append(None)
                continue
            centroid = np.mean([embeddings.doc_vectors[d] for d in sorted(docs)], axis=0)
            c_norm = np.linalg.norm(centroid)
            if c_norm == 0:
                reps.append(TermVector(entries=[]))
                continue
            sims = (W @ centroid) / (w_norms * c_norm)
            ranked = sorted(zip(word_ids, sims), key=lambda e: (-e[1], id_to_token[e[0]]))
            reps.append(TermVector(
                entries=[(id_to_token[i], float(s)) for i, s in ranked[:top_n]]
            ))
        topic.per_period_rep = reps
        topic.rep_kind = "nearest_words"
    return evolving_topics


# --- persistence -----------------------------------------------------------

def write_topic_set(topic_set, path) -> None:
    from .util import atomic_write_text

    lines = []
    for topic_id, docs in zip(topic_set.ids, topic_set.topics):
        lines.append(json.dumps({"topic_id": topic_id, "doc_ids": sorted(docs)},
                                sort_keys=True, ensure_ascii=False))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_topic_set(path):
    from .clustering import TopicSet

    topics, ids = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            ids.append(rec["topic_id"])
            topics.append(frozenset(rec["doc_ids"]))
    return TopicSet(topics=topics, ids=ids, provenance=[])


def write_evolving_topics(evolving_topics: list[EvolvingTopic], path) -> None:
    """One line per (topic, period) with documents and the term representation."""
    from .util import atomic_write_text

    lines = []
    for topic in evolving_topics:
        for period, docs in enumerate(topic.per_period_docs):
            if not docs:
                continue
            rep = topic.per_period_rep[period] if period < len(topic.per_period_rep) else None
            lines.append(json.dumps({
                "topic_id": topic.topic_id,
                "period": period,
                "doc_ids": sorted(docs),
                "rep": [[t, w] for t, w in rep.entries] if rep else [],
                "rep_kind": topic.rep_kind,
            }, sort_keys=True, ensure_ascii=False))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_evolving_topics(path, n_periods: int) -> list[EvolvingTopic]:
    by_topic: dict[str, EvolvingTopic] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            t = by_topic.get(rec["topic_id"])
            if t is None:
                t = EvolvingTopic(
                    topic_id=rec["topic_id"],
                    per_period_docs=[frozenset()] * n_periods,
                    per_period_rep=[None] * n_periods,
                )
                by_topic[rec["topic_id"]] = t
            t.per_period_docs[rec["period"]] = frozenset(rec["doc_ids"])
            if rec.get("rep"):
                t.per_period_rep[rec["period"]] = TermVector(
                    entries=[(tok, float(w)) for tok, w in rec["rep"]]
                )
            t.rep_kind = rec.get("rep_kind") or t.rep_kind
    return list(by_topic.values())
