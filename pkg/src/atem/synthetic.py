"""Synthetic corpora with planted topics, communities, and emergence events.

Each topic owns a disjoint signature vocabulary and publishes a fixed number
of documents per period; citations are dense inside a topic and sparse
across topics. An emergence event makes two topics start co-citing a shared
set of older third-party documents from its period onward, and adds
mixed-signature documents that belong to both planted clusters. That gives
detection something to find (converging citation contexts) and scoring
something to measure (shared documents concentrated after the event).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, asdict

import numpy as np

from .corpus import CitationEdge, Corpus, Document, build_timeline
from .clustering import TopicSet

log = logging.getLogger(__name__)

BASE_YEAR = 2000
TOKENS_PER_DOC = 40
TITLE_TOKENS = 6
SIGNATURE_FRACTION = 0.8
HUB_TOPICS_PER_EVENT = 2
HUB_CITES_PER_DOC = 8  # expected hub citations per member doc at full boost


@dataclass
class EmergenceEvent:
    topic_a: int
    topic_b: int
    period: int
    co_cite_boost: float = 0.3
    shared_docs_after: int = 6


@dataclass
class SynthSpec:
    n_topics: int = 12
    docs_per_topic_per_period: int = 16
    n_periods: int = 10
    vocab_per_topic: int = 40
    background_vocab: int = 200
    intra_cite_prob: float = 0.05
    cross_cite_prob: float = 0.0005
    events: list[EmergenceEvent] = field(default_factory=list)
    seed: int = 7

    def validate(self) -> None:
        if self.n_topics < 1 or self.n_periods < 1 or self.docs_per_topic_per_period < 1:
            raise ValueError("spec would generate no documents")
        if not (0 <= self.intra_cite_prob <= 1 and 0 <= self.cross_cite_prob <= 1):
            raise ValueError("citation probabilities must be in [0, 1]")
        for ev in self.events:
            if not (0 <= ev.topic_a < self.n_topics and 0 <= ev.topic_b < self.n_topics):
                raise ValueError(f"event references unknown topic: {ev}")
            if ev.topic_a == ev.topic_b:
                raise ValueError("event members must differ")
            if not (0 <= ev.period < self.n_periods):
                raise ValueError(f"event period {ev.period} outside timeline")
            if not (0 <= ev.co_cite_boost <= 1):
                raise ValueError("co_cite_boost must be in [0, 1]")


def default_spec(seed: int = 7) -> SynthSpec:
    """The stock benchmark: 12 topics, 10 yearly periods, 4 planted events."""
    return SynthSpec(
        events=[
            EmergenceEvent(0, 1, period=4, co_cite_boost=0.5, shared_docs_after=10),
            EmergenceEvent(2, 3, period=5, co_cite_boost=0.5, shared_docs_after=10),
            EmergenceEvent(4, 5, period=6, co_cite_boost=0.5, shared_docs_after=10),
            EmergenceEvent(6, 7, period=5, co_cite_boost=0.5, shared_docs_after=10),
        ],
        seed=seed,
    )


@dataclass
class GroundTruth:
    doc_topics: dict[str, list[int]]
    events: list[EmergenceEvent]
    hub_docs: dict[int, list[str]]  # event index -> co-cited document set

    def cluster(self, topic: int) -> set[str]:
        return {d for d, ts in self.doc_topics.items() if topic in ts}

    def to_json(self) -> str:
        return json.dumps({
            "doc_topics": {d: ts for d, ts in sorted(self.doc_topics.items())},
            "events": [asdict(e) for e in self.events],
            "hub_docs": {str(k): sorted(v) for k, v in sorted(self.hub_docs.items())},
        }, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        raw = json.loads(text)
        return cls(
            doc_topics={d: list(ts) for d, ts in raw["doc_topics"].items()},
            events=[EmergenceEvent(**e) for e in raw["events"]],
            hub_docs={int(k): list(v) for k, v in raw["hub_docs"].items()},
        )


def _doc_text(rng, signatures, topic_ids, background, n_tokens):
    sig_pool = np.concatenate([signatures[t] for t in topic_ids])
    n_sig = int(round(n_tokens * SIGNATURE_FRACTION))
    toks = list(rng.choice(sig_pool, size=n_sig))
    toks += list(rng.choice(background, size=n_tokens - n_sig))
    rng.shuffle(toks)
    return " ".join(toks[:TITLE_TOKENS]), " ".join(toks[TITLE_TOKENS:])


def generate_corpus(spec: SynthSpec | None = None) -> tuple[Corpus, GroundTruth]:
    """Generate the corpus and its ground truth; byte-stable for a fixed seed."""
    spec = spec or default_spec()
    spec.validate()
    rng = np.random.default_rng(spec.seed)

    signatures = {
        t: np.array([f"t{t}w{i}" for i in range(spec.vocab_per_topic)])
        for t in range(spec.n_topics)
    }
    background = np.array([f"bg{i}" for i in range(spec.background_vocab)])

    corpus = Corpus()
    doc_topics: dict[str, list[int]] = {}
    by_topic_until: dict[int, list[list[str]]] = {t: [[] for _ in range(spec.n_periods)]
                                                  for t in range(spec.n_topics)}

    for period in range(spec.n_periods):
        for topic in range(spec.n_topics):
            for i in range(spec.docs_per_topic_per_period):
                doc_id = f"t{topic}p{period}d{i}"
                title, body = _doc_text(rng, signatures, [topic], background, TOKENS_PER_DOC)
                corpus.documents[doc_id] = Document(doc_id, title, body, BASE_YEAR + period)
                doc_topics[doc_id] = [topic]
                by_topic_until[topic][period].append(doc_id)
        for ev_idx, ev in enumerate(spec.events):
            if period < ev.period:
                continue
            for i in range(_shared_docs_at(ev, spec.n_periods, period)):
                doc_id = f"e{ev_idx}p{period}m{i}"
                title, body = _doc_text(rng, signatures, [ev.topic_a, ev.topic_b],
                                        background, TOKENS_PER_DOC)
                corpus.documents[doc_id] = Document(doc_id, title, body, BASE_YEAR + period)
                doc_topics[doc_id] = sorted([ev.topic_a, ev.topic_b])
                by_topic_until[ev.topic_a][period].append(doc_id)
                by_topic_until[ev.topic_b][period].append(doc_id)

    hub_docs = _pick_hubs(spec, rng, by_topic_until)
    edges = _generate_citations(spec, rng, corpus, doc_topics, by_topic_until, hub_docs)
    corpus.citations = edges
    build_timeline(corpus, window_years=1, overlap_years=0)

    truth = GroundTruth(doc_topics=doc_topics, events=list(spec.events), hub_docs=hub_docs)
    return corpus, truth


def _shared_docs_at(ev: EmergenceEvent, n_periods: int, period: int) -> int:
    """Spread shared_docs_after over the periods from the event onward."""
    span = n_periods - ev.period
    base, extra = divmod(ev.shared_docs_after, span)
    return base + (1 if period - ev.period < extra else 0)


def _pick_hubs(spec, rng, by_topic_until) -> dict[int, list[str]]:
    """Per event: every pre-event document of a few non-member hub topics.

    Citing a broad set keeps the extra in-degree per hub document small, so
    the plant does not drag hub documents out of their own communities, while
    the per-topic citation mass still shifts both members toward the same
    third parties.
    """
    hubs: dict[int, list[str]] = {}
    evented = {t for e in spec.events for t in (e.topic_a, e.topic_b)}
    for ev_idx, ev in enumerate(spec.events):
        members = {ev.topic_a, ev.topic_b}
        # prefer topics that are in no event at all: a topic that is both an
        # event member and another event's hub would entangle the two plants
        spare = [t for t in range(spec.n_topics)
                 if t not in evented and any(by_topic_until[t][p] for p in range(ev.period))]
        candidates = spare or [t for t in range(spec.n_topics)
                               if t not in members and any(by_topic_until[t][p] for p in range(ev.period))]
        if not candidates:
            hubs[ev_idx] = []
            continue
        take = min(HUB_TOPICS_PER_EVENT, len(candidates))
        picked = sorted(rng.choice(len(candidates), size=take, replace=False))
        pool = []
        for i in picked:
            for p in range(ev.period):
                pool.extend(d for d in by_topic_until[candidates[i]][p] if not d.startswith("e"))
        hubs[ev_idx] = sorted(pool)
    return hubs


def _generate_citations(spec, rng, corpus, doc_topics, by_topic_until, hub_docs):
    # per-topic flat lists of earlier docs, rebuilt per period
    edges: list[CitationEdge] = []
    earlier_by_topic: dict[int, list[str]] = {t: [] for t in range(spec.n_topics)}
    earlier_all: list[str] = []

    # per (member doc, hub doc) probability, calibrated so a member document
    # makes about HUB_CITES_PER_DOC * co_cite_boost hub citations per period
    boost = {}
    for ev_idx, ev in enumerate(spec.events):
        pool = max(1, len(hub_docs[ev_idx]))
        boost[ev_idx] = min(1.0, spec.cross_cite_prob + ev.co_cite_boost * HUB_CITES_PER_DOC / pool)

    docs_by_period: dict[int, list[str]] = {}
    for doc_id, doc in corpus.documents.items():
        docs_by_period.setdefault(doc.year - BASE_YEAR, []).append(doc_id)

    for period in range(spec.n_periods):
        for doc_id in docs_by_period.get(period, []):
            topics_of_doc = doc_topics[doc_id]
            cited: set[str] = set()
            # dense citations into the own topic's past
            for t in topics_of_doc:
                pool = earlier_by_topic[t]
                if pool:
                    n = rng.binomial(len(pool), spec.intra_cite_prob)
                    if n:
                        for i in rng.choice(len(pool), size=n, replace=False):
                            cited.add(pool[i])
            # sparse citations anywhere else in the past
            if earlier_all:
                n = rng.binomial(len(earlier_all), spec.cross_cite_prob)
                if n:
                    for i in rng.choice(len(earlier_all), size=n, replace=False):
                        target = earlier_all[i]
                        if not set(doc_topics[target]) & set(topics_of_doc):
                            cited.add(target)
            # event members pile onto the shared hub set
            for ev_idx, ev in enumerate(spec.events):
                if period < ev.period:
                    continue
                if not set(topics_of_doc) & {ev.topic_a, ev.topic_b}:
                    continue
                pool = hub_docs[ev_idx]
                if pool:
                    n = rng.binomial(len(pool), boost[ev_idx])
                    if n:
                        for i in rng.choice(len(pool), size=n, replace=False):
                            cited.add(pool[i])
            edges.extend(CitationEdge(doc_id, dst) for dst in sorted(cited) if dst != doc_id)
        # docs of this period become citable afterwards
        for doc_id in docs_by_period.get(period, []):
            for t in doc_topics[doc_id]:
                earlier_by_topic[t].append(doc_id)
            earlier_all.append(doc_id)
    return edges


# --- ground-truth views ------------------------------------------------------

def truth_topic_set(truth: GroundTruth, n_topics: int | None = None) -> TopicSet:
    """Planted clusters as a topic set (clusters may overlap via shared docs)."""
    topics = sorted({t for ts in truth.doc_topics.values() for t in ts})
    if n_topics is not None:
        topics = list(range(n_topics))
    sets, ids = [], []
    for t in topics:
        members = truth.cluster(t)
        if members:
            sets.append(frozenset(members))
            ids.append(f"G{t}")
    return TopicSet(topics=sets, ids=ids, provenance=[])


@dataclass
class GroundTruthMetrics:
    recall_at_k: float
    mean_lag: float | None
    matched: dict[int, str]
    per_event: list[dict]

    def to_json(self) -> str:
        return json.dumps({
            "recall_at_k": self.recall_at_k,
            "mean_lag": self.mean_lag,
            "matched": {str(k): v for k, v in sorted(self.matched.items())},
            "per_event": self.per_event,
        }, sort_keys=True, indent=1)


def match_topics(truth: GroundTruth, detected_topics) -> dict[int, str]:
    """Greedy 1-1 matching of planted clusters to detected topics.

    Detected topics are anything with .topic_id and per-period doc sets (or a
    plain mapping id -> doc set). A match needs overlap >= 0.5 of the planted
    cluster.
    """
    if isinstance(detected_topics, dict):
        det = {k: set(v) for k, v in detected_topics.items()}
    else:
        det = {t.topic_id: set(t.all_docs()) for t in detected_topics}
    planted = sorted({t for ts in truth.doc_topics.values() for t in ts})
    scored = []
    for g in planted:
        g_docs = truth.cluster(g)
        if not g_docs:
            continue
        for d_id, d_docs in det.items():
            overlap = len(g_docs & d_docs) / len(g_docs)
            if overlap >= 0.5:
                scored.append((overlap, g, d_id))
    scored.sort(key=lambda e: (-e[0], e[1], e[2]))
    matched: dict[int, str] = {}
    used: set[str] = set()
    for overlap, g, d_id in scored:
        if g in matched or d_id in used:
            continue
        matched[g] = d_id
        used.add(d_id)
    return matched


def ground_truth_eval(detected_pairs: list[tuple[str, str, int]], truth: GroundTruth,
                      detected_topics, top_k: int = 10) -> GroundTruthMetrics:
    """Score detections against the planted events.

    A planted event is recalled when, after topic matching, the partner shows
    up in either member's detected pairs no later than one period past the
    event. Lag averages max(0, found - planted) over all found events.
    """
    matched = match_topics(truth, detected_topics)
    found_period: dict[frozenset[str], int] = {}
    for t, tx, period in detected_pairs:
        key = frozenset((t, tx))
        if len(key) == 2 and (key not in found_period or period < found_period[key]):
            found_period[key] = period

    per_event = []
    hits = 0
    lags = []
    for ev in truth.events:
        da, db = matched.get(ev.topic_a), matched.get(ev.topic_b)
        row = {"topic_a": ev.topic_a, "topic_b": ev.topic_b, "period": ev.period,
               "matched_a": da, "matched_b": db, "found_period": None, "hit": False}
        if da is not None and db is not None:
            fp = found_period.get(frozenset((da, db)))
            if fp is not None:
                row["found_period"] = fp
                lags.append(max(0, fp - ev.period))
                if fp <= ev.period + 1:
                    row["hit"] = True
                    hits += 1
        per_event.append(row)

    recall = hits / len(truth.events) if truth.events else 0.0
    return GroundTruthMetrics(
        recall_at_k=recall,
        mean_lag=float(np.mean(lags)) if lags else None,
        matched=matched,
        per_event=per_event,
    )
