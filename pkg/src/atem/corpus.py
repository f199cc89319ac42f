"""Corpus loading, citation validation, and timeline construction.

A corpus is a set of year-stamped documents plus directed citation links
between them, partitioned (possibly with overlap) into an ordered sequence
of time windows. Everything downstream treats the corpus as immutable.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field

from .util import canonical_json

log = logging.getLogger(__name__)

MIN_YEAR = 1000
MAX_YEAR = 3000


class CorpusError(Exception):
    """Fatal corpus problem: unreadable file, duplicate ids, id-space mismatch."""


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    body: str
    year: int

    @property
    def text(self) -> str:
        """Text used for embedding: title plus body (body may be empty)."""
        return f"{self.title} {self.body}".strip()


@dataclass(frozen=True)
class CitationEdge:
    src: str
    dst: str
    multiplicity: int = 1


@dataclass(frozen=True)
class Period:
    start_year: int
    end_year: int  # inclusive

    def contains(self, year: int) -> bool:
        return self.start_year <= year <= self.end_year


@dataclass
class Timeline:
    periods: list[Period]
    overlap: int = 0

    def __len__(self) -> int:
        return len(self.periods)

    def periods_for_year(self, year: int) -> list[int]:
        """Indices of every window containing the year (overlap allowed)."""
        return [i for i, p in enumerate(self.periods) if p.contains(year)]


@dataclass
class Corpus:
    documents: dict[str, Document] = field(default_factory=dict)
    citations: list[CitationEdge] = field(default_factory=list)
    timeline: Timeline | None = None
    vocabulary: dict[str, int] = field(default_factory=dict)
    # loading / validation tallies
    malformed_records: int = 0
    dangling_dropped: int = 0
    self_citations_dropped: int = 0
    duplicates_collapsed: int = 0

    def __len__(self) -> int:
        return len(self.documents)

    def year_span(self) -> tuple[int, int]:
        years = [d.year for d in self.documents.values()]
        return min(years), max(years)


@dataclass
class ValidationReport:
    documents: int
    edges: int
    malformed_records: int
    dangling_dropped: int
    self_citations_dropped: int
    duplicates_collapsed: int
    anachronistic: int
    periods: int

    def to_json(self) -> str:
        return canonical_json(self.__dict__)


def load_corpus(path, format: str = "jsonl", min_year: int = MIN_YEAR, max_year: int = MAX_YEAR) -> Corpus:
    """Load documents from a JSONL or CSV file.

    JSONL records look like {"id": ..., "title": ..., "abstract": ..., "year": ...};
    CSV has an id,title,abstract,year header. Records missing an id or with an
    unparseable/out-of-range year are skipped and counted; duplicate ids are fatal.
    """
    if format == "jsonl":
        records = _read_jsonl(path)
    elif format == "csv":
        records = _read_csv(path)
    else:
        raise CorpusError(f"unknown corpus format: {format!r}")

    corpus = Corpus()
    for lineno, rec in records:
        doc = _parse_record(rec, min_year, max_year)
        if doc is None:
            corpus.malformed_records += 1
            log.warning("skipping malformed record at line %d: %r", lineno, rec)
            continue
        if doc.doc_id in corpus.documents:
            raise CorpusError(
                f"duplicate doc_id {doc.doc_id!r}: kept record {corpus.documents[doc.doc_id]} "
                f"conflicts with line {lineno} record {rec!r}"
            )
        corpus.documents[doc.doc_id] = doc
    if corpus.malformed_records:
        log.warning("%d malformed records skipped", corpus.malformed_records)
    return corpus


def _read_jsonl(path):
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus file {path}: {exc}") from exc
    with fh:
        out = []
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append((lineno, json.loads(line)))
            except json.JSONDecodeError:
                out.append((lineno, {"_unparseable": line}))
        return out


def _read_csv(path):
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus file {path}: {exc}") from exc
    with fh:
        return [(i, dict(row)) for i, row in enumerate(csv.DictReader(fh), 2)]


def _parse_record(rec: dict, min_year: int, max_year: int) -> Document | None:
    doc_id = rec.get("id") or rec.get("doc_id")
    if not doc_id:
        return None
    try:
        year = int(rec["year"])
    except (KeyError, TypeError, ValueError):
        return None
    if not (min_year <= year <= max_year):
        return None
    title = str(rec.get("title") or "")
    body = rec.get("abstract")
    if body is None:
        body = rec.get("body")
    return Document(doc_id=str(doc_id), title=title, body=str(body or ""), year=year)


def load_citations(path, corpus: Corpus) -> Corpus:
    """Attach citation edges from a src,dst CSV to a loaded corpus.

    Edges with an endpoint outside the corpus are dropped and counted; more
    than 50% dangling is fatal (the id spaces do not match). Self-citations
    are dropped. Duplicate (src, dst) rows collapse into one edge whose
    multiplicity records the raw count.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise CorpusError(f"cannot read citations file {path}: {exc}") from exc

    counts: dict[tuple[str, str], int] = {}
    total = dangling = selfcite = 0
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            log.warning("empty citations file %s", path)
            header = []
        if header and [h.strip().lower() for h in header[:2]] != ["src", "dst"]:
            # no header row: treat the first line as data
            reader = _chain_row(header, reader)
        for row in reader:
            if len(row) < 2:
                continue
            total += 1
            src, dst = row[0].strip(), row[1].strip()
            if src == dst:
                selfcite += 1
                continue
            if src not in corpus.documents or dst not in corpus.documents:
                dangling += 1
                continue
            counts[(src, dst)] = counts.get((src, dst), 0) + 1

    if total and dangling > 0.5 * total:
        raise CorpusError(
            f"{dangling}/{total} citation edges are dangling; document and citation id spaces do not match"
        )

    corpus.citations = [CitationEdge(s, d, m) for (s, d), m in counts.items()]
    corpus.dangling_dropped = dangling
    corpus.self_citations_dropped = selfcite
    corpus.duplicates_collapsed = sum(m - 1 for m in counts.values())
    if dangling:
        log.warning("%d dangling citation edges dropped", dangling)
    return corpus


def _chain_row(first, rest):
    yield first
    yield from rest


def build_timeline(corpus: Corpus, window_years: int, overlap_years: int = 0) -> Timeline:
    """Cover [min corpus year, max corpus year] with fixed-width windows.

    Windows are window_years wide (inclusive year ranges) and step by
    window_years - overlap_years, so consecutive windows share overlap_years
    years. A corpus narrower than one window yields a single period.
    """
    if window_years < 1:
        raise ValueError(f"window_years must be >= 1, got {window_years}")
    if not (0 <= overlap_years < window_years):
        raise ValueError(f"overlap_years must be in [0, window_years), got {overlap_years}")
    if not corpus.documents:
        raise CorpusError("cannot build a timeline over an empty corpus")

    lo, hi = corpus.year_span()
    step = window_years - overlap_years
    periods = []
    start = lo
    while True:
        periods.append(Period(start, start + window_years - 1))
        if start + window_years - 1 >= hi:
            break
        start += step
    if len(periods) == 1:
        log.warning(
            "corpus year span %d-%d fits inside a single %d-year window; dynamics are degenerate",
            lo, hi, window_years,
        )
    timeline = Timeline(periods=periods, overlap=overlap_years)
    corpus.timeline = timeline
    return timeline


def validate(corpus: Corpus) -> ValidationReport:
    """Tally corpus anomalies. Anachronistic citations (citing an article with a
    later year) are counted but retained: period-ordered graph construction
    already ignores them."""
    anachronistic = 0
    for edge in corpus.citations:
        if corpus.documents[edge.src].year < corpus.documents[edge.dst].year:
            anachronistic += edge.multiplicity
    return ValidationReport(
        documents=len(corpus.documents),
        edges=len(corpus.citations),
        malformed_records=corpus.malformed_records,
        dangling_dropped=corpus.dangling_dropped,
        self_citations_dropped=corpus.self_citations_dropped,
        duplicates_collapsed=corpus.duplicates_collapsed,
        anachronistic=anachronistic,
        periods=len(corpus.timeline) if corpus.timeline else 0,
    )


def write_corpus_files(corpus: Corpus, documents_path, citations_path) -> None:
    """Write the standard documents.jsonl / citations.csv pair."""
    lines = []
    for doc in corpus.documents.values():
        lines.append(json.dumps(
            {"id": doc.doc_id, "title": doc.title, "abstract": doc.body or None, "year": doc.year},
            sort_keys=True, ensure_ascii=False,
        ))
    from .util import atomic_write_text

    atomic_write_text(documents_path, "\n".join(lines) + "\n")
    rows = ["src,dst"]
    for edge in corpus.citations:
        rows.extend([f"{edge.src},{edge.dst}"] * edge.multiplicity)
    atomic_write_text(citations_path, "\n".join(rows) + "\n")
