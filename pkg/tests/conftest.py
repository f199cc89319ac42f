from __future__ import annotations

import json

import numpy as np
import pytest

from atem.corpus import CitationEdge, Corpus, Document, build_timeline


def make_corpus(doc_years: dict[str, int], citations: list[tuple[str, str]] | None = None,
                window_years: int = 1, overlap_years: int = 0,
                texts: dict[str, str] | None = None) -> Corpus:
    """Hand-built corpus for unit tests."""
    corpus = Corpus()
    texts = texts or {}
    for doc_id, year in doc_years.items():
        corpus.documents[doc_id] = Document(
            doc_id=doc_id, title=texts.get(doc_id, f"title {doc_id}"),
            body="", year=year,
        )
    if citations:
        counts: dict[tuple[str, str], int] = {}
        for src, dst in citations:
            counts[(src, dst)] = counts.get((src, dst), 0) + 1
        corpus.citations = [CitationEdge(s, d, m) for (s, d), m in counts.items()]
    build_timeline(corpus, window_years, overlap_years)
    return corpus


def write_jsonl(path, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tiny_corpus_files(tmp_path):
    """documents.jsonl + citations.csv for three documents a, b, c."""
    docs = tmp_path / "documents.jsonl"
    write_jsonl(docs, [
        {"id": "a", "title": "alpha paper", "abstract": "first study", "year": 2000},
        {"id": "b", "title": "beta paper", "abstract": "second study", "year": 2001},
        {"id": "c", "title": "gamma paper", "abstract": None, "year": 2002},
    ])
    cits = tmp_path / "citations.csv"
    cits.write_text("src,dst\nb,a\nc,b\n")
    return docs, cits
