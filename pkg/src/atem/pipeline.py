"""Staged pipeline over persisted artifacts.

Every stage reads files from the working directory and writes its outputs
atomically, recording parameters, derived seed, and input-file hashes in
manifest.json. A stage whose recorded inputs and parameters are unchanged is
skipped on rerun, and any stage's output can be replaced by a hand-written
file with the same schema (the downstream stages cannot tell the difference).
"""

from __future__ import annotations

import dataclasses
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import clustering, corpus as corpus_mod, doc_embedding, emergence, evaluation
from . import graph_embedding, synthetic, topic_graph, topics as topics_mod
from .util import atomic_write_text, canonical_json, file_sha256, stable_seed

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISSING_UPSTREAM = 2
EXIT_BAD_PARAMS = 3

STAGE_ORDER = ["synth", "ingest", "embed", "cluster", "topics", "graph",
               "dynembed", "detect", "eval", "report"]


class MissingArtifact(Exception):
    def __init__(self, artifact: str, stage: str):
        super().__init__(f"missing: {artifact} (run stage {stage} first)")
        self.artifact = artifact
        self.stage = stage


class BadParams(Exception):
    pass


@dataclass
class TimelineConfig:
    window_years: int = 1
    overlap_years: int = 0


@dataclass
class EmbedConfig:
    dim: int = 48
    epochs: int = 12
    window: int = 5
    negatives: int = 5
    learning_rate: float = 0.025
    min_token_count: int = 3
    workers: int = 1
    load: str | None = None  # path to precomputed vectors


@dataclass
class ClusterConfig:
    reduce: str = "pca:16"  # "pca:<dim>" or "identity"
    min_cluster_size: int = 5
    eps_quantile: float = 0.9
    k_core: int = 5
    resolution: float = 1.0
    passes: int = 10


@dataclass
class TopicsConfig:
    min_docs: int = 3
    top_n: int = 10
    rep: str = "ctfidf"  # or "nearest_words"


@dataclass
class DynembedConfig:
    dim: int = 32
    walks_per_node: int = 10
    walk_length: int = 8
    half_life_periods: float = 1.0
    epochs_per_period: int = 5
    negatives: int = 5
    learning_rate: float = 0.025


@dataclass
class DetectConfig:
    mode: str = "knn"
    k: int = 10
    max_distance: float = 0.2
    min_norm: float = 0.22


@dataclass
class EvalConfig:
    sample_size: int = 200
    count: int = 10
    max_len: int = 3


@dataclass
class SynthConfig:
    spec: str | None = None  # path to a spec json; default benchmark otherwise


@dataclass
class PipelineConfig:
    workdir: str = "work"
    documents: str | None = None  # defaults to <workdir>/documents.jsonl
    citations: str | None = None
    seed: int = 42
    deterministic: bool = False
    timeline: TimelineConfig = field(default_factory=TimelineConfig)
    embed: EmbedConfig = field(default_factory=EmbedConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    topics: TopicsConfig = field(default_factory=TopicsConfig)
    dynembed: DynembedConfig = field(default_factory=DynembedConfig)
    detect: DetectConfig = field(default_factory=DetectConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)

    def documents_path(self) -> Path:
        return Path(self.documents) if self.documents else Path(self.workdir) / "documents.jsonl"

    def citations_path(self) -> Path:
        return Path(self.citations) if self.citations else Path(self.workdir) / "citations.csv"

    def stage_seed(self, stage: str) -> int:
        return stable_seed(self.seed, stage)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        try:
            import tomllib  # py311+
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        cfg = cls()
        sections = {f.name: f for f in dataclasses.fields(cls)}
        for key, value in raw.items():
            if key not in sections:
                raise BadParams(f"unknown config key {key!r}")
            f = sections[key]
            if dataclasses.is_dataclass(f.type) or isinstance(value, dict):
                sub = getattr(cfg, key)
                if not dataclasses.is_dataclass(sub):
                    raise BadParams(f"config key {key!r} does not take a table")
                known = {sf.name for sf in dataclasses.fields(sub)}
                for sub_key, sub_value in value.items():
                    if sub_key not in known:
                        raise BadParams(f"unknown config key {key}.{sub_key}")
                    setattr(sub, sub_key, sub_value)
            else:
                setattr(cfg, key, value)
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# --- manifest ----------------------------------------------------------------

def _manifest_path(cfg: PipelineConfig) -> Path:
    return Path(cfg.workdir) / "manifest.json"


def _load_manifest(cfg: PipelineConfig) -> dict:
    path = _manifest_path(cfg)
    if path.exists():
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    return {"stages": {}}


def _save_manifest(cfg: PipelineConfig, manifest: dict) -> None:
    atomic_write_text(_manifest_path(cfg), canonical_json(manifest) + "\n")


def _hash_inputs(paths: list[Path], workdir: Path) -> dict[str, str]:
    out = {}
    for p in sorted(paths, key=str):
        try:
            key = str(p.resolve().relative_to(workdir.resolve()))
        except ValueError:
            key = str(p)
        out[key] = file_sha256(p)
    return out


_DISPLAY_NAMES = {"embedding_manifest.json": "embeddings"}


def _require(path: Path, artifact: str, stage: str) -> Path:
    if not path.exists():
        raise MissingArtifact(_DISPLAY_NAMES.get(artifact, artifact), stage)
    return path


# --- stage implementations -----------------------------------------------------

def _load_corpus_with_timeline(cfg: PipelineConfig, citations: bool = True):
    c = corpus_mod.load_corpus(cfg.documents_path())
    if citations:
        corpus_mod.load_citations(cfg.citations_path(), c)
    corpus_mod.build_timeline(c, cfg.timeline.window_years, cfg.timeline.overlap_years)
    return c


def _stage_synth(cfg: PipelineConfig, workdir: Path) -> list[Path]:
    if cfg.synth.spec:
        with open(cfg.synth.spec, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        events = [synthetic.EmergenceEvent(**e) for e in raw.pop("events", [])]
        spec = synthetic.SynthSpec(events=events, **raw)
        spec.seed = cfg.stage_seed("synth") if "seed" not in raw else spec.seed
    else:
        spec = synthetic.default_spec(seed=cfg.stage_seed("synth"))
    corpus, truth = synthetic.generate_corpus(spec)
    corpus_mod.write_corpus_files(corpus, workdir / "documents.jsonl", workdir / "citations.csv")
    atomic_write_text(workdir / "truth.json", truth.to_json() + "\n")
    topics_mod.write_topic_set(synthetic.truth_topic_set(truth), workdir / "topics_truth.jsonl")
    return [workdir / "documents.jsonl", workdir / "citations.csv",
            workdir / "truth.json", workdir / "topics_truth.jsonl"]


def _stage_ingest(cfg: PipelineConfig, workdir: Path) -> list[Path]:
    _require(cfg.documents_path(), "documents", "synth")
    _require(cfg.citations_path(), "citations", "synth")
    c = _load_corpus_with_timeline(cfg)
    report = corpus_mod.validate(c)
    atomic_write_text(workdir / "validation.json", report.to_json() + "\n")
    timeline = {"periods": [[p.start_year, p.end_year] for p in c.timeline.periods],
                "overlap": c.timeline.overlap}
    atomic_write_text(workdir / "timeline.json", canonical_json(timeline) + "\n")
    return [workdir / "validation.json", workdir / "timeline.json"]


def _stage_embed(cfg: PipelineConfig, workdir: Path) -> list[Path]:
    _require(cfg.documents_path(), "documents", "synth")
    c = _load_corpus_with_timeline(cfg, citations=False)
    out = [workdir / "embeddings.vec"]
    if cfg.embed.load:
        emb = doc_embedding.load_doc_embeddings(cfg.embed.load, c)
        doc_embedding.save_vectors(emb.doc_vectors, workdir / "embeddings.vec")
    else:
        params = doc_embedding.EmbedParams(
            dim=cfg.embed.dim, epochs=cfg.embed.epochs, window=cfg.embed.window,
            negatives=cfg.embed.negatives, learning_rate=cfg.embed.learning_rate,
            min_token_count=cfg.embed.min_token_count, seed=cfg.stage_seed("embed"),
            workers=1 if cfg.deterministic else cfg.embed.workers,
        )
        emb = doc_embedding.train_doc_embeddings(c, params)
        doc_embedding.save_vectors(emb.doc_vectors, workdir / "embeddings.vec")
        token_by_id = {i: t for t, i in emb.vocab.items()}
        doc_embedding.save_vectors(
            {token_by_id[i]: v for i, v in sorted(emb.word_vectors.items())},
            workdir / "word_vectors.vec")
        out.append(workdir / "word_vectors.vec")
    return out


def _stage_cluster(cfg: PipelineConfig, workdir: Path) -> list[Path]:
    _require(workdir / "embeddings.vec", "embeddings.vec", "embed")
    c = _load_corpus_with_timeline(cfg)
    emb = doc_embedding.load_doc_embeddings(workdir / "embeddings.vec", c)

    reduce_spec = cfg.cluster.reduce
    if reduce_spec == "identity":
        reduced = emb.doc_vectors
    elif reduce_spec.startswith("pca:"):
        reduced = clustering.reduce_dimensions(emb.doc_vectors, int(reduce_spec.split(":", 1)[1]), "pca")
    else:
        raise BadParams(f"unknown reduce spec {reduce_spec!r} (use identity or pca:<dim>)")

    content = clustering.density_cluster(reduced, clustering.DensityParams(
        min_cluster_size=cfg.cluster.min_cluster_size,
        eps_quantile=cfg.cluster.eps_quantile,
        k_core=cfg.cluster.k_core,
    ))
    communities = clustering.detect_communities(c, clustering.CommunityParams(
        resolution=cfg.cluster.resolution, passes=cfg.cluster.passes,
        seed=cfg.stage_seed("cluster"),
    ))
    tset = clustering.aggregate(content, communities)

    atomic_write_text(workdir / "content_clusters.json",
                      canonical_json({k: v for k, v in sorted(content.labels.items())}) + "\n")
    atomic_write_text(workdir / "communities.json",
                      canonical_json({k: v for k, v in sorted(communities.labels.items())}) + "\n")
    topics_mod.write_topic_set(tset, workdir / "topics.jsonl")
    return [workdir / "content_clusters.json", workdir / "communities.json", workdir / "topics.jsonl"]


def _stage_topics(cfg: PipelineConfig, workdir: Path) -> list[Path]:
    _require(workdir / "topics.jsonl", "topics.jsonl", "cluster")
    c = _load_corpus_with_timeline(cfg)
    tset = topics_mod.read_topic_set(workdir / "topics.jsonl")
    evolving = topics_mod.slice_topics(tset, c, min_docs=cfg.topics.min_docs)
    if cfg.topics.rep == "ctfidf":
        evolving = topics_mod.represent_ctfidf(evolving, c, top_n=cfg.topics.top_n)
    elif cfg.topics.rep == "nearest_words":
        raise BadParams("nearest_words representation requires in-process trained word "
                        "vectors; use the library API or rep = 'ctfidf'")
    else:
        raise BadParams(f"unknown representation {cfg.topics.rep!r}")
    topics_mod.write_evolving_topics(evolving, workdir / "evolving_topics.jsonl")
    return [workdir / "evolving_topics.jsonl"]


def _stage_graph(cfg: PipelineConfig, workdir: Path) -> list[Path]:
    _require(workdir / "evolving_topics.jsonl", "evolving_topics.jsonl", "topics")
    c = _load_corpus_with_timeline(cfg)
    evolving = topics_mod.read_evolving_topics(workdir / "evolving_topics.jsonl", len(c.timeline))
    graph = topic_graph.build_topic_citation_graph(evolving, c)
    topic_graph.write_topic_graph(graph, workdir / "topic_graph.csv")
    atomic_write_text(workdir / "graph_diagnostics.json", canonical_json({
        "unassigned": graph.diagnostics.unassigned,
        "acausal": graph.diagnostics.acausal,
        "total_weight": graph.total_weight(),
    }) + "\n")
    return [workdir / "topic_graph.csv", workdir / "graph_diagnostics.json"]


def _stage_dynembed(cfg: PipelineConfig, workdir: Path) -> list[Path]:
    _require(workdir / "topic_graph.csv", "topic_graph.csv", "graph")
    c = _load_corpus_with_timeline(cfg, citations=False)
    graph = topic_graph.read_topic_graph(workdir / "topic_graph.csv", len(c.timeline))
    params = graph_embedding.WalkParams(
        walks_per_node=cfg.dynembed.walks_per_node, walk_length=cfg.dynembed.walk_length,
        half_life_periods=cfg.dynembed.half_life_periods, dim=cfg.dynembed.dim,
        epochs_per_period=cfg.dynembed.epochs_per_period, negatives=cfg.dynembed.negatives,
        learning_rate=cfg.dynembed.learning_rate, seed=cfg.stage_seed("dynembed"),
    )
    series = graph_embedding.train_dynamic_embeddings(graph, len(c.timeline), params)
    files = graph_embedding.save_series(series, workdir, params)
    return [workdir / f for f in files] + [workdir / "embedding_manifest.json"]


def _stage_detect(cfg: PipelineConfig, workdir: Path) -> list[Path]:
    _require(workdir / "embedding_manifest.json", "embeddings", "dynembed")
    _require(workdir / "evolving_topics.jsonl", "evolving_topics.jsonl", "topics")
    c = _load_corpus_with_timeline(cfg)
    evolving = topics_mod.read_evolving_topics(workdir / "evolving_topics.jsonl", len(c.timeline))
    topic_map = {t.topic_id: t for t in evolving}
    series = graph_embedding.load_series(workdir)
    params = emergence.DetectionParams(
        k=cfg.detect.k, max_distance=cfg.detect.max_distance,
        min_norm=cfg.detect.min_norm, mode=cfg.detect.mode,
    )
    params.validate()
    records = []
    if params.mode == "knn":
        cache: dict = {}
        for topic_id in sorted(topic_map):
            for period in range(series.n_periods()):
                result = emergence.detect_new_neighbors(series, topic_id, period, params, _cache=cache)
                for tx, dist in result.neighbors:
                    if tx not in topic_map:
                        continue
                    pair = emergence.form_emerging_pair(topic_id, tx, period, topic_map, c, distance=dist)
                    score = evaluation.predictability(pair.past_count, pair.future_count)
                    records.append(emergence.emerging_record(pair, score))
    else:
        for members, period in emergence.detect_emerging_sets(series, params):
            members = [m for m in members if m in topic_map]
            if len(members) < 2:
                continue
            group = emergence.form_emerging_topic(list(members), period, topic_map, c)
            score = evaluation.predictability(group.past_count, group.future_count)
            records.append(emergence.emerging_record(group, score))
    emergence.write_emerging(records, workdir / "emerging.jsonl")
    return [workdir / "emerging.jsonl"]


def _stage_eval(cfg: PipelineConfig, workdir: Path) -> list[Path]:
    _require(workdir / "embedding_manifest.json", "embeddings", "dynembed")
    _require(workdir / "evolving_topics.jsonl", "evolving_topics.jsonl", "topics")
    _require(workdir / "topic_graph.csv", "topic_graph.csv", "graph")
    c = _load_corpus_with_timeline(cfg)
    evolving = topics_mod.read_evolving_topics(workdir / "evolving_topics.jsonl", len(c.timeline))
    graph = topic_graph.read_topic_graph(workdir / "topic_graph.csv", len(c.timeline))
    series = graph_embedding.load_series(workdir)
    params = emergence.DetectionParams(
        k=cfg.detect.k, max_distance=cfg.detect.max_distance,
        min_norm=cfg.detect.min_norm, mode="knn",
    )
    report = evaluation.run_protocol(
        c, evolving, graph, series, params,
        sample_size=cfg.eval.sample_size, count=cfg.eval.count,
        max_len=cfg.eval.max_len, seed=cfg.stage_seed("eval"),
    )
    atomic_write_text(workdir / "report.csv", report.to_csv())
    atomic_write_text(workdir / "aggregates.json", report.aggregates_json() + "\n")
    atomic_write_text(workdir / "correlations.csv", report.correlations_csv())
    return [workdir / "report.csv", workdir / "aggregates.json", workdir / "correlations.csv"]


def _stage_report(cfg: PipelineConfig, workdir: Path) -> list[Path]:
    _require(workdir / "aggregates.json", "aggregates.json", "eval")
    _require(workdir / "topic_graph.csv", "topic_graph.csv", "graph")
    c = _load_corpus_with_timeline(cfg, citations=False)
    graph = topic_graph.read_topic_graph(workdir / "topic_graph.csv", len(c.timeline))
    series = graph_embedding.load_series(workdir)
    report_dir = workdir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    out = []

    # per-topic citation series: outgoing/incoming projected weight per period
    rows = ["topic,period,out_weight,in_weight"]
    out_w: dict = {}
    in_w: dict = {}
    for (src, dst, j), w in graph.edges.items():
        out_w[(src, j)] = out_w.get((src, j), 0) + w
        in_w[(dst, j)] = in_w.get((dst, j), 0) + w
    for topic in sorted(graph.nodes):
        for j in range(graph.n_periods):
            o, i = out_w.get((topic, j), 0), in_w.get((topic, j), 0)
            if o or i:
                rows.append(f"{topic},{j},{o},{i}")
    path = report_dir / "citation_series.csv"
    atomic_write_text(path, "\n".join(rows) + "\n")
    out.append(path)

    # detected pairs: co-citing topic counts and distance per period
    pairs = []
    emerging_path = workdir / "emerging.jsonl"
    if emerging_path.exists():
        with open(emerging_path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    pairs.append((rec["t"], rec["tx"], rec["period"]))
    citers: dict = {}
    for (src, dst, j), w in graph.edges.items():
        if src != dst:
            citers.setdefault((dst, j), set()).add(src)
    rows = ["t,tx,emergence_period,period,co_citing_topics"]
    for t, tx, k in sorted(set(pairs)):
        for j in range(graph.n_periods):
            common = citers.get((t, j), set()) & citers.get((tx, j), set())
            rows.append(f"{t},{tx},{k},{j},{len(common)}")
    path = report_dir / "co_citation_counts.csv"
    atomic_write_text(path, "\n".join(rows) + "\n")
    out.append(path)

    rows = ["t,tx,emergence_period,period,distance"]
    for t, tx, k in sorted(set(pairs)):
        for j in range(series.n_periods()):
            va, vb = series.vector(t, j), series.vector(tx, j)
            if va is None or vb is None:
                continue
            try:
                d = graph_embedding.embedding_distance(va, vb)
            except ValueError:
                continue
            rows.append(f"{t},{tx},{k},{j},{d!r}")
    path = report_dir / "distance_evolution.csv"
    atomic_write_text(path, "\n".join(rows) + "\n")
    out.append(path)

    with open(workdir / "aggregates.json", "r", encoding="utf-8") as fh:
        agg = json.load(fh)
    rows = ["source,year,mean_emergence"]
    for source in ("N", "C"):
        for year, val in agg.get("mean_emergence_by_year", {}).get(source, {}).items():
            rows.append(f"{source},{year},{'' if val is None else repr(val)}")
    path = report_dir / "predictability_by_year.csv"
    atomic_write_text(path, "\n".join(rows) + "\n")
    out.append(path)

    rows = ["period,n,c,cn"]
    for period, counts in agg.get("counts_per_period", {}).items():
        rows.append(f"{period},{counts['n']},{counts['c']},{counts['cn']}")
    path = report_dir / "counts_per_period.csv"
    atomic_write_text(path, "\n".join(rows) + "\n")
    out.append(path)
    return out


_STAGES = {
    "synth": (_stage_synth, []),
    "ingest": (_stage_ingest, ["documents", "citations"]),
    "embed": (_stage_embed, ["documents"]),
    "cluster": (_stage_cluster, ["documents", "citations", "embeddings.vec"]),
    "topics": (_stage_topics, ["documents", "topics.jsonl"]),
    "graph": (_stage_graph, ["documents", "citations", "evolving_topics.jsonl"]),
    "dynembed": (_stage_dynembed, ["documents", "topic_graph.csv"]),
    "detect": (_stage_detect, ["documents", "embedding_manifest.json", "evolving_topics.jsonl"]),
    "eval": (_stage_eval, ["documents", "citations", "evolving_topics.jsonl",
                           "topic_graph.csv", "embedding_manifest.json"]),
    "report": (_stage_report, ["documents", "topic_graph.csv", "aggregates.json",
                               "embedding_manifest.json"]),
}


def _stage_inputs(cfg: PipelineConfig, names: list[str]) -> list[Path]:
    workdir = Path(cfg.workdir)
    paths = []
    for name in names:
        if name == "documents":
            paths.append(cfg.documents_path())
        elif name == "citations":
            paths.append(cfg.citations_path())
        else:
            paths.append(workdir / name)
    return paths


def _stage_params(cfg: PipelineConfig, stage: str) -> dict:
    block = {
        "synth": cfg.synth, "ingest": cfg.timeline, "embed": cfg.embed,
        "cluster": cfg.cluster, "topics": cfg.topics, "graph": {},
        "dynembed": cfg.dynembed, "detect": cfg.detect, "eval": cfg.eval,
        "report": {},
    }[stage]
    params = dataclasses.asdict(block) if dataclasses.is_dataclass(block) else dict(block)
    params["timeline"] = dataclasses.asdict(cfg.timeline)
    params["deterministic"] = cfg.deterministic
    return params


def run_stage(stage: str, cfg: PipelineConfig, force: bool = False) -> int:
    """Run one stage; returns a process exit code (0 ok, 2 missing upstream,
    3 invalid parameters)."""
    if stage not in _STAGES:
        log.error("unknown stage %r", stage)
        return EXIT_BAD_PARAMS
    fn, input_names = _STAGES[stage]
    workdir = Path(cfg.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    seed = cfg.stage_seed(stage)

    try:
        inputs = _stage_inputs(cfg, input_names)
        for path, name in zip(inputs, input_names):
            producer = "synth" if name in ("documents", "citations") else _producer_of(name)
            _require(path, name, producer)
        manifest = _load_manifest(cfg)
        params = _stage_params(cfg, stage)
        hashes = _hash_inputs(inputs, workdir)
        entry = manifest["stages"].get(stage)
        if (not force and entry and entry.get("params") == params
                and entry.get("inputs") == hashes
                and all((workdir / f).exists() for f in entry.get("outputs", []))):
            log.info("stage %s unchanged; skipping", stage)
            return EXIT_OK
        outputs = fn(cfg, workdir)
        manifest = _load_manifest(cfg)
        manifest["stages"][stage] = {
            "params": params,
            "seed": seed,
            "inputs": hashes,
            "outputs": sorted(str(p.relative_to(workdir)) for p in outputs),
        }
        _save_manifest(cfg, manifest)
        log.info("stage %s done: %d artifacts", stage, len(outputs))
        return EXIT_OK
    except MissingArtifact as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_MISSING_UPSTREAM
    except (BadParams, ValueError) as exc:
        print(f"invalid parameters for stage {stage}: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS
    except (corpus_mod.CorpusError, doc_embedding.EmbeddingError,
            topics_mod.RepresentationError) as exc:
        print(f"stage {stage} failed: {exc}", file=sys.stderr)
        return 1


def _producer_of(artifact: str) -> str:
    table = {
        "embeddings.vec": "embed",
        "topics.jsonl": "cluster",
        "evolving_topics.jsonl": "topics",
        "topic_graph.csv": "graph",
        "embedding_manifest.json": "dynembed",
        "emerging.jsonl": "detect",
        "aggregates.json": "eval",
    }
    return table.get(artifact, "synth")


def run_all(cfg: PipelineConfig, stages: list[str] | None = None, force: bool = False) -> int:
    for stage in stages or STAGE_ORDER:
        code = run_stage(stage, cfg, force=force)
        if code != EXIT_OK:
            return code
    return EXIT_OK
