from __future__ import annotations

import json
from pathlib import Path

import pytest

from atem.cli import main
from atem.pipeline import (
    EXIT_BAD_PARAMS,
    EXIT_MISSING_UPSTREAM,
    EXIT_OK,
    BadParams,
    PipelineConfig,
    run_all,
    run_stage,
)


SMALL_SPEC = {
    "n_topics": 4,
    "docs_per_topic_per_period": 8,
    "n_periods": 6,
    "vocab_per_topic": 15,
    "background_vocab": 40,
    "intra_cite_prob": 0.08,
    "cross_cite_prob": 0.002,
    "seed": 11,
    "events": [
        {"topic_a": 0, "topic_b": 1, "period": 3, "co_cite_boost": 0.5, "shared_docs_after": 6}
    ],
}


@pytest.fixture()
def small_cfg(tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(SMALL_SPEC))
    cfg = PipelineConfig(workdir=str(tmp_path / "work"), seed=7, deterministic=True)
    cfg.synth.spec = str(spec_path)
    cfg.embed.dim = 24
    cfg.embed.epochs = 6
    cfg.cluster.reduce = "pca:8"
    return cfg


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("pipeline")
    spec_path = tmp / "spec.json"
    spec_path.write_text(json.dumps(SMALL_SPEC))
    cfg = PipelineConfig(workdir=str(tmp / "work"), seed=7, deterministic=True)
    cfg.synth.spec = str(spec_path)
    cfg.embed.dim = 24
    cfg.embed.epochs = 6
    cfg.cluster.reduce = "pca:8"
    assert run_all(cfg) == EXIT_OK
    return cfg


class TestStages:
    def test_all_artifacts_present(self, full_run):
        workdir = Path(full_run.workdir)
        for name in ("documents.jsonl", "citations.csv", "truth.json", "validation.json",
                     "embeddings.vec", "topics.jsonl", "evolving_topics.jsonl",
                     "topic_graph.csv", "embedding_manifest.json", "emerging.jsonl",
                     "report.csv", "aggregates.json", "correlations.csv", "manifest.json"):
            assert (workdir / name).exists(), name

    def test_report_directory_has_summaries(self, full_run):
        report_dir = Path(full_run.workdir) / "report"
        csvs = sorted(p.name for p in report_dir.glob("*.csv"))
        assert len(csvs) >= 5

    def test_emerging_schema(self, full_run):
        with open(Path(full_run.workdir) / "emerging.jsonl", "r", encoding="utf-8") as fh:
            lines = [json.loads(l) for l in fh if l.strip()]
        for rec in lines:
            assert set(rec) == {"t", "tx", "period", "distance", "past_count",
                                "future_count", "emergence", "rep_sample"}

    def test_manifest_tracks_every_stage(self, full_run):
        with open(Path(full_run.workdir) / "manifest.json", "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        for stage in ("synth", "ingest", "embed", "cluster", "topics", "graph",
                      "dynembed", "detect", "eval", "report"):
            entry = manifest["stages"][stage]
            assert "params" in entry and "inputs" in entry and "seed" in entry

    def test_rerun_skips_unchanged_stages(self, full_run, caplog):
        mtime_before = (Path(full_run.workdir) / "embeddings.vec").stat().st_mtime_ns
        with caplog.at_level("INFO"):
            assert run_all(full_run) == EXIT_OK
        assert (Path(full_run.workdir) / "embeddings.vec").stat().st_mtime_ns == mtime_before
        assert sum("skipping" in r.message for r in caplog.records) == 10

    def test_validation_report_contents(self, full_run):
        with open(Path(full_run.workdir) / "validation.json", "r", encoding="utf-8") as fh:
            report = json.load(fh)
        assert report["documents"] > 0 and report["periods"] == 6

    def test_missing_upstream_exit_code(self, tmp_path):
        cfg = PipelineConfig(workdir=str(tmp_path / "empty"), seed=1)
        assert run_stage("detect", cfg) == EXIT_MISSING_UPSTREAM

    def test_missing_upstream_message(self, tmp_path, capsys):
        cfg = PipelineConfig(workdir=str(tmp_path / "empty2"), seed=1)
        run_stage("detect", cfg)
        assert "missing:" in capsys.readouterr().err

    def test_bad_params_exit_code(self, small_cfg):
        assert run_stage("synth", small_cfg) == EXIT_OK
        small_cfg.embed.dim = 1
        assert run_stage("embed", small_cfg) == EXIT_BAD_PARAMS

    def test_unknown_stage(self, small_cfg):
        assert run_stage("nope", small_cfg) == EXIT_BAD_PARAMS

    def test_topic_substitution_supported(self, small_cfg, tmp_path):
        # inject a hand-written topic set; downstream stages consume it as-is
        for stage in ("synth", "ingest", "embed", "cluster"):
            assert run_stage(stage, small_cfg) == EXIT_OK
        workdir = Path(small_cfg.workdir)
        truth_topics = (workdir / "topics_truth.jsonl").read_text()
        (workdir / "topics.jsonl").write_text(truth_topics)
        for stage in ("topics", "graph"):
            assert run_stage(stage, small_cfg) == EXIT_OK
        ids = {json.loads(l)["topic_id"]
               for l in (workdir / "evolving_topics.jsonl").read_text().splitlines() if l}
        assert ids and all(t.startswith("G") for t in ids)


class TestPrecomputedVectors:
    def test_embed_stage_accepts_external_vectors(self, small_cfg, tmp_path):
        import numpy as np

        from atem.corpus import load_corpus
        from atem.doc_embedding import read_vectors, save_vectors

        assert run_stage("synth", small_cfg) == EXIT_OK
        workdir = Path(small_cfg.workdir)
        corpus = load_corpus(workdir / "documents.jsonl")
        rng = np.random.default_rng(0)
        external = tmp_path / "external.vec"
        save_vectors({d: rng.standard_normal(12) for d in corpus.documents}, external)
        small_cfg.embed.load = str(external)
        assert run_stage("ingest", small_cfg) == EXIT_OK
        assert run_stage("embed", small_cfg) == EXIT_OK
        vectors, dim = read_vectors(workdir / "embeddings.vec")
        assert dim == 12 and len(vectors) == len(corpus.documents)
        assert not (workdir / "word_vectors.vec").exists()
        # clustering proceeds on the external vectors
        small_cfg.cluster.reduce = "pca:4"
        assert run_stage("cluster", small_cfg) == EXIT_OK


class TestConfig:
    def test_unknown_key_rejected(self):
        with pytest.raises(BadParams, match="unknown config key"):
            PipelineConfig.from_dict({"nonsense": 1})

    def test_unknown_nested_key_rejected(self):
        with pytest.raises(BadParams, match="embed.bogus"):
            PipelineConfig.from_dict({"embed": {"bogus": 1}})

    def test_toml_roundtrip(self, tmp_path):
        cfg_file = tmp_path / "c.toml"
        cfg_file.write_text(
            'seed = 9\nworkdir = "w"\n\n[embed]\ndim = 32\nepochs = 3\n\n[detect]\nk = 5\n')
        cfg = PipelineConfig.from_file(cfg_file)
        assert cfg.seed == 9 and cfg.embed.dim == 32 and cfg.detect.k == 5

    def test_stage_seeds_stable_and_distinct(self):
        cfg = PipelineConfig(seed=42)
        assert cfg.stage_seed("embed") == PipelineConfig(seed=42).stage_seed("embed")
        assert cfg.stage_seed("embed") != cfg.stage_seed("cluster")


class TestCli:
    def test_synth_subcommand(self, tmp_path):
        code = main(["synth", "--workdir", str(tmp_path / "w"), "--seed", "3"])
        assert code == EXIT_OK
        assert (tmp_path / "w" / "documents.jsonl").exists()
        assert (tmp_path / "w" / "topics_truth.jsonl").exists()

    def test_detect_before_dynembed_exits_2(self, tmp_path, capsys):
        main(["synth", "--workdir", str(tmp_path / "w2")])
        code = main(["detect", "--workdir", str(tmp_path / "w2"),
                     "--mode", "knn", "--k", "10", "--max-dist", "0.2", "--min-norm", "0.22"])
        assert code == EXIT_MISSING_UPSTREAM
        assert "missing: embeddings" in capsys.readouterr().err

    def test_invalid_param_exits_3(self, tmp_path):
        main(["synth", "--workdir", str(tmp_path / "w3")])
        code = main(["embed", "--workdir", str(tmp_path / "w3"), "--dim", "1"])
        assert code == EXIT_BAD_PARAMS

    def test_global_flags_after_subcommand(self, tmp_path):
        code = main(["synth", "--workdir", str(tmp_path / "w4"), "--seed", "5",
                     "--deterministic"])
        assert code == EXIT_OK

    def test_run_subset_of_stages(self, tmp_path):
        wd = str(tmp_path / "w5")
        assert main(["run", "--stages", "synth,ingest", "--workdir", wd]) == EXIT_OK
        assert (tmp_path / "w5" / "validation.json").exists()

    def test_ingest_report_to_stdout(self, tmp_path, capsys):
        wd = str(tmp_path / "w7")
        main(["synth", "--workdir", wd])
        capsys.readouterr()
        assert main(["ingest", "--workdir", wd]) == EXIT_OK
        out = capsys.readouterr().out
        assert '"documents"' in out and '"anachronistic"' in out

    def test_ingest_report_to_file(self, tmp_path, capsys):
        wd = str(tmp_path / "w8")
        main(["synth", "--workdir", wd])
        target = tmp_path / "validation_copy.json"
        capsys.readouterr()
        assert main(["ingest", "--workdir", wd, "--report", str(target)]) == EXIT_OK
        assert json.loads(target.read_text())["documents"] > 0
        assert '"documents"' not in capsys.readouterr().out

    def test_unknown_stage_rejected(self, tmp_path):
        assert main(["run", "--stages", "bogus", "--workdir", str(tmp_path / "w6")]) \
            == EXIT_BAD_PARAMS
