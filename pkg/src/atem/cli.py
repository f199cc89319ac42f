"""Command line entry point.

Subcommands mirror the pipeline stages; `run` chains them. A TOML config
file provides defaults, flags override it, and every artifact lands in the
working directory.

    atem synth --workdir work
    atem run --all --workdir work --seed 42 --deterministic
    atem detect --mode knn --k 10 --max-dist 0.2 --min-norm 0.22 --workdir work
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .pipeline import (
    EXIT_BAD_PARAMS,
    STAGE_ORDER,
    BadParams,
    PipelineConfig,
    run_all,
    run_stage,
)

log = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted both before and after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="TOML config file")
    common.add_argument("--workdir", default=argparse.SUPPRESS,
                        help="artifact directory (default: work)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="global seed; per-stage seeds derive from it")
    common.add_argument("--deterministic", action="store_true", default=argparse.SUPPRESS,
                        help="force single-threaded numeric paths")
    common.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="atem",
        description="Evolving topics, topic-citation graphs, and emerging-topic detection.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_stage(name: str, **kwargs) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], **kwargs)

    run_p = add_stage("run", help="run pipeline stages in order")
    run_p.add_argument("--all", action="store_true", help="run every stage (default)")
    run_p.add_argument("--stages", help="comma-separated subset, in order")
    run_p.add_argument("--force", action="store_true", help="ignore the stage cache")

    synth_p = add_stage("synth", help="generate a synthetic benchmark corpus")
    synth_p.add_argument("--spec", help="spec json; defaults to the stock benchmark")
    synth_p.add_argument("--out", help="output directory (defaults to workdir)")

    ingest_p = add_stage("ingest", help="validate corpus and citations, build the timeline")
    ingest_p.add_argument("--report", help="write the validation report here instead of stdout")

    embed_p = add_stage("embed", help="train or load document vectors")
    embed_p.add_argument("--dim", type=int)
    embed_p.add_argument("--epochs", type=int)
    embed_p.add_argument("--window", type=int)
    embed_p.add_argument("--load", help="precomputed vectors file instead of training")

    cluster_p = add_stage("cluster", help="content clusters, communities, aggregation")
    cluster_p.add_argument("--min-cluster-size", type=int)
    cluster_p.add_argument("--resolution", type=float)
    cluster_p.add_argument("--reduce", help="identity or pca:<dim>")

    topics_p = add_stage("topics", help="slice topics over the timeline and label them")
    topics_p.add_argument("--min-docs", type=int)
    topics_p.add_argument("--top-n", type=int)

    add_stage("graph", help="project citations into the topic graph")

    dyn_p = add_stage("dynembed", help="per-period topic embeddings")
    dyn_p.add_argument("--dim", type=int)
    dyn_p.add_argument("--walks-per-node", type=int)
    dyn_p.add_argument("--walk-length", type=int)
    dyn_p.add_argument("--half-life", type=float)
    dyn_p.add_argument("--epochs-per-period", type=int)

    detect_p = add_stage("detect", help="emerging-topic detection")
    detect_p.add_argument("--mode", choices=["knn", "cluster"])
    detect_p.add_argument("--k", type=int)
    detect_p.add_argument("--max-dist", type=float)
    detect_p.add_argument("--min-norm", type=float)

    eval_p = add_stage("eval", help="neighbor-vs-connected comparison protocol")
    eval_p.add_argument("--sample-size", type=int)
    eval_p.add_argument("--count", type=int)
    eval_p.add_argument("--max-len", type=int)

    add_stage("report", help="plot-ready summary tables")
    return parser


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    config_path = getattr(args, "config", None)
    cfg = PipelineConfig.from_file(config_path) if config_path else PipelineConfig()
    if getattr(args, "workdir", None):
        cfg.workdir = args.workdir
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "deterministic", False):
        cfg.deterministic = True
        cfg.embed.workers = 1

    def take(obj, attr, value):
        if value is not None:
            setattr(obj, attr, value)

    cmd = args.command
    if cmd == "synth":
        take(cfg.synth, "spec", args.spec)
        if args.out:
            cfg.workdir = args.out
    elif cmd == "embed":
        take(cfg.embed, "dim", args.dim)
        take(cfg.embed, "epochs", args.epochs)
        take(cfg.embed, "window", args.window)
        take(cfg.embed, "load", args.load)
    elif cmd == "cluster":
        take(cfg.cluster, "min_cluster_size", args.min_cluster_size)
        take(cfg.cluster, "resolution", args.resolution)
        take(cfg.cluster, "reduce", args.reduce)
    elif cmd == "topics":
        take(cfg.topics, "min_docs", args.min_docs)
        take(cfg.topics, "top_n", args.top_n)
    elif cmd == "dynembed":
        take(cfg.dynembed, "dim", args.dim)
        take(cfg.dynembed, "walks_per_node", args.walks_per_node)
        take(cfg.dynembed, "walk_length", args.walk_length)
        take(cfg.dynembed, "half_life_periods", args.half_life)
        take(cfg.dynembed, "epochs_per_period", args.epochs_per_period)
    elif cmd == "detect":
        take(cfg.detect, "mode", args.mode)
        take(cfg.detect, "k", args.k)
        take(cfg.detect, "max_distance", args.max_dist)
        take(cfg.detect, "min_norm", args.min_norm)
    elif cmd == "eval":
        take(cfg.eval, "sample_size", args.sample_size)
        take(cfg.eval, "count", args.count)
        take(cfg.eval, "max_len", args.max_len)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _build_config(args)
    except (BadParams, OSError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS

    if args.command == "run":
        stages = None
        if args.stages:
            stages = [s.strip() for s in args.stages.split(",") if s.strip()]
            unknown = [s for s in stages if s not in STAGE_ORDER]
            if unknown:
                print(f"unknown stages: {', '.join(unknown)}", file=sys.stderr)
                return EXIT_BAD_PARAMS
        return run_all(cfg, stages=stages, force=args.force)
    code = run_stage(args.command, cfg)
    if args.command == "ingest" and code == 0:
        report_text = (Path(cfg.workdir) / "validation.json").read_text()
        if getattr(args, "report", None):
            Path(args.report).write_text(report_text)
        else:
            print(report_text, end="")
    return code


if __name__ == "__main__":
    sys.exit(main())
