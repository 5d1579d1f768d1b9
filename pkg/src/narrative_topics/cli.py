"""Command-line entry point: ``narrative-topics <subcommand> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, DataError, NarrativeError, StageFailure
from .pipeline import Pipeline, export

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4

STAGE_COMMANDS = {
    "ingest": "ingest",
    "embed": "embed",
    "reduce": "reduce",
    "cluster": "cluster",
    "keywords": "keywords",
    "evaluate": "evaluate",
    "match": "match",
    "sweep": "sweep",
    "origin": "origin",
    "graph": "graph",
    "stats": "stats",
    "precision-sample": "precision-sample",
    "precision-score": "precision-score",
}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold", type=float, help="comment match threshold (default 0.6)")
    p.add_argument("--min-cluster-size", type=int, help="HDBSCAN min_cluster_size (default 10)")
    p.add_argument("--n-neighbors", type=int, help="UMAP n_neighbors (default 15)")
    p.add_argument("--dims", type=int, help="UMAP output dimensions (default 5)")
    p.add_argument("--workdir", type=Path, help="artifact directory (overrides config)")
    p.add_argument("--force", action="store_true", help="rerun the stage even if cached")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="narrative-topics", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run every stage the config allows")
    _common(p)
    p.add_argument("--out", type=Path, help="artifact directory (same as --workdir)")
    for name in STAGE_COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage (and anything it needs)")
        _common(p)
        p.add_argument("--out", type=Path, help="artifact directory (same as --workdir)")
        if name == "precision-score":
            p.add_argument("--labels", type=Path, help="hand-labeled precision_sample.csv")
    p = sub.add_parser("export", help="write an artifact in a chosen format")
    _common(p)
    p.add_argument("what", choices=["topics", "matches", "origin", "graph", "stats"])
    p.add_argument("--format", default=None, choices=["json", "csv", "dot"])
    p.add_argument("--out", type=Path, required=True, help="destination file")
    return parser


_DEFAULT_FORMAT = {"topics": "json", "matches": "csv", "origin": "json", "graph": "dot", "stats": "csv"}


def _load(args):
    workdir = args.workdir
    if args.command != "export" and getattr(args, "out", None) is not None:
        workdir = args.out
    return load_config(
        args.config,
        seed=args.seed,
        threshold=args.threshold,
        min_cluster_size=args.min_cluster_size,
        n_neighbors=args.n_neighbors,
        n_components=args.dims,
        workdir=workdir,
        labels=getattr(args, "labels", None),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _load(args)
        if args.command == "export":
            fmt = args.format or _DEFAULT_FORMAT[args.what]
            out = export(cfg.workdir, args.what, fmt, args.out)
            print(out)
            return EXIT_OK
        pipe = Pipeline(cfg)
        if args.command == "run":
            pipe.run()
        else:
            pipe.run_stage(STAGE_COMMANDS[args.command], force=args.force)
        for name in pipe.executed:
            print(f"ran     {name}")
        for name in pipe.skipped:
            print(f"cached  {name}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except StageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA if isinstance(exc.cause, (DataError, OSError, ValueError)) else EXIT_INTERNAL
    except NarrativeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
