"""
Main entry point for the forest rule explainer.

Loads configuration, sets up logging, and dispatches train / explain /
benchmark. Exit codes: 0 ok, 2 usage or configuration, 3 data error,
4 model error.
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

# Add project root to path for imports
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.commands import (
    PipelineOverrides,
    build_pipeline_config,
    cmd_benchmark,
    cmd_explain,
    cmd_train,
    parse_rows,
    resolve_seed,
)
from domain.errors import ConfigError, DataError, ExplainerError, ModelError, PathError
from util.config_loader import AppConfig, load_config
from util.logging_setup import get_logger, setup_logging


EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_MODEL = 4


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("reduction")
    group.add_argument("--no-ar", action="store_true", help="disable association rules")
    group.add_argument("--no-cluster", action="store_true", help="disable k-medoids clustering")
    group.add_argument("--no-random", action="store_true", help="disable random selection")
    group.add_argument("--min-support", type=float, help="apriori minimum support")
    group.add_argument("--medoids", type=int, help="number of medoids (default ceil(sqrt(K)))")
    group.add_argument(
        "--min-path-fraction", type=float,
        help="keep at least this fraction of all trees' paths (default: quorum)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forest-rules",
        description="Local feature-range rules for random forest predictions.",
    )
    parser.add_argument("--config", type=Path, help="config.toml (default: project root)")
    parser.add_argument("--seed", type=int, help="random seed (fallback: LF_SEED, then config)")
    commands = parser.add_subparsers(dest="command", required=True)

    # SUPPRESS: a subcommand without --seed keeps the top-level value
    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")

    train = commands.add_parser(
        "train", parents=[seeded], help="train a forest and write a model bundle"
    )
    train.add_argument("--data", type=Path, required=True, help="training CSV")
    train.add_argument("--meta", type=Path, required=True, help="dataset metadata TOML")
    train.add_argument("--model", type=Path, required=True, help="output model directory")
    train.add_argument("--full", action="store_true", help="train on all rows, no holdout F1")

    explain = commands.add_parser("explain", parents=[seeded], help="explain one instance")
    explain.add_argument("--model", type=Path, required=True, help="model directory")
    explain.add_argument("instance", help="CSV row in metadata order, or name=value,... list")
    explain.add_argument("--hide-last", type=int, help="collapse the n least important clauses")
    explain.add_argument("--json", action="store_true", help="print only the JSON document")
    explain.add_argument("--compare", action="store_true", help="also show the unreduced rule")
    _add_pipeline_flags(explain)

    benchmark = commands.add_parser(
        "benchmark", parents=[seeded], help="reduction ratios over a dataset"
    )
    benchmark.add_argument("--model", type=Path, required=True, help="model directory")
    benchmark.add_argument("--data", type=Path, required=True, help="CSV of instances")
    benchmark.add_argument("--rows", help="technique rows, e.g. 'AR,CL+RS' (default: all)")
    benchmark.add_argument("--workers", type=int, help="worker processes (default: config)")
    benchmark.add_argument("--json", action="store_true", help="print JSON rows")
    benchmark.add_argument("--out", type=Path, help="also write the table as CSV")
    _add_pipeline_flags(benchmark)

    return parser


def _overrides(args: argparse.Namespace) -> PipelineOverrides:
    return PipelineOverrides(
        no_association_rules=args.no_ar,
        no_clustering=args.no_cluster,
        no_random=args.no_random,
        min_support=args.min_support,
        medoids=args.medoids,
        min_path_fraction=args.min_path_fraction,
    )


def _dispatch(args: argparse.Namespace, config: AppConfig) -> int:
    seed = resolve_seed(args.seed, config.forest.seed)

    if args.command == "train":
        return cmd_train(config, args.data, args.meta, args.model, seed, full=args.full, out=sys.stdout)

    if args.command == "benchmark" and args.workers is not None and args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    pipeline = build_pipeline_config(config.pipeline, _overrides(args), seed)

    if args.command == "explain":
        if args.hide_last is not None and args.hide_last < 0:
            raise ConfigError("--hide-last must be >= 0")
        return cmd_explain(
            config, args.model, args.instance, pipeline,
            hide_last=args.hide_last, as_json=args.json, compare=args.compare, out=sys.stdout,
        )

    return cmd_benchmark(
        config, args.model, args.data, pipeline,
        rows=parse_rows(args.rows), workers=args.workers, as_json=args.json, out_csv=args.out, out=sys.stdout,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)

    try:
        config = load_config(args.config)
    except ConfigError as e:
        # Set up default logging so the config error is logged too
        setup_logging()
        get_logger(__name__).error(f"Configuration error: {e.error_hint}")
        print(f"ERROR: {e.error_hint}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(
        log_dir=config.logging.log_dir,
        level=config.logging.level,
        max_bytes=config.logging.max_bytes,
        backup_count=config.logging.backup_count,
    )
    logger = get_logger(__name__)
    logger.info(f"Starting command: {args.command}")

    try:
        code = _dispatch(args, config)
    except ConfigError as e:
        logger.error(f"Configuration error: {e.error_hint}")
        print(f"ERROR: {e.error_hint}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        logger.error(f"Data error: {e.error_hint}")
        print(f"ERROR: {e.error_hint}", file=sys.stderr)
        return EXIT_DATA
    except (ModelError, PathError) as e:
        logger.error(f"Model error [{e.error_code}]: {e.error_hint}")
        print(f"ERROR: {e.error_hint}", file=sys.stderr)
        return EXIT_MODEL
    except ExplainerError as e:
        logger.error(f"{e.error_code}: {e.error_hint}", exc_info=True)
        print(f"ERROR: {e.error_hint}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as e:
        logger.error(f"I/O error: {e}")
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_DATA

    logger.info(f"Command {args.command} finished with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
