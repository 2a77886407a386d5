# app/bench.py
from __future__ import annotations
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence, get_args, get_origin

from app.config import Config, RunConfig, load_run_config
from app.errors import BenchError, ConfigError, CorpusIOError, CorpusLoadError, ReportError, SchemaError, SplitError
from app.formatters import format_comparison, format_run_summary
from app.grid import compare_features, run_grid
from app.logging_setup import setup_logging
from app.reporting import GRID_RESULT_FILE, emit_comparison, emit_reports, load_grid_result, save_grid_result

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CELLS_FAILED = 2
EXIT_SETUP_FAILED = 3

DATA_ERRORS = (ConfigError, CorpusLoadError, CorpusIOError, SchemaError, SplitError)


def _is_bool(annotation: Any) -> bool:
    if annotation is bool:
        return True
    return get_origin(annotation) is not None and bool in get_args(annotation)


def _add_run_config_flags(parser: argparse.ArgumentParser) -> None:
    """--kebab-case флаг на каждое поле RunConfig; значения проверяет pydantic."""
    group = parser.add_argument_group("run config overrides")
    for name, field in RunConfig.model_fields.items():
        flag = "--" + name.replace("_", "-")
        default = field.default if not isinstance(field.default, list) else ",".join(map(str, field.default))
        if _is_bool(field.annotation):
            # голый --flag означает true
            group.add_argument(flag, dest=name, nargs="?", const="true", default=argparse.SUPPRESS,
                               metavar="BOOL", help=f"(default: {default})")
        else:
            group.add_argument(flag, dest=name, default=argparse.SUPPRESS, metavar="VALUE",
                               help=f"(default: {default})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app.bench",
        description="N-gram vs TF-IDF text classification benchmark (IMDB, Amazon Alexa).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the dataset x feature x classifier grid")
    run.add_argument("--config", help="flat KEY=value config file")
    _add_run_config_flags(run)

    report = sub.add_parser("report", help="re-emit reports from a saved grid result")
    report.add_argument("--result", help=f"saved grid result (default: <out-dir>/{GRID_RESULT_FILE})")
    report.add_argument("--out-dir", help="output directory (default: BENCH_OUT_DIR or out)")
    report.add_argument("--formats", default="csv,markdown", help="comma-separated: csv,json,markdown")

    compare = sub.add_parser("compare", help="tfidf - ngram metric deltas and global maxima")
    compare.add_argument("--result", help=f"saved grid result (default: <out-dir>/{GRID_RESULT_FILE})")
    compare.add_argument("--out-dir", help="output directory (default: BENCH_OUT_DIR or out)")
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    fields = set(RunConfig.model_fields)
    return {k: v for k, v in vars(args).items() if k in fields}


# ================================
#     КОМАНДЫ
# ================================

def cmd_run(args: argparse.Namespace, env: Config) -> int:
    try:
        config = load_run_config(args.config, overrides=_overrides(args), env=env)
        result = run_grid(config)
    except DATA_ERRORS as e:
        logger.error("Setup failed before any cell ran: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SETUP_FAILED
    except ReportError as e:
        logger.error("Vocabulary dump failed: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR

    out_dir = Path(config.out_dir)
    try:
        emit_reports(result, config.formats, out_dir)
        save_grid_result(result, out_dir / GRID_RESULT_FILE)
    except ReportError as e:
        logger.error("Report writing failed: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR

    print(format_run_summary(result))
    print(format_comparison(compare_features(result)))
    return EXIT_CELLS_FAILED if result.failed else EXIT_OK


def _resolve_paths(args: argparse.Namespace, env: Config) -> tuple[Path, Path]:
    out_dir = Path(args.out_dir or env.out_dir or "out")
    result_path = Path(args.result) if args.result else out_dir / GRID_RESULT_FILE
    return out_dir, result_path


def cmd_report(args: argparse.Namespace, env: Config) -> int:
    out_dir, result_path = _resolve_paths(args, env)
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    try:
        result = load_grid_result(result_path)
        files = emit_reports(result, formats, out_dir)
    except (ReportError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    for f in files:
        print(f)
    return EXIT_CELLS_FAILED if result.failed else EXIT_OK


def cmd_compare(args: argparse.Namespace, env: Config) -> int:
    out_dir, result_path = _resolve_paths(args, env)
    try:
        result = load_grid_result(result_path)
        _, summary = emit_comparison(result, out_dir)
    except (ReportError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    print(summary)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "report": cmd_report, "compare": cmd_compare}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    env = Config.load()
    setup_logging(env.log_to_file, env.log_file_path, env.log_level)
    logger.info("Starting bench: %s", args.command)
    try:
        return COMMANDS[args.command](args, env)
    except BenchError as e:
        logger.exception("Bench failed: %s", e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
