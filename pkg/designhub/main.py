"""
designhub command line: run, compare, report and sweep design experiments
"""

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import List, Optional

import structlog
import yaml

from .config import settings
from .coordinator.channels import COMPLETION_LOG, PIPELINE_LOG
from .coordinator.coordinator import replay_dir, run
from .coordinator.models import RunReport
from .errors import CapacityError, ConfigError, DeadlockError, ReplayMismatchError, ReportSchemaError
from .executors.manager import build_executor
from .experiments.compare import compare_reports
from .experiments.loader import load_run_config
from .experiments.models import RunConfig
from .experiments.sweep import run_sweep
from .scheduler.utilization import utilization
from .telemetry import export
from .telemetry.series import metric_series

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEADLOCK = 3

CONFIG_SNAPSHOT = "config.yaml"
REPORT_FILE = "report.yaml"


def configure_logging(level: str = settings.log_level, json_logs: bool = settings.log_json) -> None:
    """Structured logs to stderr; run artifacts stay byte-deterministic"""
    renderer = (
        structlog.processors.JSONRenderer()
        if json_logs
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(getattr(logging, level.upper(), logging.INFO)),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def _error(message: str, details: Optional[List[str]] = None) -> None:
    print(f"error: {message}", file=sys.stderr)
    for line in details or []:
        print(f"  {line}", file=sys.stderr)


def resolve_output_dir(out: Optional[str], config: Optional[RunConfig] = None) -> Path:
    """--out, then DESIGNHUB_OUTPUT_DIR, then the config's output_dir, then ./runs"""
    if out:
        return Path(out)
    if "output_dir" in settings.model_fields_set:
        return Path(settings.output_dir)
    if config is not None and config.output_dir:
        return Path(config.output_dir)
    return Path(settings.output_dir)


def write_artifacts(out_dir: Path, config: RunConfig, report: RunReport, coordinator) -> None:
    trace = coordinator.trace
    export.write_text(out_dir / CONFIG_SNAPSHOT, export.dump_yaml(config.snapshot()))
    export.write_text(out_dir / "events.csv", export.events_to_csv(trace.events))
    export.write_text(out_dir / "decisions.csv", export.decisions_to_csv(trace.decisions))
    export.write_text(out_dir / REPORT_FILE, export.dump_yaml(report.to_document()))
    if report.trajectories:
        series = metric_series(report.trajectories, config.coordinator.weights, config.coordinator.pae_max)
        export.write_text(out_dir / "cycles.csv", export.cycles_to_csv(series))
    end = coordinator.run_start + report.makespan.total
    if end > coordinator.run_start:
        horizon = (coordinator.run_start, end)
        timeline = utilization(trace.events, coordinator.scheduler.pool, horizon).timeline
        export.write_text(out_dir / "utilization.csv", export.utilization_to_csv(timeline))


async def _execute(config: RunConfig, out_dir: Path):
    executor = build_executor(config.executor_config(), root_seed=config.seed or 0)
    try:
        return await run(
            config.specs(),
            config.make_pool(),
            executor,
            config.make_clock(),
            config.coordinator_config(),
            log_dir=out_dir,
        )
    finally:
        await executor.close()


def cmd_run(
    config_path: str,
    overrides: Optional[List[str]] = None,
    seed: Optional[int] = None,
    out: Optional[str] = None,
) -> int:
    try:
        config = load_run_config(config_path, overrides or [], seed)
    except ConfigError as e:
        _error(str(e), e.diagnostics)
        return EXIT_CONFIG

    out_dir = resolve_output_dir(out, config)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        _error(f"cannot create output directory {out_dir}: {e}")
        return EXIT_CONFIG

    try:
        report, coordinator = asyncio.run(_execute(config, out_dir))
    except DeadlockError as e:
        _error(str(e), yaml.safe_dump(e.dump, sort_keys=False).splitlines())
        return EXIT_DEADLOCK
    except CapacityError as e:
        _error(f"pool too small: {e}")
        return EXIT_CONFIG

    write_artifacts(out_dir, config, report, coordinator)
    counts = report.counts
    print(
        f"{config.name}: pipelines={counts.pipelines} subpipelines={counts.subpipelines} "
        f"trajectories={counts.trajectories} -> {out_dir}"
    )
    return EXIT_OK


def cmd_compare(report_a: str, report_b: str, out: Optional[str] = None) -> int:
    try:
        a = RunReport.load(report_a)
        b = RunReport.load(report_b)
    except OSError as e:
        _error(f"cannot read report: {e}")
        return EXIT_CONFIG
    except ReportSchemaError as e:
        _error(str(e))
        return EXIT_CONFIG

    document = export.dump_yaml(compare_reports(a, b))
    if out:
        export.write_text(Path(out), document)
    else:
        sys.stdout.write(document)
    return EXIT_OK


def cmd_report(run_dir: str, out: Optional[str] = None) -> int:
    """Re-render a run's report by replaying its stored channel logs"""
    run_path = Path(run_dir)
    for name in (CONFIG_SNAPSHOT, PIPELINE_LOG, COMPLETION_LOG):
        if not (run_path / name).is_file():
            _error(f"{run_path / name} not found")
            return EXIT_CONFIG
    try:
        config = load_run_config(run_path / CONFIG_SNAPSHOT)
        report = replay_dir(config.coordinator_config(), config.make_pool(), run_path)
    except ConfigError as e:
        _error(str(e), e.diagnostics)
        return EXIT_CONFIG
    except ReplayMismatchError as e:
        _error(f"replay failed: {e}")
        return EXIT_CONFIG

    document = export.dump_yaml(report.to_document())
    if out:
        export.write_text(Path(out), document)
    else:
        sys.stdout.write(document)
    return EXIT_OK


def cmd_sweep(
    config_path: str,
    seeds: int,
    overrides: Optional[List[str]] = None,
    seed: Optional[int] = None,
    out: Optional[str] = None,
) -> int:
    try:
        config = load_run_config(config_path, overrides or [], seed)
    except ConfigError as e:
        _error(str(e), e.diagnostics)
        return EXIT_CONFIG
    if seeds < 1:
        _error("--seeds must be at least 1")
        return EXIT_CONFIG

    first = config.seed or 0
    try:
        result = asyncio.run(run_sweep(config, range(first, first + seeds)))
    except DeadlockError as e:
        _error(str(e))
        return EXIT_DEADLOCK
    except CapacityError as e:
        _error(f"pool too small: {e}")
        return EXIT_CONFIG

    out_dir = resolve_output_dir(out, config)
    export.write_text(out_dir / "sweep.yaml", export.dump_yaml(result.model_dump(mode="json")))
    sys.stdout.write(export.dump_yaml({"summary": result.summary.model_dump(mode="json")}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="designhub", description=__doc__.strip())
    parser.add_argument("--log-level", default=None, help="Override DESIGNHUB_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, metavar="PATH", help="Run configuration YAML")
        p.add_argument("--seed", type=int, default=None, help="Root seed (overrides the config)")
        p.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
            help="Dotted-path override, repeatable (e.g. pipelines.0.cycles=3)",
        )
        p.add_argument("--out", default=None, metavar="DIR", help="Output directory")

    p_run = sub.add_parser("run", help="Run an experiment")
    run_flags(p_run)

    p_compare = sub.add_parser("compare", help="Compare two reports (A against baseline B)")
    p_compare.add_argument("report_a")
    p_compare.add_argument("report_b")
    p_compare.add_argument("--out", default=None, metavar="FILE")

    p_report = sub.add_parser("report", help="Re-render a run report from its channel logs")
    p_report.add_argument("run_dir")
    p_report.add_argument("--out", default=None, metavar="FILE")

    p_sweep = sub.add_parser("sweep", help="Run adaptive and control over a batch of seeds")
    run_flags(p_sweep)
    p_sweep.add_argument("--seeds", type=int, default=25, help="Number of consecutive seeds")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG

    configure_logging(args.log_level or settings.log_level, settings.log_json)

    if args.command == "run":
        return cmd_run(args.config, args.overrides, args.seed, args.out)
    if args.command == "compare":
        return cmd_compare(args.report_a, args.report_b, args.out)
    if args.command == "report":
        return cmd_report(args.run_dir, args.out)
    return cmd_sweep(args.config, args.seeds, args.overrides, args.seed, args.out)


if __name__ == "__main__":
    sys.exit(main())
