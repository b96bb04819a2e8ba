import argparse
import sys
from pathlib import Path
from typing import List

from loguru import logger

from igeflow.core.errors import ConfigValidationError
from igeflow.runner import run_many
from igeflow.schemas import ExperimentConfig, load_config, parse_config

OVERRIDES = ("tau_max", "grid_points", "bounds_mode", "tau_burn")


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    """Command-line flags replace config fields; the result is re-validated."""
    updates = {
        field: getattr(args, field) for field in OVERRIDES if getattr(args, field) is not None
    }
    if not updates:
        return config
    data = config.model_dump(mode="json")
    data.update(updates)
    return parse_config(data, source="command line")


def collect_configs(target: Path) -> List[Path]:
    if target.is_dir():
        paths = sorted(target.glob("*.json"))
        if not paths:
            raise ConfigValidationError([f"config: no *.json files in {target}"])
        return paths
    return [target]


def run(args: argparse.Namespace) -> int:
    paths = collect_configs(Path(args.config))
    configs = [apply_overrides(load_config(str(path)), args) for path in paths]
    reports = run_many(configs, Path(args.out))
    exit_code = 0
    for report in reports:
        failed = report.failed_stage
        if failed is not None:
            print(
                f"{failed.error.error}: {report.config.output} stage {failed.name}: "
                f"{failed.error.message}",
                file=sys.stderr,
            )
        else:
            logger.info(f"{report.config.output}: wrote {', '.join(report.artifacts)}")
        exit_code = max(exit_code, report.exit_code)
    return exit_code


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("run", help="Run an experiment or a directory of experiments")
    parser.add_argument("config", help="JSON config or a directory of configs")
    parser.add_argument("--out", default=".", help="Output directory")
    parser.add_argument("--tau-max", dest="tau_max", type=float)
    parser.add_argument("--grid-points", dest="grid_points", type=int)
    parser.add_argument("--bounds-mode", dest="bounds_mode", choices=("endpoint", "envelope"))
    parser.add_argument("--tau-burn", dest="tau_burn", type=float)
    parser.set_defaults(handler=run)
