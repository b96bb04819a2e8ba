import hashlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from loguru import logger

from igeflow.core.config import settings
from igeflow.core.errors import ConfigValidationError, IgeflowError
from igeflow.geodesic import GeodesicPath, integrate_geodesic
from igeflow.ige import IgeSeries, estimate_kig, ige_series, normalize_complexity, running_kig
from igeflow.middleware.timing import timing_middleware
from igeflow.models import catalog
from igeflow.models.base import StatisticalModel
from igeflow.runner.artifacts import write_series, write_summary
from igeflow.schemas import ExperimentConfig, IgeSummary, RunReport, StageReport, canonical_json

STAGES = ("model", "geodesic", "ige", "fit", "write")
EXIT_OK = 0
EXIT_PIPELINE_FAILED = 1
EXIT_CONFIG_INVALID = 2


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


class ExperimentPipeline:
    """
    models -> geodesic -> ige -> fit -> write for one config.

    Each stage runs through the timing middleware; the first failing stage
    stops the pipeline, the remaining ones are reported as skipped and the
    summary JSON is still written.
    """

    def __init__(
        self, config: ExperimentConfig, out_dir: Path, workers: Optional[int] = None
    ) -> None:
        self.config = config
        self.out_dir = Path(out_dir)
        self.workers = workers or settings.workers
        self.stages: List[StageReport] = []
        self.model: Optional[StatisticalModel] = None
        self.path: Optional[GeodesicPath] = None
        self.series: Optional[IgeSeries] = None
        self.summary: Optional[IgeSummary] = None
        self.artifacts: List[str] = []

    @property
    def name(self) -> str:
        return self.config.output

    def _load_model(self) -> StatisticalModel:
        return catalog(self.config.model.catalog_name)

    def _integrate(self) -> GeodesicPath:
        config = self.config
        return integrate_geodesic(
            self.model,
            np.asarray(config.theta0, dtype=float),
            np.asarray(config.theta_dot0, dtype=float),
            config.tau_max,
            config.tolerances.ode_rel_tol,
            normalize=config.normalize_speed,
            checkpoints=config.grid(),
        )

    def _volumes(self) -> IgeSeries:
        config = self.config
        series = ige_series(
            self.model,
            self.path,
            config.grid(),
            config.tolerances.quad_rel_tol,
            bounds_mode=config.bounds_mode,
            tau_burn=config.tau_burn,
            workers=self.workers,
        )
        if config.normalization is not None:
            series = normalize_complexity(series, config.normalization)
        return series

    def _fit(self) -> IgeSummary:
        fit = self.config.fit
        return estimate_kig(
            self.series,
            fit.window_fraction,
            fit.kig_threshold,
            fit.r2_threshold,
            fit.drift_tol,
        )

    def _write(self) -> List[str]:
        kig_running = running_kig(self.series, self.config.fit.window_fraction)
        path = write_series(self.out_dir, self.name, self.series, kig_running)
        return [str(path)]

    def run(self) -> RunReport:
        steps = {
            "model": self._load_model,
            "geodesic": self._integrate,
            "ige": self._volumes,
            "fit": self._fit,
            "write": self._write,
        }
        targets = {
            "model": "model",
            "geodesic": "path",
            "ige": "series",
            "fit": "summary",
            "write": "artifacts",
        }
        exit_code = EXIT_OK
        for stage in STAGES:
            if exit_code != EXIT_OK:
                self.stages.append(StageReport(name=stage, status="skipped"))
                continue
            try:
                result = timing_middleware(self.name, stage, steps[stage], self.stages)
            except IgeflowError:
                exit_code = EXIT_PIPELINE_FAILED
                continue
            setattr(self, targets[stage], result)

        report = RunReport(
            config=self.config,
            config_hash=config_hash(self.config),
            summary=self.summary,
            stages=self.stages,
            exit_code=exit_code,
            path_status=self.path.status if self.path is not None else None,
            artifacts=list(self.artifacts),
        )
        summary_path = write_summary(self.out_dir, report)
        report.artifacts.append(str(summary_path))
        if report.summary is not None:
            logger.info(
                f"{self.name}: kig={report.summary.kig:.6g} "
                f"(stderr {report.summary.kig_stderr:.2g}) {report.summary.regime}"
            )
        return report


def run_experiment(
    config: ExperimentConfig, out_dir: Path = Path("."), workers: Optional[int] = None
) -> RunReport:
    """Run one experiment and write ``<output>.csv`` and ``<output>.summary.json``."""
    return ExperimentPipeline(config, out_dir, workers).run()


def run_many(
    configs: Sequence[ExperimentConfig], out_dir: Path, workers: Optional[int] = None
) -> List[RunReport]:
    """
    One worker per config; reports come back in input order.

    The worker budget is split so that configs times volume workers stays
    within ``workers``.
    """
    stems = [config.output for config in configs]
    duplicates = sorted({stem for stem in stems if stems.count(stem) > 1})
    if duplicates:
        raise ConfigValidationError([f"output: duplicate stem '{stem}'" for stem in duplicates])
    workers = workers or settings.workers
    pool_size = max(1, min(workers, len(configs)))
    per_run = max(1, workers // pool_size)
    with ThreadPoolExecutor(max_workers=pool_size) as pool:
        return list(pool.map(lambda config: run_experiment(config, out_dir, per_run), configs))
