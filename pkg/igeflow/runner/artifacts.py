"""Atomic CSV and JSON writers for experiment outputs."""

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Sequence

import numpy as np

from igeflow.ige import IgeSeries
from igeflow.schemas import RunReport

CSV_COLUMNS = ("tau", "vol", "avg_vol", "ige", "increment", "kig_running")


def write_atomic(path: Path, text: str) -> None:
    """Write-then-rename so readers never observe a partial file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def format_series(series: IgeSeries, kig_running: Sequence[float]) -> str:
    columns = np.column_stack(
        [
            series.taus,
            series.vol,
            series.avg_vol,
            series.ige,
            series.increments,
            np.asarray(kig_running, dtype=float),
        ]
    )
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(",".join("%.12g" % value for value in row) for row in columns.tolist())
    return "\n".join(lines) + "\n"


def read_series(path: Path) -> Dict[str, np.ndarray]:
    """Columns of a series CSV by header name."""
    data = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}


def summary_payload(report: RunReport) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "config_hash": report.config_hash,
        "model": report.config.model.catalog_name,
        "output": report.config.output,
        "exit_code": report.exit_code,
        "path_status": report.path_status,
        "summary": report.summary.model_dump(mode="json") if report.summary else None,
        "stages": [stage.model_dump(mode="json") for stage in report.stages],
    }
    return payload


def write_series(out_dir: Path, stem: str, series: IgeSeries, kig_running: Sequence[float]) -> Path:
    path = out_dir / f"{stem}.csv"
    write_atomic(path, format_series(series, kig_running))
    return path


def write_summary(out_dir: Path, report: RunReport) -> Path:
    path = out_dir / f"{report.config.output}.summary.json"
    write_atomic(path, json.dumps(summary_payload(report), indent=2, sort_keys=True) + "\n")
    return path
