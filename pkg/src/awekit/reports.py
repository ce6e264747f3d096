"""CSV and plot-data emission with byte-stable output.

``plot-data`` format writes the same CSV plus a sidecar JSON series
description (x column, y column, error column, one series per group) so
any plotting script can render the layer curves without knowing the
toolkit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .errors import ParameterError
from .neighborhood import LnsReport, write_lns_csv
from .ser import RunReport, SweepReport, sweep_summary


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_run_csv(report: RunReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["feature", "fusion", "layer", "seed", "wa", "mean_wa", "std_wa", "fingerprint"]
        )
        for seed, wa in zip(report.seeds, report.wa_values):
            writer.writerow(
                [
                    report.feature,
                    report.fusion,
                    report.layer,
                    seed,
                    _fmt(wa),
                    _fmt(report.mean_wa),
                    _fmt(report.std_wa),
                    report.config_fingerprint,
                ]
            )


def write_sweep_csv(report: SweepReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["layer", "feature", "fusion", "mean_wa", "std_wa", "status"])
        for row in report.rows:
            writer.writerow(
                [row.layer, row.feature, row.fusion, _fmt(row.mean_wa), _fmt(row.std_wa), row.status]
            )


def write_sweep_summary_csv(report: SweepReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["feature", "fusion", "n_layers_ok", "mean_wa", "std_across_layers", "std_pooled_runs"]
        )
        for row in sweep_summary(report):
            writer.writerow(
                [
                    row["feature"],
                    row["fusion"],
                    row["n_layers_ok"],
                    _fmt(row["mean_wa"]),
                    _fmt(row["std_across_layers"]),
                    _fmt(row["std_pooled_runs"]),
                ]
            )


def _series_sidecar(report) -> dict:
    if isinstance(report, LnsReport):
        return {
            "x": "layer",
            "y": "mean_lns",
            "error": None,
            "series_by": "K",
            "series": [str(k) for k in report.ks],
        }
    if isinstance(report, SweepReport):
        fusions = []
        for row in report.rows:
            if row.fusion not in fusions:
                fusions.append(row.fusion)
        return {
            "x": "layer",
            "y": "mean_wa",
            "error": "std_wa",
            "series_by": "fusion",
            "series": fusions,
        }
    if isinstance(report, RunReport):
        return {
            "x": "seed",
            "y": "wa",
            "error": None,
            "series_by": None,
            "series": [f"{report.feature}+{report.fusion}"],
        }
    raise ParameterError(f"no series description for {type(report).__name__}")


def emit_report(report, path: str | Path, format: str = "csv") -> list[Path]:
    """Write a report to ``path``; returns every file written.

    ``format='csv'`` writes the CSV alone; ``format='plot-data'`` adds a
    ``<name>.series.json`` sidecar describing the plot series.
    """
    if format not in ("csv", "plot-data"):
        raise ParameterError(f"format must be 'csv' or 'plot-data', got {format!r}")
    path = Path(path)
    if isinstance(report, LnsReport):
        write_lns_csv(report, path)
    elif isinstance(report, SweepReport):
        write_sweep_csv(report, path)
    elif isinstance(report, RunReport):
        write_run_csv(report, path)
    else:
        raise ParameterError(f"cannot emit a {type(report).__name__}")
    written = [path]
    if format == "plot-data":
        sidecar = path.with_suffix(path.suffix + ".series.json")
        doc = {"csv": path.name, **_series_sidecar(report)}
        sidecar.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(sidecar)
    return written
