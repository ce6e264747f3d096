"""Render layer curves from a report CSV plus its series sidecar.

Works with any CSV emitted with --plot-data: the sidecar names the x, y,
error, and grouping columns, so this script needs no knowledge of which
report it is drawing.

Usage:
    python scripts/plot_reports.py /tmp/awe-demo/sweep.csv --out sweep.png
"""

from __future__ import annotations

import argparse
import csv
import json
from pathlib import Path

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError as exc:  # pragma: no cover
    raise SystemExit("matplotlib is required: pip install 'awekit[plots]'") from exc


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv_path", type=Path)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()

    sidecar_path = args.csv_path.with_suffix(args.csv_path.suffix + ".series.json")
    if not sidecar_path.exists():
        raise SystemExit(f"no sidecar {sidecar_path}; emit the report with --plot-data")
    sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))

    with open(args.csv_path, encoding="utf-8") as fh:
        rows = [r for r in csv.DictReader(fh) if r.get("status", "ok") == "ok"]

    x_col, y_col = sidecar["x"], sidecar["y"]
    err_col, group_col = sidecar["error"], sidecar["series_by"]

    fig, ax = plt.subplots(figsize=(7, 4))
    groups = sidecar["series"] if group_col else [None]
    for group in groups:
        subset = [r for r in rows if group is None or r[group_col] == str(group)]
        xs = [float(r[x_col]) for r in subset]
        ys = [float(r[y_col]) for r in subset]
        errs = [float(r[err_col]) for r in subset] if err_col else None
        label = str(group) if group is not None else y_col
        if errs:
            ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=3, label=label)
        else:
            ax.plot(xs, ys, marker="o", label=label)
    ax.set_xlabel(x_col)
    ax.set_ylabel(y_col)
    ax.legend(title=group_col or None)
    ax.grid(alpha=0.3)
    fig.tight_layout()

    out = args.out or args.csv_path.with_suffix(".png")
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
