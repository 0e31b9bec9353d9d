"""Render log-log panels from a summary.csv produced by the simulation lab.

Two figure kinds are supported: MSE (one panel per model x estimator
pair, error curves per coefficient) and VIF (one panel per model,
variance inflation curves per coefficient). Coefficients whose design
columns are asymptotically colinear are drawn as solid red lines,
the rest as dashed gray, and a structural JSON dump of the exact
panel/series layout is available so tests never compare pixels.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from statistics import median

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

SUMMARY_COLUMNS = [
    "model",
    "estimator",
    "n",
    "coefficient",
    "aliased",
    "mean_mse",
    "median_mse",
    "median_vif",
]

ALIASED_STYLE = {"style": "solid", "color": "red"}
PLAIN_STYLE = {"style": "dashed", "color": "gray"}


class SchemaMismatch(Exception):
    """summary.csv does not match the expected schema."""

    def __init__(self, column: str, reason: str):
        self.column = column
        super().__init__(f"column {column!r}: {reason}")


class EmptyInput(Exception):
    """summary.csv holds no data rows."""


@dataclass(frozen=True)
class PanelSpec:
    input_path: str | Path
    kind: str  # "mse" | "vif"
    output_path: str | Path
    dump_structure_path: str | Path | None = None
    metric: str = "mean_mse"  # y metric for the mse kind


def read_summary(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in SUMMARY_COLUMNS:
            if column not in header:
                raise SchemaMismatch(column, "missing from header")
        for column in header:
            if column not in SUMMARY_COLUMNS:
                raise SchemaMismatch(column, "not part of the summary schema")
        rows = []
        for raw in reader:
            rows.append(
                {
                    "model": raw["model"],
                    "estimator": raw["estimator"],
                    "n": int(raw["n"]),
                    "coefficient": raw["coefficient"],
                    "aliased": raw["aliased"].strip().lower() == "true",
                    "mean_mse": float(raw["mean_mse"]),
                    "median_mse": float(raw["median_mse"]),
                    "median_vif": float(raw["median_vif"]),
                }
            )
    if not rows:
        raise EmptyInput(f"no data rows in {path}")
    return rows


def _coefficient_order(label: str) -> tuple[int, str]:
    for rank, prefix in enumerate(("alpha", "beta", "gamma", "delta")):
        if label.startswith(prefix):
            return (rank, label)
    return (4, label)


def _series(points: dict[int, list[float]], aliased: bool, coefficient: str) -> dict:
    xs = sorted(points)
    ys = [median(points[x]) for x in xs]
    style = ALIASED_STYLE if aliased else PLAIN_STYLE
    return {
        "coefficient": coefficient,
        "aliased": aliased,
        "style": style["style"],
        "color": style["color"],
        "x": xs,
        "y": ys,
    }


def build_structure(rows: list[dict], kind: str, metric: str = "mean_mse") -> dict:
    """Deterministic panel/series layout for the given figure kind."""
    if kind == "mse":
        if metric not in ("mean_mse", "median_mse"):
            raise ValueError(f"unknown metric {metric!r}")
        models = sorted({r["model"] for r in rows})
        estimators = sorted({r["estimator"] for r in rows})
        panels = []
        for model in models:
            for estimator in estimators:
                sub = [
                    r
                    for r in rows
                    if r["model"] == model and r["estimator"] == estimator
                ]
                if not sub:
                    continue
                series = []
                for coefficient in sorted(
                    {r["coefficient"] for r in sub}, key=_coefficient_order
                ):
                    pts: dict[int, list[float]] = {}
                    aliased = False
                    for r in sub:
                        if r["coefficient"] == coefficient:
                            pts.setdefault(r["n"], []).append(r[metric])
                            aliased = r["aliased"]
                    series.append(_series(pts, aliased, coefficient))
                panels.append(
                    {"model": model, "estimator": estimator, "series": series}
                )
        return {
            "kind": "mse",
            "metric": metric,
            "rows": models,
            "cols": estimators,
            "panels": panels,
            "log_x": True,
            "log_y": True,
        }
    if kind == "vif":
        models = sorted({r["model"] for r in rows})
        panels = []
        for model in models:
            sub = [r for r in rows if r["model"] == model]
            series = []
            for coefficient in sorted(
                {r["coefficient"] for r in sub}, key=_coefficient_order
            ):
                pts: dict[int, list[float]] = {}
                aliased = False
                for r in sub:
                    if r["coefficient"] == coefficient:
                        # VIF is a property of the design, shared by all
                        # estimators; pool their values per size
                        pts.setdefault(r["n"], []).append(r["median_vif"])
                        aliased = r["aliased"]
                series.append(_series(pts, aliased, coefficient))
            panels.append({"model": model, "series": series})
        return {
            "kind": "vif",
            "rows": models,
            "cols": [],
            "panels": panels,
            "log_x": True,
            "log_y": True,
        }
    raise ValueError(f"unknown figure kind {kind!r}")


def _draw(structure: dict, output_path: str | Path) -> None:
    if structure["kind"] == "mse":
        nrows = max(len(structure["rows"]), 1)
        ncols = max(len(structure["cols"]), 1)
    else:
        nrows, ncols = 1, max(len(structure["panels"]), 1)
    fig, axes = plt.subplots(
        nrows,
        ncols,
        figsize=(3.2 * ncols, 2.8 * nrows),
        squeeze=False,
        sharex=True,
    )
    for ax in axes.ravel():
        ax.set_visible(False)
    for index, panel in enumerate(structure["panels"]):
        if structure["kind"] == "mse":
            r = structure["rows"].index(panel["model"])
            c = structure["cols"].index(panel["estimator"])
            ax = axes[r][c]
            ax.set_title(f"{panel['model']} / {panel['estimator']}", fontsize=9)
        else:
            ax = axes[0][index]
            ax.set_title(panel["model"], fontsize=9)
        ax.set_visible(True)
        for s in panel["series"]:
            ax.plot(
                s["x"],
                s["y"],
                linestyle="-" if s["style"] == "solid" else "--",
                color=s["color"],
                label=s["coefficient"],
                linewidth=1.4,
            )
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("number of nodes")
        ax.set_ylabel(
            structure.get("metric", "median_vif").replace("_", " ")
        )
        ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(output_path, dpi=150)
    plt.close(fig)


def render(spec: PanelSpec) -> dict:
    """Read the summary, build the layout, write the image (and the optional
    structural JSON). Returns the structure. Nothing is written when the
    input is empty or malformed."""
    rows = read_summary(spec.input_path)
    structure = build_structure(rows, spec.kind, spec.metric)
    _draw(structure, spec.output_path)
    if spec.dump_structure_path is not None:
        Path(spec.dump_structure_path).write_text(
            json.dumps(structure, indent=2, sort_keys=True) + "\n"
        )
    return structure
