"""Command-line entry points: simulate, summarize, diagnose."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .harness import (
    config_from_json_dict,
    default_config,
    read_records_csv,
    run_experiment,
    summarize,
    write_manifest,
    write_records_csv,
    write_summary_csv,
)
from .identify import colinearity_report, distinct_eigenvalue_count, powers_linearly_independent, vif
from .lim import build_design
from .netcore import averaging_operator, frobenius_stats, read_edge_list


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="limlab",
        description="Peer-effects simulation and estimation laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo study")
    sim.add_argument("--model", choices=("bernoulli", "unrestricted", "restricted"))
    sim.add_argument("--config", type=Path, help="JSON experiment config")
    sim.add_argument("--out", type=Path, help="output directory")
    sim.add_argument("--reps", type=int, help="override replicate count")
    sim.add_argument("--n-grid", help="override sizes, comma separated")
    sim.add_argument("--seed", type=int, help="override base seed")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument(
        "--full-grid",
        action="store_true",
        help="use the eight-size grid up to n=3000 with 100 replicates",
    )

    summ = sub.add_parser("summarize", help="aggregate records.csv into summary.csv")
    summ.add_argument("--in", dest="in_dir", type=Path, required=True)
    summ.add_argument("--out", type=Path, required=True)

    diag = sub.add_parser("diagnose", help="identification diagnostics on user data")
    diag.add_argument("--graph", type=Path, required=True, help="edge-list file")
    diag.add_argument("--covariates", type=Path, required=True, help="CSV of covariates")
    diag.add_argument("--out", type=Path, help="write the report CSV here (default stdout)")
    return parser


def _resolve_config(args):
    if args.config is None and args.model is None:
        raise SystemExit("simulate needs --model or --config")
    if args.config is not None:
        config = config_from_json_dict(json.loads(args.config.read_text()))
        if args.model is not None and args.model != config.model:
            raise SystemExit(
                f"--model {args.model} contradicts the config file "
                f"(model {config.model})"
            )
    else:
        config = default_config(args.model, full=args.full_grid)
    updates = {}
    if args.reps is not None:
        updates["reps"] = args.reps
    if args.n_grid is not None:
        updates["n_grid"] = tuple(int(x) for x in args.n_grid.split(","))
    if args.seed is not None:
        updates["base_seed"] = args.seed
    if args.out is not None:
        updates["output_dir"] = str(args.out)
    if updates:
        from dataclasses import replace

        config = replace(config, **updates)
    return config


def _cmd_simulate(args) -> int:
    config = _resolve_config(args)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = run_experiment(config, workers=args.workers)
    write_records_csv(out_dir / "records.csv", records)
    write_manifest(out_dir / "manifest.json", config)
    print(f"wrote {out_dir / 'records.csv'} ({len(records)} records)")
    return 0


def _cmd_summarize(args) -> int:
    rows = read_records_csv(args.in_dir / "records.csv")
    write_summary_csv(args.out, summarize(rows))
    print(f"wrote {args.out}")
    return 0


def _read_covariates(path: Path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    if not header or header[0] != "node":
        raise SystemExit("covariates CSV must start with a 'node' column")
    data = np.asarray(rows, dtype=float)
    order = np.argsort(data[:, 0])
    data = data[order]
    names = header[1:]
    y = None
    cov_cols = []
    cov_names = []
    for j, name in enumerate(names):
        if name == "y":
            y = data[:, 1 + j]
        else:
            cov_cols.append(data[:, 1 + j])
            cov_names.append(name)
    if not cov_cols:
        raise SystemExit("covariates CSV needs at least one non-outcome column")
    return np.column_stack(cov_cols), cov_names, y


def _cmd_diagnose(args) -> int:
    graph = read_edge_list(args.graph)
    op = averaging_operator(graph)
    T, names, y = _read_covariates(args.covariates)
    if T.shape[0] != op.n:
        raise SystemExit(
            f"covariates have {T.shape[0]} rows but the graph has {op.n} nodes"
        )
    if y is not None:
        design = build_design(op, T, y)
        report = colinearity_report(op, design, T, include_power_rank=True)
        vif_pairs = ";".join(
            f"{label}={float(val)!r}" for label, val in zip(design.labels, report.vif)
        )
        fields = {
            "n": op.n,
            "distinct_eigs": report.distinct_eigs,
            "identified": str(report.identified).lower(),
            "ig2_rank": report.ig2_rank,
            "gt_dev": repr(report.gt_dev),
            "gy_dev": repr(report.gy_dev),
            "sigma_min": repr(report.sigma_min),
            "frob_sq": repr(report.frob_sq),
            "vif": vif_pairs,
        }
    else:
        gt = op.apply(T)
        tau = T.mean(axis=0)
        gt_dev = float(np.linalg.norm(gt - tau[None, :], axis=1).max())
        powers = powers_linearly_independent(op)
        distinct = distinct_eigenvalue_count(op)
        exog = np.column_stack([np.ones(op.n), T, gt])
        labels = ["intercept"] + [f"T:{c}" for c in names] + [f"GT:{c}" for c in names]
        vif_values = vif(exog).values
        gram = exog.T @ exog / op.n
        sigma_min = max(float(np.linalg.eigvalsh(gram)[0]), 0.0)
        vif_pairs = ";".join(
            f"{label}={float(val)!r}" for label, val in zip(labels, vif_values)
        )
        fields = {
            "n": op.n,
            "distinct_eigs": distinct,
            "identified": str(distinct >= 3).lower(),
            "ig2_rank": powers.rank,
            "gt_dev": repr(gt_dev),
            "gy_dev": "",
            "sigma_min": repr(sigma_min),
            "frob_sq": repr(frobenius_stats(op).frob_sq),
            "vif": vif_pairs,
        }
    lines = [",".join(fields.keys()), ",".join(str(v) for v in fields.values())]
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        args.out.write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "summarize":
        return _cmd_summarize(args)
    return _cmd_diagnose(args)


if __name__ == "__main__":
    sys.exit(main())
