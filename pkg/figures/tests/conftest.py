import csv
import subprocess
import sys

import pytest

HEADER = [
    "model",
    "estimator",
    "n",
    "coefficient",
    "aliased",
    "mean_mse",
    "median_mse",
    "median_vif",
]


def write_summary(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        writer.writerows(rows)
    return path


@pytest.fixture
def toy_summary(tmp_path):
    rows = []
    for est in ("ols", "tsls"):
        for n, mse in ((100, 1e-2), (400, 4e-3)):
            rows.append(["bernoulli", est, n, "alpha", "true", mse, mse / 2, 50.0])
            rows.append(["bernoulli", est, n, "gamma", "false", mse / 10, mse / 20, 2.0])
    return write_summary(tmp_path / "summary.csv", rows)


@pytest.fixture(scope="session")
def benchmark_summary(tmp_path_factory):
    """Criterion-6-shaped summary produced through the simulation lab's CLI,
    the external interface this package consumes."""
    base = tmp_path_factory.mktemp("bench")
    run_dir = base / "run"
    subprocess.run(
        [
            sys.executable, "-m", "limlab", "simulate",
            "--model", "bernoulli", "--reps", "2", "--n-grid", "30,50",
            "--seed", "3", "--out", str(run_dir),
        ],
        check=True,
        capture_output=True,
    )
    summary = base / "summary.csv"
    subprocess.run(
        [
            sys.executable, "-m", "limlab", "summarize",
            "--in", str(run_dir), "--out", str(summary),
        ],
        check=True,
        capture_output=True,
    )
    return summary
