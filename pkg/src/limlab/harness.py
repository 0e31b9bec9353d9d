"""Experiment configuration, seeded Monte Carlo execution, and aggregation.

A study is a grid of network sizes times independent replicates. Every
replicate derives its own seed from (base_seed, n, rep), so results are
a pure function of the configuration and identical under any worker
count or completion order. Failures inside a replicate become error
rows rather than aborting the run: near-degenerate fits are part of the
phenomenon being measured.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidConfig, LimLabError
from .estimators import build_instruments, ols, qmle, tsls
from .genmodels import (
    ConstantLaw,
    DcsbmConfig,
    ExplicitRho,
    PowerLawMeanDegree,
    TargetMeanDegree,
    UniformLaw,
    sample_bernoulli_covariates,
    sample_dcsbm,
)
from .identify import colinearity_report
from .lim import LimParameters, build_design, generate_outcomes
from .netcore import averaging_operator

MODELS = ("bernoulli", "unrestricted", "restricted")
ESTIMATOR_NAMES = ("ols", "tsls", "qmle")

DESK_N_GRID = (100, 200, 400, 800, 1600)
DESK_REPS = 50
FULL_N_GRID = (100, 163, 264, 430, 698, 1135, 1845, 3000)
FULL_REPS = 100
DEFAULT_BASE_SEED = 2718281828
BERNOULLI_COVARIATE_P = 0.5

RECORDS_HEADER = (
    "model,estimator,n,rep,seed,coefficient,truth,estimate,sq_error,aliased,"
    "vif,gt_dev,gy_dev,distinct_eigs,sigma_min,wall_ms,status"
).split(",")
SUMMARY_HEADER = (
    "model,estimator,n,coefficient,aliased,mean_mse,median_mse,median_vif"
).split(",")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    n_grid: tuple[int, ...]
    reps: int
    base_seed: int
    estimators: tuple[str, ...]
    params: LimParameters
    dcsbm: DcsbmConfig
    output_dir: str

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidConfig(f"unknown model {self.model!r}")
        n_grid = tuple(int(n) for n in self.n_grid)
        if not n_grid or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
            raise InvalidConfig("n_grid must be non-empty and strictly increasing")
        if self.reps < 1:
            raise InvalidConfig("reps must be >= 1")
        estimators = tuple(self.estimators)
        if not estimators or any(e not in ESTIMATOR_NAMES for e in estimators):
            raise InvalidConfig(f"estimators must be a subset of {ESTIMATOR_NAMES}")
        if self.model == "restricted":
            delta = self.params.delta
            if delta.size < 2 or delta[0] != 0.0 or delta[1] != 0.0:
                raise InvalidConfig(
                    "restricted model requires the leading interference "
                    "coefficients to be zero"
                )
        if self.model != "bernoulli" and self.params.p != self.dcsbm.d:
            raise InvalidConfig(
                "latent-covariate models need one coefficient per latent dimension"
            )
        object.__setattr__(self, "n_grid", n_grid)
        object.__setattr__(self, "estimators", estimators)

    @property
    def interference_cols(self) -> tuple[int, ...]:
        """Covariate columns whose neighborhood average enters the fitted design."""
        if self.model == "restricted":
            return tuple(int(j) for j in np.flatnonzero(self.params.delta != 0.0))
        return tuple(range(self.params.p))


def _benchmark_dcsbm() -> DcsbmConfig:
    B = np.full((4, 4), 0.05)
    np.fill_diagonal(B, 0.5)
    return DcsbmConfig(
        pi=np.full(4, 0.25),
        B=B,
        theta_law=UniformLaw(1.0, 2.0),
        sparsity=TargetMeanDegree(PowerLawMeanDegree(2.0, 0.7)),
    )


def default_config(
    model: str, full: bool = False, output_dir: str = "results"
) -> ExperimentConfig:
    """Benchmark study configuration for the named outcome model.

    The desk-scale grid (five sizes up to 1600, 50 replicates) keeps a full
    three-estimator run within minutes; full=True switches to the eight-size
    grid up to 3000 with 100 replicates.
    """
    if model == "bernoulli":
        params = LimParameters(alpha=3.0, beta=0.2, gamma=4.0, delta=2.0, sigma=0.1)
    elif model == "unrestricted":
        params = LimParameters(
            alpha=3.0,
            beta=0.2,
            gamma=[1.5, 2.5, 3.5, 4.5],
            delta=[2.0, 2.0, 2.0, 2.0],
            sigma=0.1,
        )
    elif model == "restricted":
        params = LimParameters(
            alpha=3.0,
            beta=0.2,
            gamma=[1.5, 2.5, 3.5, 4.5],
            delta=[0.0, 0.0, 2.0, 2.0],
            sigma=0.1,
        )
    else:
        raise InvalidConfig(f"unknown model {model!r}")
    return ExperimentConfig(
        model=model,
        n_grid=FULL_N_GRID if full else DESK_N_GRID,
        reps=FULL_REPS if full else DESK_REPS,
        base_seed=DEFAULT_BASE_SEED,
        estimators=ESTIMATOR_NAMES,
        params=params,
        dcsbm=_benchmark_dcsbm(),
        output_dir=output_dir,
    )


def rep_seed(base_seed: int, n: int, rep: int) -> int:
    """Order-free replicate seed from a splittable hash of (base_seed, n, rep)."""
    ss = np.random.SeedSequence([int(base_seed), int(n), int(rep)])
    return int(ss.generate_state(1, np.uint64)[0])


def _component_seed(base_seed: int, n: int, rep: int, component: int) -> int:
    ss = np.random.SeedSequence([int(base_seed), int(n), int(rep), int(component)])
    return int(ss.generate_state(1, np.uint64)[0])


def coefficient_labels(p: int, interference_cols: tuple[int, ...]) -> tuple[str, ...]:
    if p == 1:
        labels = ["alpha", "beta", "gamma"]
        labels += ["delta"] * len(interference_cols)
    else:
        labels = ["alpha", "beta"] + [f"gamma{j + 1}" for j in range(p)]
        labels += [f"delta{j + 1}" for j in interference_cols]
    return tuple(labels)


def aliased_coefficients(model: str, p: int) -> frozenset[str]:
    """Coefficients whose design columns are asymptotically colinear."""
    if model == "bernoulli":
        return frozenset({"alpha", "beta", "delta"})
    if model == "unrestricted":
        return frozenset({"alpha", "beta"} | {f"delta{j + 1}" for j in range(p)})
    return frozenset()


@dataclass(frozen=True)
class CoefficientCell:
    label: str
    truth: float
    estimate: float
    sq_error: float
    aliased: bool
    vif: float


@dataclass(frozen=True)
class RepRecord:
    model: str
    estimator: str
    n: int
    rep: int
    seed: int
    coefficients: tuple[CoefficientCell, ...]
    gt_dev: float
    gy_dev: float
    distinct_eigs: int
    sigma_min: float
    wall_ms: float
    status: str


def _error_record(config, estimator, n, rep, seed, exc) -> RepRecord:
    return RepRecord(
        model=config.model,
        estimator=estimator,
        n=n,
        rep=rep,
        seed=seed,
        coefficients=(),
        gt_dev=float("nan"),
        gy_dev=float("nan"),
        distinct_eigs=0,
        sigma_min=float("nan"),
        wall_ms=0.0,
        status=type(exc).__name__,
    )


def run_single_rep(config: ExperimentConfig, n: int, rep: int) -> list[RepRecord]:
    """Sample one dataset and fit every configured estimator on it."""
    seed = rep_seed(config.base_seed, n, rep)
    graph_seed = _component_seed(config.base_seed, n, rep, 0)
    covariate_seed = _component_seed(config.base_seed, n, rep, 1)
    noise_seed = _component_seed(config.base_seed, n, rep, 2)
    try:
        sample = sample_dcsbm(config.dcsbm, n, graph_seed)
        op = averaging_operator(sample.graph)
        if config.model == "bernoulli":
            T = sample_bernoulli_covariates(BERNOULLI_COVARIATE_P, n, covariate_seed)
            T = T[:, None]
            tau = np.array([BERNOULLI_COVARIATE_P])
        else:
            T = sample.X.X
            tau = config.dcsbm.mean_latent()
        out = generate_outcomes(op, T, config.params, noise_seed)
        design = build_design(
            op, T, out.Y, interference_cols=config.interference_cols
        )
        report = colinearity_report(op, design, T, params=config.params, tau=tau)
    except LimLabError as exc:
        return [
            _error_record(config, est, n, rep, seed, exc) for est in config.estimators
        ]

    labels = coefficient_labels(config.params.p, config.interference_cols)
    truth = np.concatenate(
        [
            [config.params.alpha, config.params.beta],
            config.params.gamma,
            config.params.delta[list(config.interference_cols)],
        ]
    )
    aliased = aliased_coefficients(config.model, config.params.p)
    records = []
    for est in config.estimators:
        start = time.perf_counter()
        try:
            if est == "ols":
                result = ols(design, out.Y)
            elif est == "tsls":
                result = tsls(design, out.Y, build_instruments(op, T))
            else:
                exog_cols = [0] + list(range(2, design.k))  # drop the GY column
                result = qmle(op, out.Y, design.matrix[:, exog_cols])
        except LimLabError as exc:
            records.append(_error_record(config, est, n, rep, seed, exc))
            continue
        wall_ms = (time.perf_counter() - start) * 1e3
        cells = tuple(
            CoefficientCell(
                label=label,
                truth=float(t),
                estimate=float(e),
                sq_error=float((e - t) ** 2),
                aliased=label in aliased,
                vif=float(v),
            )
            for label, t, e, v in zip(labels, truth, result.theta_hat, report.vif)
        )
        records.append(
            RepRecord(
                model=config.model,
                estimator=est,
                n=n,
                rep=rep,
                seed=seed,
                coefficients=cells,
                gt_dev=report.gt_dev,
                gy_dev=report.gy_dev,
                distinct_eigs=report.distinct_eigs,
                sigma_min=report.sigma_min,
                wall_ms=wall_ms,
                status="ok",
            )
        )
    return records


def _run_task(args) -> tuple[tuple[int, int], list[RepRecord]]:
    config, n, rep = args
    return (n, rep), run_single_rep(config, n, rep)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list[RepRecord]:
    """Execute the full grid; output order is (n, rep, estimator) regardless
    of worker count."""
    tasks = [(config, n, rep) for n in config.n_grid for rep in range(config.reps)]
    if workers <= 1:
        keyed = dict(_run_task(t) for t in tasks)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            keyed = dict(pool.map(_run_task, tasks, chunksize=1))
    records: list[RepRecord] = []
    for n in config.n_grid:
        for rep in range(config.reps):
            records.extend(keyed[(n, rep)])
    return records


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if np.isnan(value):
            return ""
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def records_to_rows(records: list[RepRecord]) -> list[dict]:
    rows = []
    for rec in records:
        shared = {
            "model": rec.model,
            "estimator": rec.estimator,
            "n": rec.n,
            "rep": rec.rep,
            "seed": rec.seed,
            "gt_dev": rec.gt_dev,
            "gy_dev": rec.gy_dev,
            "distinct_eigs": rec.distinct_eigs,
            "sigma_min": rec.sigma_min,
            "wall_ms": rec.wall_ms,
            "status": rec.status,
        }
        if not rec.coefficients:
            rows.append(
                {
                    **shared,
                    "coefficient": "",
                    "truth": None,
                    "estimate": None,
                    "sq_error": None,
                    "aliased": None,
                    "vif": None,
                }
            )
            continue
        for cell in rec.coefficients:
            rows.append(
                {
                    **shared,
                    "coefficient": cell.label,
                    "truth": cell.truth,
                    "estimate": cell.estimate,
                    "sq_error": cell.sq_error,
                    "aliased": cell.aliased,
                    "vif": cell.vif,
                }
            )
    return rows


def write_records_csv(path: str | Path, records: list[RepRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORDS_HEADER)
        for row in records_to_rows(records):
            writer.writerow([_fmt(row[col]) for col in RECORDS_HEADER])


def read_records_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RECORDS_HEADER:
            raise InvalidConfig(
                f"unexpected records header {reader.fieldnames} in {path}"
            )
        return list(reader)


@dataclass(frozen=True)
class SummaryRow:
    model: str
    estimator: str
    n: int
    coefficient: str
    aliased: bool
    mean_mse: float
    median_mse: float
    median_vif: float


def _coefficient_order(label: str) -> tuple[int, str]:
    for rank, prefix in enumerate(("alpha", "beta", "gamma", "delta")):
        if label.startswith(prefix):
            return (rank, label)
    return (len(label), label)


def summarize(rows: list[dict] | list[RepRecord]) -> list[SummaryRow]:
    """Group per-coefficient squared errors into mean/median MSE and median VIF.

    Accepts in-memory records or rows read back from records.csv. Error rows
    (status other than ok) are skipped; medians are taken over the surviving
    replicates.
    """
    if rows and isinstance(rows[0], RepRecord):
        rows = records_to_rows(rows)
    if not rows:
        raise InvalidConfig("no records to summarize")
    groups: dict[tuple, dict] = {}
    for row in rows:
        if row["status"] != "ok" or not row["coefficient"]:
            continue
        key = (row["model"], row["estimator"], int(row["n"]), row["coefficient"])
        entry = groups.setdefault(
            key,
            {"sq": [], "vif": [], "aliased": _parse_bool(row["aliased"])},
        )
        entry["sq"].append(float(row["sq_error"]))
        entry["vif"].append(float(row["vif"]))
    out = []
    for key in sorted(
        groups, key=lambda k: (k[0], k[1], k[2], _coefficient_order(k[3]))
    ):
        model, estimator, n, coefficient = key
        entry = groups[key]
        out.append(
            SummaryRow(
                model=model,
                estimator=estimator,
                n=n,
                coefficient=coefficient,
                aliased=entry["aliased"],
                mean_mse=float(np.mean(entry["sq"])),
                median_mse=float(np.median(entry["sq"])),
                median_vif=float(np.median(entry["vif"])),
            )
        )
    return out


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() == "true"


def write_summary_csv(path: str | Path, rows: list[SummaryRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.model,
                    row.estimator,
                    row.n,
                    row.coefficient,
                    _fmt(row.aliased),
                    _fmt(row.mean_mse),
                    _fmt(row.median_mse),
                    _fmt(row.median_vif),
                ]
            )


def config_to_json_dict(config: ExperimentConfig) -> dict:
    if isinstance(config.dcsbm.sparsity, ExplicitRho):
        sparsity = {"kind": "explicit_rho", "rho": config.dcsbm.sparsity.rho}
    else:
        target = config.dcsbm.sparsity.target
        if not isinstance(target, PowerLawMeanDegree):
            raise InvalidConfig(
                "only power-law mean-degree targets are JSON-serializable"
            )
        sparsity = {
            "kind": "target_mean_degree",
            "coefficient": target.coefficient,
            "exponent": target.exponent,
        }
    law = config.dcsbm.theta_law
    if isinstance(law, ConstantLaw):
        theta_law = {"kind": "constant", "value": law.value}
    else:
        theta_law = {"kind": "uniform", "lo": law.lo, "hi": law.hi}
    return {
        "model": config.model,
        "n_grid": list(config.n_grid),
        "reps": config.reps,
        "base_seed": config.base_seed,
        "estimators": list(config.estimators),
        "params": {
            "alpha": config.params.alpha,
            "beta": config.params.beta,
            "gamma": config.params.gamma.tolist(),
            "delta": config.params.delta.tolist(),
            "sigma": config.params.sigma,
        },
        "dcsbm": {
            "pi": config.dcsbm.pi.tolist(),
            "B": config.dcsbm.B.tolist(),
            "theta_law": theta_law,
            "sparsity": sparsity,
        },
        "output_dir": config.output_dir,
    }


def _require_keys(data: dict, allowed: set[str], context: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise InvalidConfig(f"unknown keys {sorted(unknown)} in {context}")
    missing = allowed - set(data)
    if missing:
        raise InvalidConfig(f"missing keys {sorted(missing)} in {context}")


def config_from_json_dict(data: dict) -> ExperimentConfig:
    """Parse the strict JSON mirror of ExperimentConfig (unknown keys rejected)."""
    _require_keys(
        data,
        {
            "model",
            "n_grid",
            "reps",
            "base_seed",
            "estimators",
            "params",
            "dcsbm",
            "output_dir",
        },
        "config",
    )
    params_data = data["params"]
    _require_keys(
        params_data, {"alpha", "beta", "gamma", "delta", "sigma"}, "params"
    )
    params = LimParameters(
        alpha=float(params_data["alpha"]),
        beta=float(params_data["beta"]),
        gamma=np.asarray(params_data["gamma"], dtype=float),
        delta=np.asarray(params_data["delta"], dtype=float),
        sigma=float(params_data["sigma"]),
    )
    dcsbm_data = data["dcsbm"]
    _require_keys(dcsbm_data, {"pi", "B", "theta_law", "sparsity"}, "dcsbm")
    law_data = dcsbm_data["theta_law"]
    if law_data.get("kind") == "constant":
        _require_keys(law_data, {"kind", "value"}, "theta_law")
        theta_law = ConstantLaw(float(law_data["value"]))
    elif law_data.get("kind") == "uniform":
        _require_keys(law_data, {"kind", "lo", "hi"}, "theta_law")
        theta_law = UniformLaw(float(law_data["lo"]), float(law_data["hi"]))
    else:
        raise InvalidConfig(f"unknown theta_law kind {law_data.get('kind')!r}")
    sp_data = dcsbm_data["sparsity"]
    if sp_data.get("kind") == "explicit_rho":
        _require_keys(sp_data, {"kind", "rho"}, "sparsity")
        sparsity = ExplicitRho(float(sp_data["rho"]))
    elif sp_data.get("kind") == "target_mean_degree":
        _require_keys(sp_data, {"kind", "coefficient", "exponent"}, "sparsity")
        sparsity = TargetMeanDegree(
            PowerLawMeanDegree(float(sp_data["coefficient"]), float(sp_data["exponent"]))
        )
    else:
        raise InvalidConfig(f"unknown sparsity kind {sp_data.get('kind')!r}")
    dcsbm = DcsbmConfig(
        pi=np.asarray(dcsbm_data["pi"], dtype=float),
        B=np.asarray(dcsbm_data["B"], dtype=float),
        theta_law=theta_law,
        sparsity=sparsity,
    )
    return ExperimentConfig(
        model=str(data["model"]),
        n_grid=tuple(int(n) for n in data["n_grid"]),
        reps=int(data["reps"]),
        base_seed=int(data["base_seed"]),
        estimators=tuple(str(e) for e in data["estimators"]),
        params=params,
        dcsbm=dcsbm,
        output_dir=str(data["output_dir"]),
    )


def write_manifest(path: str | Path, config: ExperimentConfig) -> None:
    manifest = {
        "tool": "limlab",
        "version": __version__,
        "records_schema": RECORDS_HEADER,
        "config": config_to_json_dict(config),
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
