"""Identification and estimability diagnostics.

Peer-effect coefficients are identified when I, G, and G^2 are linearly
independent, which holds whenever G has three or more distinct
eigenvalues. Even then the design can degenerate asymptotically: the GT
and GY columns drift toward constant multiples of the intercept. This
module measures both phenomena: eigenvalue multiplicity, the rank of
{I, G, G^2}, variance inflation factors, and sup-norm deviations of the
peer columns from their constant limits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .lim import DesignMatrix, LimParameters, equilibrium_mean
from .netcore import AveragingOperator, frobenius_stats

VIF_CAP = 1e12
_DEFAULT_EIG_RTOL = 1e-8
_DEFAULT_POWERS_TOL = 1e-8


def distinct_eigenvalue_count(op: AveragingOperator, rel_tol: float = _DEFAULT_EIG_RTOL) -> int:
    """Number of eigenvalue clusters after merging gaps below the tolerance.

    Sorted eigenvalues are grouped whenever consecutive values differ by at
    most rel_tol * max(1, spread), separating true multiplicity from
    eigensolver rounding.
    """
    lam = np.sort(op.eigenvalues())
    spread = float(lam[-1] - lam[0])
    threshold = rel_tol * max(1.0, spread)
    return int(np.sum(np.diff(lam) > threshold)) + 1


@dataclass(frozen=True)
class PowersIndependence:
    independent: bool
    rank: int


def powers_linearly_independent(
    op: AveragingOperator, tol: float = _DEFAULT_POWERS_TOL
) -> PowersIndependence:
    """Rank of {I, G, G^2} viewed as vectors in R^{n^2}.

    Computed by SVD of the stacked vectorizations so it cross-validates the
    eigenvalue-multiplicity test rather than reusing it.
    """
    g = op.matrix
    stacked = np.column_stack(
        [np.eye(op.n).ravel(), g.ravel(), (g @ g).ravel()]
    )
    svals = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(svals > tol * svals[0]))
    return PowersIndependence(independent=rank == 3, rank=rank)


@dataclass(frozen=True)
class VifResult:
    values: np.ndarray
    capped: np.ndarray  # per-column flag: uncentered R^2 hit 1 within 1e-12


def vif(W: DesignMatrix | np.ndarray) -> VifResult:
    """Variance inflation factor 1 / (1 - R_j^2) for every design column.

    R_j^2 is the uncentered coefficient of determination from regressing
    column j on the remaining columns, which stays well-defined for the
    intercept column. Values are capped at 1e12 with a flag when the fit is
    exact.
    """
    mat = W.matrix if isinstance(W, DesignMatrix) else np.asarray(W, dtype=float)
    n, k = mat.shape
    if n <= k:
        raise DimensionMismatch(f"need more rows than columns, got {mat.shape}")
    values = np.empty(k)
    capped = np.zeros(k, dtype=bool)
    for j in range(k):
        target = mat[:, j]
        others = np.delete(mat, j, axis=1)
        coef, _, _, _ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ coef
        denom = float(target @ target)
        if denom == 0.0:
            values[j] = 1.0  # zero column carries no signal to inflate
            continue
        r_sq = 1.0 - float(resid @ resid) / denom
        if r_sq >= 1.0 - 1e-12:
            values[j] = VIF_CAP
            capped[j] = True
        else:
            values[j] = max(1.0 / (1.0 - r_sq), 1.0)
    return VifResult(values=values, capped=capped)


@dataclass(frozen=True)
class DiagnosticsReport:
    """Identification and colinearity snapshot for one design realization."""

    distinct_eigs: int
    identified: bool
    ig2_rank: int | None
    vif: np.ndarray
    vif_capped: np.ndarray
    gt_dev: float
    gy_dev: float
    sigma_min: float
    frob_sq: float
    tau: np.ndarray
    eta: float


def colinearity_report(
    op: AveragingOperator,
    W: DesignMatrix,
    T: np.ndarray,
    params: LimParameters | None = None,
    tau: np.ndarray | None = None,
    include_power_rank: bool = False,
) -> DiagnosticsReport:
    """Assemble all diagnostics for a realized design.

    tau defaults to the covariate column means when no true mean is supplied.
    The constant eta that GY is compared against comes from the coefficient
    formula when params are given, otherwise from the mean of the GY column.
    The rank of {I, G, G^2} costs a dense n^3 matrix product, so it is only
    computed on request.
    """
    T = np.asarray(T, dtype=float)
    if T.ndim == 1:
        T = T[:, None]
    if tau is None:
        tau = T.mean(axis=0)
    else:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
    gt = op.apply(T)
    gt_dev = float(np.linalg.norm(gt - tau[None, :], axis=1).max())
    gy = W.matrix[:, 1]
    if params is not None:
        eta = equilibrium_mean(params, tau)
    else:
        eta = float(gy.mean())
    gy_dev = float(np.abs(gy - eta).max())
    gram = W.matrix.T @ W.matrix / W.n
    sigma_min = max(float(np.linalg.eigvalsh(gram)[0]), 0.0)
    distinct = distinct_eigenvalue_count(op)
    vif_res = vif(W)
    ig2_rank = powers_linearly_independent(op).rank if include_power_rank else None
    return DiagnosticsReport(
        distinct_eigs=distinct,
        identified=distinct >= 3,
        ig2_rank=ig2_rank,
        vif=vif_res.values,
        vif_capped=vif_res.capped,
        gt_dev=gt_dev,
        gy_dev=gy_dev,
        sigma_min=sigma_min,
        frob_sq=frobenius_stats(op).frob_sq,
        tau=tau,
        eta=float(eta),
    )
