"""Ordinary least squares, two-stage least squares, and the quasi-maximum
likelihood estimator with the contagion coefficient profiled out.

All solvers go through orthogonal decompositions (lstsq / QR), never the
normal equations. Rank-deficient designs return minimum-norm solutions
with a flag instead of raising: near-degenerate designs are the object
of study here and must be recorded, not crashed on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .lim import DesignMatrix
from .netcore import AveragingOperator

_QMLE_GRID_POINTS = 201
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
_BOUNDARY_MARGIN = 1e-3


@dataclass(frozen=True)
class EstimateResult:
    """Fit summary shared by all three estimators.

    theta_hat is ordered (alpha, beta, gamma_1..gamma_p, delta block);
    converged is only meaningful for the profiled-likelihood search and is
    True for the closed-form estimators.
    """

    theta_hat: np.ndarray
    sigma2_hat: float
    method: str
    condition_number: float
    converged: bool = True
    rank_deficient: bool = False
    weak_instruments: bool = False
    beta_hat_boundary: bool = False


def _condition_number(svals: np.ndarray) -> float:
    if svals.size == 0 or svals[-1] <= 0:
        return float("inf")
    return float(svals[0] / svals[-1])


def _lstsq_with_rank(mat: np.ndarray, target: np.ndarray):
    coef, _, rank, svals = np.linalg.lstsq(mat, target, rcond=None)
    return coef, rank, svals


def ols(W: DesignMatrix, Y: np.ndarray) -> EstimateResult:
    """Least squares of Y on the design columns.

    The coefficient order of the design ([1, GY, T, GT]) matches the
    (alpha, beta, gamma, delta) parameter order, so theta_hat needs no
    reshuffling. sigma2_hat uses the n - k degrees-of-freedom convention.
    """
    Y = np.asarray(Y, dtype=float)
    mat = W.matrix
    n, k = mat.shape
    if n <= k:
        raise DimensionMismatch(f"need n > {k} rows, got {n}")
    theta, rank, svals = _lstsq_with_rank(mat, Y)
    resid = Y - mat @ theta
    rss = float(resid @ resid)
    return EstimateResult(
        theta_hat=theta,
        sigma2_hat=rss / (n - k),
        method="ols",
        condition_number=_condition_number(svals),
        rank_deficient=rank < k,
    )


def build_instruments(op: AveragingOperator, T: np.ndarray) -> np.ndarray:
    """Instrument matrix [1, T, GT, G^2 T].

    Twice-averaged covariates reach two-step neighbors, exactly the variation
    that open triangles make informative about the contagion coefficient.
    """
    T = np.asarray(T, dtype=float)
    if T.ndim == 1:
        T = T[:, None]
    if T.shape[0] != op.n:
        raise DimensionMismatch(f"covariates have {T.shape[0]} rows on {op.n} nodes")
    gt = op.apply(T)
    g2t = op.apply(gt)
    return np.column_stack([np.ones(op.n), T, gt, g2t])


def tsls(W: DesignMatrix, Y: np.ndarray, Z: np.ndarray) -> EstimateResult:
    """Two-stage least squares: project the design onto the instrument span,
    then regress Y on the projected design.

    When Z spans the design columns (e.g. Z = W) this reduces to OLS.
    Instruments are flagged weak when the smallest singular value of Z'W/n
    falls below 1e-10.
    """
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    mat = W.matrix
    n, k = mat.shape
    if Z.shape[0] != n:
        raise DimensionMismatch("instruments and design need matching rows")
    if Z.shape[1] < k:
        raise DimensionMismatch(
            f"need at least {k} instrument columns, got {Z.shape[1]}"
        )
    if n <= Z.shape[1]:
        raise DimensionMismatch(f"need n > {Z.shape[1]} rows, got {n}")
    cross_svals = np.linalg.svd(Z.T @ mat / n, compute_uv=False)
    weak = bool(cross_svals[-1] < 1e-10)
    first_stage, _, _ = _lstsq_with_rank(Z, mat)
    projected = Z @ first_stage
    theta, rank, svals = _lstsq_with_rank(projected, Y)
    resid = Y - mat @ theta  # structural residuals, not first-stage ones
    rss = float(resid @ resid)
    return EstimateResult(
        theta_hat=theta,
        sigma2_hat=rss / (n - k),
        method="tsls",
        condition_number=_condition_number(svals),
        rank_deficient=rank < k,
        weak_instruments=weak,
    )


def profile_log_likelihood(
    beta: float,
    eigenvalues: np.ndarray,
    resid_y: np.ndarray,
    resid_gy: np.ndarray,
) -> float:
    """Gaussian log likelihood with the linear coefficients and the noise
    variance maximized out, up to an additive constant.

    resid_y and resid_gy are the residuals of Y and GY on the exogenous
    columns; the filtered residual (I - beta G)Y - X c(beta) equals
    resid_y - beta * resid_gy by linearity of least squares.
    """
    n = resid_y.size
    er = resid_y - beta * resid_gy
    sig2 = float(er @ er) / n
    if sig2 <= 0:
        return float("inf")  # exact fit: likelihood unbounded at this beta
    with np.errstate(divide="ignore"):
        log_det = float(np.sum(np.log(np.abs(1.0 - beta * eigenvalues))))
    return -0.5 * n * np.log(sig2) + log_det


def qmle(
    op: AveragingOperator,
    Y: np.ndarray,
    X_exog: np.ndarray,
    search: tuple[float, float] = (-0.99, 0.99),
    tol: float = 1e-6,
) -> EstimateResult:
    """Profile-likelihood estimator for the contagion coefficient.

    For each candidate beta, the linear coefficients and variance come from
    least squares of (I - beta G) Y on the exogenous columns [1, T, GT]; the
    profiled objective adds the log determinant of I - beta G through the
    precomputed spectrum of G (one eigendecomposition per dataset, reused
    across all candidates). A 201-point grid scan brackets the optimum and a
    golden-section refinement localizes it to the requested tolerance.
    """
    lo, hi = search
    if not (-1.0 < lo < hi < 1.0):
        raise DimensionMismatch(f"search interval {search} must lie inside (-1, 1)")
    Y = np.asarray(Y, dtype=float)
    X_exog = np.asarray(X_exog, dtype=float)
    n, k = X_exog.shape
    if Y.shape != (n,) or n != op.n:
        raise DimensionMismatch("Y, X_exog, and operator sizes disagree")
    lam = op.eigenvalues()
    gy = op.apply(Y)
    coef_y, rank, _ = _lstsq_with_rank(X_exog, Y)
    coef_gy, _, _ = _lstsq_with_rank(X_exog, gy)
    resid_y = Y - X_exog @ coef_y
    resid_gy = gy - X_exog @ coef_gy

    def objective(b: float) -> float:
        return profile_log_likelihood(b, lam, resid_y, resid_gy)

    grid = np.linspace(lo, hi, _QMLE_GRID_POINTS)
    values = np.array([objective(b) for b in grid])
    best = int(np.argmax(values))
    boundary_max = best in (0, grid.size - 1)

    best_beta, best_val = float(grid[best]), float(values[best])
    a, b = grid[max(best - 1, 0)], grid[min(best + 1, grid.size - 1)]
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    while b - a > tol:
        for point, val in ((c, fc), (d, fd)):
            if val > best_val:
                best_beta, best_val = float(point), float(val)
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = objective(d)
    for point, val in ((c, fc), (d, fd)):
        if val > best_val:
            best_beta, best_val = float(point), float(val)
    converged = (b - a) <= tol

    beta_hat = best_beta
    # profiled linear coefficients are linear in beta as well
    coef = coef_y - beta_hat * coef_gy
    er = resid_y - beta_hat * resid_gy
    sigma2 = float(er @ er) / n  # likelihood convention: divide by n
    theta = np.concatenate([[coef[0], beta_hat], coef[1:]])
    svals = np.linalg.svd(X_exog, compute_uv=False)
    return EstimateResult(
        theta_hat=theta,
        sigma2_hat=sigma2,
        method="qmle",
        condition_number=_condition_number(svals),
        converged=converged,
        rank_deficient=rank < k,
        beta_hat_boundary=boundary_max
        or min(beta_hat - lo, hi - beta_hat) < _BOUNDARY_MARGIN,
    )
