"""The linear-in-means generative model and its population limit objects.

Outcomes solve Y = alpha 1 + beta G Y + T gamma + G T delta + eps, which
has the reduced form Y = (I - beta G)^{-1}(alpha 1 + T gamma + GT delta
+ eps) whenever |beta| < 1. The design matrix for estimation stacks
[1, GY, T, GT]. For latent-position networks the module also computes
the large-sample limits of the GX and GY columns and the rank test that
decides whether direct and interference effects stay distinguishable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateInnerProduct, DimensionMismatch, InvalidConfig, SingularSystem
from .genmodels import LatentPositions
from .netcore import AveragingOperator

_SOLVE_RTOL = 1e-8
_RANK_RTOL = 1e-8


@dataclass(frozen=True)
class LimParameters:
    """Regression coefficients of the linear-in-means model.

    gamma and delta may be given as scalars for a single covariate; they are
    stored as length-p arrays. |beta| < 1 is required so that I - beta G is
    invertible.
    """

    alpha: float
    beta: float
    gamma: np.ndarray
    delta: np.ndarray
    sigma: float

    def __post_init__(self):
        gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        delta = np.atleast_1d(np.asarray(self.delta, dtype=float))
        if abs(self.beta) >= 1:
            raise InvalidConfig(f"|beta| must be < 1, got {self.beta}")
        if gamma.shape != delta.shape or gamma.ndim != 1 or gamma.size < 1:
            raise InvalidConfig("gamma and delta must be vectors of equal length >= 1")
        if self.sigma < 0:
            raise InvalidConfig("sigma must be >= 0")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "delta", delta)

    @property
    def p(self) -> int:
        return self.gamma.size


def _as_covariate_matrix(T: np.ndarray, n: int) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if T.ndim == 1:
        T = T[:, None]
    if T.ndim != 2 or T.shape[0] != n:
        raise DimensionMismatch(f"covariates have shape {T.shape}, expected ({n}, p)")
    return T


def _base_signal(op: AveragingOperator, T: np.ndarray, params: LimParameters) -> np.ndarray:
    """alpha 1 + T gamma + GT delta, the noise-free forcing term."""
    if T.shape[1] != params.p:
        raise DimensionMismatch(
            f"{T.shape[1]} covariates but {params.p} coefficients"
        )
    return params.alpha + T @ params.gamma + op.apply(T) @ params.delta


@dataclass(frozen=True)
class Outcomes:
    Y: np.ndarray
    eps: np.ndarray


def generate_outcomes(
    op: AveragingOperator, T: np.ndarray, params: LimParameters, seed: int
) -> Outcomes:
    """Draw Gaussian noise and solve the simultaneous system for Y.

    eps is sigma times a standard normal vector from the seeded stream, so
    scaling (alpha, gamma, delta, sigma) by c scales Y by c at fixed seed.
    """
    T = _as_covariate_matrix(T, op.n)
    rng = np.random.default_rng(seed)
    eps = params.sigma * rng.standard_normal(op.n)
    rhs = _base_signal(op, T, params) + eps
    system = np.eye(op.n) - params.beta * op.matrix
    try:
        Y = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:  # unreachable for |beta| < 1
        raise SingularSystem(str(exc)) from exc
    resid = np.abs(system @ Y - rhs).max()
    if resid > _SOLVE_RTOL * (1.0 + np.abs(rhs).max()):
        raise SingularSystem(f"solve residual {resid:.3e} too large")
    return Outcomes(Y=Y, eps=eps)


def neumann_outcomes(
    op: AveragingOperator,
    T: np.ndarray,
    params: LimParameters,
    eps: np.ndarray,
    K: int,
) -> np.ndarray:
    """Truncated geometric-series solution sum_{k<=K} beta^k G^k (base + eps).

    Kept as an independent oracle for the direct solve; the truncation error
    is at most |beta|^{K+1} / (1 - |beta|) times the sup norm of the base
    vector.
    """
    T = _as_covariate_matrix(T, op.n)
    base = _base_signal(op, T, params) + np.asarray(eps, dtype=float)
    acc = base.copy()
    term = base
    for _ in range(K):
        term = params.beta * op.apply(term)
        acc += term
    return acc


@dataclass(frozen=True)
class DesignMatrix:
    """Stacked regression design [1, GY, T columns, GT columns].

    interference_cols lists which covariate columns contribute a GT column;
    restricted specifications drop the columns whose interference effect is
    pinned to zero.
    """

    matrix: np.ndarray
    labels: tuple[str, ...]
    p: int
    interference_cols: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def k(self) -> int:
        return self.matrix.shape[1]


def build_design(
    op: AveragingOperator,
    T: np.ndarray,
    Y: np.ndarray,
    interference_cols: tuple[int, ...] | None = None,
) -> DesignMatrix:
    """Assemble the design [1 | GY | T | GT] (GT possibly column-subset)."""
    T = _as_covariate_matrix(T, op.n)
    Y = np.asarray(Y, dtype=float)
    if Y.shape != (op.n,):
        raise DimensionMismatch(f"Y has shape {Y.shape}, expected ({op.n},)")
    p = T.shape[1]
    if interference_cols is None:
        interference_cols = tuple(range(p))
    else:
        interference_cols = tuple(int(j) for j in interference_cols)
        if any(j < 0 or j >= p for j in interference_cols):
            raise DimensionMismatch("interference column index out of range")
    gt = op.apply(T)
    cols = [np.ones(op.n), op.apply(Y)]
    labels = ["intercept", "GY"]
    for j in range(p):
        cols.append(T[:, j])
        labels.append(f"T{j + 1}")
    for j in interference_cols:
        cols.append(gt[:, j])
        labels.append(f"GT{j + 1}")
    return DesignMatrix(
        matrix=np.column_stack(cols),
        labels=tuple(labels),
        p=p,
        interference_cols=interference_cols,
    )


def equilibrium_mean(
    params: LimParameters, tau: np.ndarray, split_form: bool = False
) -> float:
    """Constant limit of neighborhood-average outcomes when covariates are
    independent of the network with mean tau.

    The default is (alpha + (gamma + delta)' tau) / (1 - beta). The
    split_form variant alpha / (1 - beta) + (gamma + delta)' tau applies the
    damping only to the intercept; the two coincide when beta = 0 or the
    peer coefficients sum to zero.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if tau.shape != (params.p,):
        raise DimensionMismatch(f"tau has shape {tau.shape}, expected ({params.p},)")
    peer = float((params.gamma + params.delta) @ tau)
    if split_form:
        return params.alpha / (1.0 - params.beta) + peer
    return (params.alpha + peer) / (1.0 - params.beta)


@dataclass(frozen=True)
class RdpgLimits:
    """Population-limit objects for a latent-position design.

    mean_inner holds X_i . mu per node; second_moment is the plug-in
    second-moment matrix X'X/n; feedback is (I - beta * E[X X' / (X.mu)])^{-1}
    - I, the accumulated contagion feedback; gy_loading is the coefficient
    vector the GY column loads onto H^{-1}X in the limit; design_limit is the
    n x (2d+2) matrix the design converges to row-wise.
    """

    mean_inner: np.ndarray
    second_moment: np.ndarray
    feedback: np.ndarray
    gy_loading: np.ndarray
    design_limit: np.ndarray

    @property
    def gx_limit(self) -> np.ndarray:
        d = self.second_moment.shape[0]
        return self.design_limit[:, 2 + d :]

    @property
    def gy_limit(self) -> np.ndarray:
        return self.design_limit[:, 1]


def rdpg_limit_objects(
    X: LatentPositions | np.ndarray, mu: np.ndarray, params: LimParameters
) -> RdpgLimits:
    """Plug-in limits of the design columns for latent covariates.

    Requires every X_i . mu > 0 (each node has positive expected degree
    direction) and p = d. Warns on the knife-edge case where the GY loading
    equals mu, which makes the GY limit colinear with the intercept.
    """
    rows = X.X if isinstance(X, LatentPositions) else np.asarray(X, dtype=float)
    mu = np.asarray(mu, dtype=float)
    n, d = rows.shape
    if params.p != d:
        raise DimensionMismatch(f"params have p = {params.p} but latents have d = {d}")
    mean_inner = rows @ mu
    if mean_inner.min() <= 0:
        raise DegenerateInnerProduct(
            f"min X_i . mu = {mean_inner.min():.3e} is not positive"
        )
    second_moment = rows.T @ rows / n
    scaled = rows / mean_inner[:, None]
    ratio_moment = rows.T @ scaled / n  # E[X X' / (X . mu)]
    feedback = np.linalg.inv(np.eye(d) - params.beta * ratio_moment) - np.eye(d)
    gy_loading = second_moment @ params.gamma + feedback @ second_moment @ (
        params.beta * params.gamma + params.delta
    )
    if np.linalg.norm(gy_loading - mu) < 1e-8:
        warnings.warn(
            "GY loading equals the latent mean: its limit column is colinear "
            "with the intercept",
            stacklevel=2,
        )
    gy_limit = params.alpha / (1.0 - params.beta) + scaled @ gy_loading
    gx_limit = scaled @ second_moment
    design_limit = np.column_stack([np.ones(n), gy_limit, rows, gx_limit])
    return RdpgLimits(
        mean_inner=mean_inner,
        second_moment=second_moment,
        feedback=feedback,
        gy_loading=gy_loading,
        design_limit=design_limit,
    )


@dataclass(frozen=True)
class RankTestResult:
    rank: int
    schur_ok: bool


def _independent_row_subset(
    rows: np.ndarray, exclude: np.ndarray | None = None
) -> np.ndarray | None:
    """Indices of d linearly independent rows found by pivoted QR."""
    n, d = rows.shape
    mask = np.ones(n, dtype=bool)
    if exclude is not None:
        mask[exclude] = False
    candidates = np.flatnonzero(mask)
    if candidates.size < d:
        return None
    sub = rows[candidates]
    _, r, piv = scipy.linalg.qr(sub.T, pivoting=True, mode="economic")
    diag = np.abs(np.diag(r))
    if diag.size < d or diag[d - 1] <= _RANK_RTOL * max(diag[0], 1e-300):
        return None
    return candidates[piv[:d]]


def theoretical_design_rank(
    X: LatentPositions | np.ndarray, mu: np.ndarray, tol: float = _RANK_RTOL
) -> RankTestResult:
    """Numerical rank of [X | H^{-1} X] plus the paired-subset invertibility check.

    rank counts singular values above tol times the largest. schur_ok reports
    whether two disjoint sets of d independent rows Y, Z could be found with
    Z^{-1} H_Z^{-1} Z - Y^{-1} H_Y^{-1} Y invertible, the sufficient condition
    for the stacked matrix to reach rank 2d.
    """
    rows = X.X if isinstance(X, LatentPositions) else np.asarray(X, dtype=float)
    mu = np.asarray(mu, dtype=float)
    mean_inner = rows @ mu
    if mean_inner.min() <= 0:
        raise DegenerateInnerProduct(
            f"min X_i . mu = {mean_inner.min():.3e} is not positive"
        )
    stacked = np.column_stack([rows, rows / mean_inner[:, None]])
    svals = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(svals > tol * svals[0]))

    schur_ok = False
    d = rows.shape[1]
    first = _independent_row_subset(rows)
    if first is not None:
        rng = np.random.default_rng(0)
        for trial in range(20):
            if trial == 0:
                second = _independent_row_subset(rows, exclude=first)
            else:
                perm = rng.permutation(rows.shape[0])
                keep = perm[~np.isin(perm, first)]
                shuffled = rows[keep]
                local = _independent_row_subset(shuffled)
                second = None if local is None else keep[local]
            if second is None:
                break
            ymat, zmat = rows[first], rows[second]
            hy = ymat @ mu
            hz = zmat @ mu
            diff = np.linalg.solve(zmat, zmat / hz[:, None]) - np.linalg.solve(
                ymat, ymat / hy[:, None]
            )
            dsv = np.linalg.svd(diff, compute_uv=False)
            if dsv[-1] > tol * max(dsv[0], 1.0):
                schur_ok = True
                break
    return RankTestResult(rank=rank, schur_ok=schur_ok)
