"""Random-network and covariate generators.

Two latent-position families are provided: the Poisson degree-corrected
stochastic blockmodel and the random dot product graph with a finite
mixture of atoms. Both expose the latent positions used to generate
edges, the sparsity factor applied, and a calibration helper that sets
the sparsity so the expected mean degree hits a target.

Sampling is a pure function of (config, n, seed): identical inputs give
bit-identical graphs. Parallel replication should use distinct seeds.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal

import numpy as np

from .errors import (
    InvalidConfig,
    IsolatedNode,
    NegativeTarget,
    ProbabilityOverflow,
)
from .netcore import Graph

_B_EIGENVALUE_FLOOR = -1e-10
_PROBE_SEED = 0xC0FFEE
_MAX_RESAMPLE_ATTEMPTS = 10


@dataclass(frozen=True)
class ConstantLaw:
    """Degenerate degree-multiplier law: every node gets `value`."""

    value: float = 1.0

    def __post_init__(self):
        if self.value <= 0:
            raise InvalidConfig("constant multiplier must be positive")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.full(n, self.value)

    def mean(self) -> float:
        return self.value

    def upper_bound(self) -> float:
        return self.value


@dataclass(frozen=True)
class UniformLaw:
    """Continuous uniform degree-multiplier law on [lo, hi], sampled by inverse CDF."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0 < self.lo <= self.hi):
            raise InvalidConfig(f"need 0 < lo <= hi, got [{self.lo}, {self.hi}]")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * rng.random(n)

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def upper_bound(self) -> float:
        return self.hi


MultiplierLaw = ConstantLaw | UniformLaw


@dataclass(frozen=True)
class ExplicitRho:
    rho: float

    def __post_init__(self):
        if self.rho < 0:
            raise InvalidConfig("sparsity factor must be >= 0")


@dataclass(frozen=True)
class PowerLawMeanDegree:
    """Target mean degree m(n) = coefficient * n^exponent."""

    coefficient: float
    exponent: float

    def __call__(self, n: int) -> float:
        return self.coefficient * float(n) ** self.exponent


@dataclass(frozen=True)
class TargetMeanDegree:
    """Sparsity chosen so the marginal expected degree equals target(n)."""

    target: Callable[[int], float]


Sparsity = ExplicitRho | TargetMeanDegree


@dataclass(frozen=True)
class LatentPositions:
    """Latent position matrix with one row per node."""

    X: np.ndarray
    mu_hat: np.ndarray

    @classmethod
    def from_rows(cls, X: np.ndarray) -> "LatentPositions":
        X = np.asarray(X, dtype=float)
        _probe_inner_products(X)
        return cls(X=X, mu_hat=X.mean(axis=0))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


def _probe_inner_products(X: np.ndarray, pairs: int = 1000) -> None:
    """Spot-check that sampled positions have non-negative inner products."""
    n = X.shape[0]
    if n < 2:
        return
    rng = np.random.default_rng(_PROBE_SEED)
    i = rng.integers(0, n, size=pairs)
    j = rng.integers(0, n, size=pairs)
    ips = np.einsum("ij,ij->i", X[i], X[j])
    if ips.min() < -1e-10:
        raise InvalidConfig(f"negative latent inner product {ips.min():.3e}")


def _symmetric_sqrt(B: np.ndarray) -> np.ndarray:
    lam, U = np.linalg.eigh(B)
    if lam.min() < _B_EIGENVALUE_FLOOR:
        raise InvalidConfig(f"block rate matrix has eigenvalue {lam.min():.3e} < 0")
    lam = np.clip(lam, 0.0, None)
    return (U * np.sqrt(lam)) @ U.T


@dataclass(frozen=True)
class DcsbmConfig:
    """Poisson degree-corrected stochastic blockmodel specification.

    Edges between i < j are independent Poisson with rate
    rho * theta_i * B[z(i), z(j)] * theta_j, where z are block labels drawn
    from pi and theta are degree-correction multipliers.
    """

    pi: np.ndarray
    B: np.ndarray
    theta_law: MultiplierLaw
    sparsity: Sparsity

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if pi.ndim != 1 or np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-12:
            raise InvalidConfig("pi must be a probability vector summing to 1")
        if B.shape != (pi.size, pi.size):
            raise InvalidConfig("B must be d x d for d = len(pi)")
        if not np.allclose(B, B.T, atol=0):
            raise InvalidConfig("B must be symmetric")
        if B.min() < 0 or B.max() > 1:
            raise InvalidConfig("B entries must lie in [0, 1]")
        _symmetric_sqrt(B)  # rejects indefinite B
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "B", B)

    @property
    def d(self) -> int:
        return self.pi.size

    def atoms(self) -> np.ndarray:
        """Per-block latent positions: rows of the symmetric square root of B."""
        return _symmetric_sqrt(self.B)

    def mean_latent(self) -> np.ndarray:
        """Analytic mean of the latent position distribution."""
        return self.theta_law.mean() * (self.pi @ self.atoms())


@dataclass(frozen=True)
class RdpgConfig:
    """Random dot product graph over a finite mixture of latent atoms.

    Node i draws an atom with probabilities atom_probs and multiplies it by
    a degree multiplier; conditional on positions X, edge weights are
    independent with mean rho * X_i . X_j under the chosen edge law.
    """

    atoms: np.ndarray
    atom_probs: np.ndarray
    degree_multiplier_law: MultiplierLaw
    edge_law: Literal["bernoulli", "poisson"]
    sparsity: Sparsity

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        probs = np.asarray(self.atom_probs, dtype=float)
        if atoms.ndim != 2:
            raise InvalidConfig("atoms must be a k x d matrix")
        if probs.ndim != 1 or probs.size != atoms.shape[0]:
            raise InvalidConfig("atom_probs must have one entry per atom")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise InvalidConfig("atom_probs must be a probability vector")
        if self.edge_law not in ("bernoulli", "poisson"):
            raise InvalidConfig(f"unknown edge law {self.edge_law!r}")
        gram = atoms @ atoms.T
        if gram.min() < -1e-10:
            raise InvalidConfig("atom inner products must be non-negative")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "atom_probs", probs)

    @property
    def d(self) -> int:
        return self.atoms.shape[1]

    def mean_latent(self) -> np.ndarray:
        return self.degree_multiplier_law.mean() * (self.atom_probs @ self.atoms)

    def max_inner_product(self) -> float:
        """Largest possible X_i . X_j over atoms and multiplier support."""
        bound = self.degree_multiplier_law.upper_bound()
        return bound**2 * float((self.atoms @ self.atoms.T).max())


def calibrate_rho(config: DcsbmConfig | RdpgConfig, n: int) -> float:
    """Sparsity factor that makes the marginal expected degree hit the target.

    The expected degree of a node is rho * (n - 1) * ||mu||^2, where mu is the
    mean latent position, so rho = target(n) / ((n - 1) * ||mu||^2). For the
    blockmodel this reduces to target(n) / ((n-1) * (E theta)^2 * pi' B pi).
    The result may exceed 1 for Poisson edges, which take rates rather than
    probabilities.
    """
    if not isinstance(config.sparsity, TargetMeanDegree):
        raise InvalidConfig("calibration requires a TargetMeanDegree sparsity")
    target = float(config.sparsity.target(n))
    if target < 0:
        raise NegativeTarget(f"target mean degree {target} is negative")
    if target == 0:
        return 0.0
    mu = config.mean_latent()
    mu_sq = float(mu @ mu)
    if mu_sq <= 0:
        raise InvalidConfig("mean latent position is zero; cannot calibrate")
    return target / ((n - 1) * mu_sq)


def resolve_rho(config: DcsbmConfig | RdpgConfig, n: int) -> float:
    if isinstance(config.sparsity, ExplicitRho):
        return config.sparsity.rho
    return calibrate_rho(config, n)


def _categorical(probs: np.ndarray, rng: np.random.Generator, n: int) -> np.ndarray:
    """Inverse-CDF categorical draws (platform-stable given the stream)."""
    edges = np.cumsum(probs)
    edges[-1] = 1.0
    return np.searchsorted(edges, rng.random(n), side="right").astype(np.intp)


def _sample_symmetric_edges(
    rates: np.ndarray, edge_law: str, rng: np.random.Generator
) -> np.ndarray:
    n = rates.shape[0]
    iu = np.triu_indices(n, k=1)
    upper = rates[iu]
    if edge_law == "poisson":
        vals = rng.poisson(upper).astype(float)
    else:
        if upper.max(initial=0.0) > 1.0 + 1e-12:
            raise ProbabilityOverflow(
                f"edge probability {upper.max():.6f} exceeds 1"
            )
        vals = (rng.random(upper.size) < upper).astype(float)
    w = np.zeros((n, n))
    w[iu] = vals
    return w + w.T


def sample_edges_given_positions(
    X: np.ndarray, rho: float, edge_law: str, seed: int
) -> Graph:
    """Raw conditional edge sampler: no isolated-node resampling."""
    X = np.asarray(X, dtype=float)
    rates = rho * (X @ X.T)
    np.fill_diagonal(rates, 0.0)
    rates = np.clip(rates, 0.0, None)
    return Graph(_sample_symmetric_edges(rates, edge_law, np.random.default_rng(seed)))


@dataclass(frozen=True)
class DcsbmSample:
    graph: Graph
    X: LatentPositions
    blocks: np.ndarray
    theta: np.ndarray
    rho_used: float


@dataclass(frozen=True)
class RdpgSample:
    graph: Graph
    X: LatentPositions
    rho_used: float


def _draw_dcsbm_once(config: DcsbmConfig, n: int, seed: int) -> DcsbmSample:
    rng = np.random.default_rng(seed)
    blocks = _categorical(config.pi, rng, n)
    theta = config.theta_law.sample(n, rng)
    X = theta[:, None] * config.atoms()[blocks]
    rho = resolve_rho(config, n)
    rates = rho * (X @ X.T)
    np.fill_diagonal(rates, 0.0)
    weights = _sample_symmetric_edges(rates, "poisson", rng)
    return DcsbmSample(
        graph=Graph(weights),
        X=LatentPositions.from_rows(X),
        blocks=blocks,
        theta=theta,
        rho_used=rho,
    )


def _rates_identically_zero(X: LatentPositions, rho: float) -> bool:
    if rho == 0:
        return True
    gram = X.X @ X.X.T
    np.fill_diagonal(gram, 0.0)
    return float(gram.max()) <= 0.0


def sample_dcsbm(config: DcsbmConfig, n: int, seed: int) -> DcsbmSample:
    """Sample a Poisson blockmodel graph together with its latent positions.

    Latent positions exclude the sparsity factor: X_i = theta_i times the
    block's row of B^{1/2}, and rho is reported separately in rho_used.
    Graphs containing isolated nodes are redrawn with an incremented seed,
    up to 10 attempts; a deterministically empty graph (all rates zero) is
    returned as-is since redrawing cannot help.
    """
    if n < 2:
        raise InvalidConfig("need at least two nodes")
    sample = None
    for attempt in range(_MAX_RESAMPLE_ATTEMPTS):
        sample = _draw_dcsbm_once(config, n, seed + attempt)
        deg = sample.graph.degrees()
        if deg.min() > 0 or _rates_identically_zero(sample.X, sample.rho_used):
            return sample
    raise IsolatedNode(np.flatnonzero(sample.graph.degrees() == 0))


def _draw_rdpg_once(config: RdpgConfig, n: int, seed: int) -> RdpgSample:
    rng = np.random.default_rng(seed)
    which = _categorical(config.atom_probs, rng, n)
    mult = config.degree_multiplier_law.sample(n, rng)
    X = mult[:, None] * config.atoms[which]
    rho = resolve_rho(config, n)
    rates = rho * (X @ X.T)
    np.fill_diagonal(rates, 0.0)
    rates = np.clip(rates, 0.0, None)
    weights = _sample_symmetric_edges(rates, config.edge_law, rng)
    return RdpgSample(graph=Graph(weights), X=LatentPositions.from_rows(X), rho_used=rho)


def sample_rdpg(config: RdpgConfig, n: int, seed: int) -> RdpgSample:
    """Sample a random dot product graph; same resampling policy as sample_dcsbm.

    For the Bernoulli edge law the worst-case edge probability over atoms and
    multiplier support must not exceed 1; otherwise ProbabilityOverflow is
    raised rather than silently clamping.
    """
    if n < 2:
        raise InvalidConfig("need at least two nodes")
    rho = resolve_rho(config, n)
    if config.edge_law == "bernoulli" and rho * config.max_inner_product() > 1 + 1e-12:
        raise ProbabilityOverflow(
            f"rho * max inner product = {rho * config.max_inner_product():.6f} > 1"
        )
    sample = None
    for attempt in range(_MAX_RESAMPLE_ATTEMPTS):
        sample = _draw_rdpg_once(config, n, seed + attempt)
        deg = sample.graph.degrees()
        if deg.min() > 0 or _rates_identically_zero(sample.X, sample.rho_used):
            return sample
    raise IsolatedNode(np.flatnonzero(sample.graph.degrees() == 0))


@dataclass(frozen=True)
class ExpectedDegrees:
    delta: np.ndarray
    delta_min: float


def expected_degrees(X: LatentPositions | np.ndarray, rho: float) -> ExpectedDegrees:
    """Conditional expected degrees delta_i = rho * sum_{j != i} X_i . X_j."""
    rows = X.X if isinstance(X, LatentPositions) else np.asarray(X, dtype=float)
    total = rows @ rows.sum(axis=0)
    self_ip = np.einsum("ij,ij->i", rows, rows)
    delta = rho * (total - self_ip)
    return ExpectedDegrees(delta=delta, delta_min=float(delta.min()))


def sample_bernoulli_covariates(p: float, n: int, seed: int) -> np.ndarray:
    """I.i.d. Bernoulli(p) nodal covariates, independent of any graph."""
    if not 0 <= p <= 1:
        raise InvalidConfig(f"p = {p} is not a probability")
    rng = np.random.default_rng(seed)
    return (rng.random(n) < p).astype(float)


def write_latent_csv(path: str | Path, X: LatentPositions | np.ndarray) -> None:
    """Export latent positions as CSV with header node,x1,...,xd."""
    rows = X.X if isinstance(X, LatentPositions) else np.asarray(X, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node"] + [f"x{k + 1}" for k in range(rows.shape[1])])
        for i, row in enumerate(rows):
            writer.writerow([i] + [repr(float(v)) for v in row])
