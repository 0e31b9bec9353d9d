"""Graph container, degrees, and the neighborhood-averaging operator.

The averaging operator G = D^{-1} A maps nodal values to the mean value
over each node's neighborhood. Its spectrum is computed from the
symmetric similar matrix D^{-1/2} A D^{-1/2}, which guarantees real
eigenvalues in [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EdgeListFormatError, InvalidGraph, IsolatedNode

ROW_SUM_RTOL = 1e-10
SPECTRUM_ATOL = 1e-9


def _validate_weights(weights: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InvalidGraph(f"weights must be square, got shape {w.shape}")
    if not np.array_equal(w, w.T):
        raise InvalidGraph("weights must be exactly symmetric")
    if np.any(np.diag(w) != 0.0):
        raise InvalidGraph("weights must be hollow (zero diagonal)")
    if np.any(w < 0):
        raise InvalidGraph("weights must be non-negative")
    return w


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph stored as a dense symmetric hollow matrix."""

    weights: np.ndarray

    def __post_init__(self):
        w = _validate_weights(self.weights)
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def degrees(self) -> np.ndarray:
        """Row sums of the weight matrix, one entry per node."""
        return self.weights.sum(axis=1)


def degrees(graph: Graph) -> np.ndarray:
    """Degree vector d with d_i = sum_j weights[i, j]."""
    return graph.degrees()


class AveragingOperator:
    """Row-normalized adjacency G = D^{-1} A over a graph with no isolated nodes.

    Immutable after construction; the dense matrix and the spectrum are shared
    read-only. Use :func:`averaging_operator` to construct one.
    """

    def __init__(self, graph: Graph):
        d = graph.degrees()
        isolated = np.flatnonzero(d == 0)
        if isolated.size:
            raise IsolatedNode(isolated)
        self.graph = graph
        self.degrees = d
        self.matrix = graph.weights / d[:, None]
        self.matrix.setflags(write=False)
        self._eigenvalues: np.ndarray | None = None
        row_err = np.abs(self.matrix.sum(axis=1) - 1.0).max()
        if row_err > ROW_SUM_RTOL:
            raise InvalidGraph(f"row sums deviate from 1 by {row_err:.3e}")

    @property
    def n(self) -> int:
        return self.graph.n

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Neighborhood averages Gv; matrices are averaged column-wise."""
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.n:
            raise DimensionMismatch(f"vector of length {v.shape[0]} on {self.n} nodes")
        return self.matrix @ v

    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues of G, descending.

        Computed once from the symmetric matrix D^{-1/2} A D^{-1/2}, which is
        similar to G, so the spectrum is real and lies in [-1, 1] with the
        leading eigenvalue equal to 1.
        """
        if self._eigenvalues is None:
            s = 1.0 / np.sqrt(self.degrees)
            sym = self.graph.weights * s[:, None] * s[None, :]
            lam = np.linalg.eigvalsh(sym)[::-1]
            if lam[0] < 1.0 - SPECTRUM_ATOL or lam[0] > 1.0 + SPECTRUM_ATOL:
                raise InvalidGraph(f"leading eigenvalue {lam[0]!r} is not 1")
            if lam[-1] < -1.0 - SPECTRUM_ATOL:
                raise InvalidGraph(f"eigenvalue {lam[-1]!r} below -1")
            lam.setflags(write=False)
            self._eigenvalues = lam
        return self._eigenvalues


def averaging_operator(graph: Graph) -> AveragingOperator:
    """Construct G = D^{-1} A, failing with IsolatedNode if any degree is zero."""
    return AveragingOperator(graph)


def apply(op: AveragingOperator, v: np.ndarray) -> np.ndarray:
    return op.apply(v)


def eigenvalues(op: AveragingOperator) -> np.ndarray:
    return op.eigenvalues()


@dataclass(frozen=True)
class FrobeniusStats:
    """Fixed summaries of how much averaging G does.

    frob_sq is sum_ij G_ij^2; rate_bound = sqrt(n / frob_sq) is the
    slow-rate factor that governs how fast peer-effect coefficients can be
    estimated on this network (of order sqrt(n / d_min) for binary graphs).
    """

    frob_sq: float
    rate_bound: float


def frobenius_stats(op: AveragingOperator) -> FrobeniusStats:
    frob_sq = float(np.sum(op.matrix**2))
    return FrobeniusStats(frob_sq=frob_sq, rate_bound=float(np.sqrt(op.n / frob_sq)))


@dataclass(frozen=True)
class NeighborhoodConcentration:
    """Degree-growth diagnostics: how concentrated each row of G is.

    max_sq_row_mass = max_i d_i^{-2} sum_j A_ij^2 and max_entry_share =
    max_ij A_ij / d_i. Both must vanish as the network grows for
    neighborhood averages to concentrate around their means.
    """

    max_sq_row_mass: float
    max_entry_share: float


def neighborhood_concentration(op: AveragingOperator) -> NeighborhoodConcentration:
    a = op.graph.weights
    d = op.degrees
    return NeighborhoodConcentration(
        max_sq_row_mass=float(((a**2).sum(axis=1) / d**2).max()),
        max_entry_share=float((a / d[:, None]).max()),
    )


def write_edge_list(path: str | Path, graph: Graph) -> None:
    """Write the graph in edge-list form: header ``n=<count>``, then one
    ``i j w`` line per undirected edge with i < j."""
    lines = [f"n={graph.n}"]
    iu, ju = np.nonzero(np.triu(graph.weights, k=1))
    w = graph.weights[iu, ju]
    for i, j, wij in zip(iu.tolist(), ju.tolist(), w.tolist()):
        lines.append(f"{i} {j} {wij!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path: str | Path) -> Graph:
    """Read a graph written by :func:`write_edge_list`.

    Lines starting with ``#`` are comments; the first data line must be the
    ``n=<count>`` header.
    """
    n = None
    weights = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            if not line.startswith("n="):
                raise EdgeListFormatError(f"line {lineno}: expected 'n=<count>' header")
            try:
                n = int(line[2:])
            except ValueError as exc:
                raise EdgeListFormatError(f"line {lineno}: bad node count") from exc
            if n < 1:
                raise EdgeListFormatError(f"line {lineno}: node count must be >= 1")
            weights = np.zeros((n, n))
            continue
        parts = line.split()
        if len(parts) != 3:
            raise EdgeListFormatError(f"line {lineno}: expected 'i j w'")
        try:
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise EdgeListFormatError(f"line {lineno}: bad edge entry") from exc
        if i == j:
            raise EdgeListFormatError(f"line {lineno}: self-loop {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise EdgeListFormatError(f"line {lineno}: node id out of range")
        if w < 0:
            raise EdgeListFormatError(f"line {lineno}: negative weight")
        if weights[i, j] != 0:
            raise EdgeListFormatError(f"line {lineno}: duplicate edge {i}-{j}")
        weights[i, j] = weights[j, i] = w
    if n is None:
        raise EdgeListFormatError("missing 'n=<count>' header")
    return Graph(weights)
