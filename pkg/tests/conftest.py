import numpy as np
import pytest

from limlab.netcore import Graph, averaging_operator


def graph_from_edges(n, edges, weight=1.0):
    w = np.zeros((n, n))
    for i, j in edges:
        w[i, j] = w[j, i] = weight
    return Graph(w)


def complete_graph(n, weight=1.0):
    w = np.full((n, n), weight)
    np.fill_diagonal(w, 0.0)
    return Graph(w)


def path_graph(n):
    return graph_from_edges(n, [(i, i + 1) for i in range(n - 1)])


def random_graph(n, p, rng):
    """Binary G(n, p) conditioned on no isolated nodes (resampled)."""
    for _ in range(200):
        u = rng.random((n, n))
        w = np.triu(u < p, k=1).astype(float)
        w = w + w.T
        if w.sum(axis=1).min() > 0:
            return Graph(w)
    raise RuntimeError("could not draw a graph without isolated nodes")


@pytest.fixture
def four_node_graph():
    """The worked 4-node example: nodes A,B,C,D with edges AB, AC, BC, CD."""
    return graph_from_edges(4, [(0, 1), (0, 2), (1, 2), (2, 3)])


@pytest.fixture
def four_node_op(four_node_graph):
    return averaging_operator(four_node_graph)


@pytest.fixture
def covariate_abcd():
    """Binary covariate (T_A, T_B, T_C, T_D) = (1, 0, 1, 1)."""
    return np.array([1.0, 0.0, 1.0, 1.0])
