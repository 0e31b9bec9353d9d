"""Exception types shared across the package."""


class LimLabError(Exception):
    """Base class for all package-specific errors."""


class IsolatedNode(LimLabError):
    """A node has zero degree, so the averaging operator is undefined."""

    def __init__(self, nodes):
        self.nodes = tuple(int(i) for i in nodes)
        milestone = ", ".join(str(i) for i in self.nodes[:5])
        more = "" if len(self.nodes) <= 5 else f" (+{len(self.nodes) - 5} more)"
        super().__init__(f"isolated node(s): {milestone}{more}")


class DimensionMismatch(LimLabError):
    """Operand shapes are incompatible."""


class InvalidGraph(LimLabError):
    """Adjacency weights violate symmetry, hollowness, or non-negativity."""


class InvalidConfig(LimLabError):
    """A generator or experiment configuration violates its constraints."""


class NegativeTarget(LimLabError):
    """Requested target mean degree is negative."""


class ProbabilityOverflow(LimLabError):
    """Bernoulli edge law would require an edge probability above 1."""


class DegenerateInnerProduct(LimLabError):
    """Some latent position has non-positive inner product with the mean."""


class SingularSystem(LimLabError):
    """A linear solve that should be well-posed failed numerically."""


class EdgeListFormatError(LimLabError):
    """An edge-list file is malformed."""
