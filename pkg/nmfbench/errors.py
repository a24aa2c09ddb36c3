"""
Domain errors for nmfbench.

Every failure the numerical core can report is a subclass of NmfError, so
callers (the benchmark grid, the CLI and the HTTP routers) can catch one
base class and still inspect the specific condition.
"""

from typing import Optional, Tuple


class NmfError(Exception):
    """Base class for all nmfbench domain errors."""


class NonFiniteEntry(NmfError):
    """A matrix handed to a constructor contains NaN or Inf."""


class ZeroMatrix(NmfError):
    """An operation needs a matrix with non-zero Frobenius norm."""


class ConvergenceFailure(NmfError):
    """An iterative scheme exceeded its iteration cap."""


class DomainError(NmfError):
    """A divergence is undefined, e.g. x_ij > 0 where (WH)_ij = 0."""


class EmptySelection(NmfError):
    """An index selection was empty or referenced invalid columns."""


class BadRank(NmfError):
    """The factorization rank is outside 1..min(m, n) (or a stricter bound)."""

    def __init__(self, rank: int, bound: int, what: str = "min(m, n)", lower: int = 1):
        self.rank = rank
        self.bound = bound
        super().__init__(f"rank {rank} must satisfy {lower} <= r <= {what} = {bound}")


class BadQ(NmfError):
    """Column-averaging parameters q / pool are inconsistent with the data."""


class BadK(NmfError):
    """Cluster count k is outside 1..n."""


class NotAnImageDataset(NmfError):
    """The dataset rows do not match the requested image shape."""


class ZeroSpectrum(NmfError):
    """A singular-value spectrum sums to zero."""


class DegenerateData(NmfError):
    """Centered data is identically zero (or too few samples)."""


class UnknownName(NmfError):
    """An initializer or solver name is not registered."""


class ParseError(NmfError):
    """A dataset file could not be parsed.

    Attributes:
        line: 1-based line number of the first offense
        column: 1-based field number, if known
    """

    def __init__(self, message: str, line: int, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f"line {line}" if column is None else f"line {line}, field {column}"
        super().__init__(f"{where}: {message}")


class NegativeEntry(NmfError):
    """A dataset entry is negative.

    Attributes:
        position: 0-based (row, col) of the first negative value
    """

    def __init__(self, position: Tuple[int, int], value: float):
        self.position = position
        self.value = value
        super().__init__(f"negative entry {value} at {position}")


class MixedDimensions(NmfError):
    """Images in a directory do not share one shape."""


class UnsupportedFormat(NmfError):
    """A file is not a P2/P5 PGM image."""


class IoError(NmfError):
    """Reading a dataset or writing a result artifact failed."""


class ShapeMismatch(NmfError):
    """Factor shapes do not conform to the data matrix."""
