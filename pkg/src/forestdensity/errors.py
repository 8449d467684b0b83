"""Exception types shared across the package.

The CLI maps :class:`DataError` to exit code 3 and :class:`NumericError`
to exit code 4.
"""


class ForestDensityError(Exception):
    """Base class; ``code`` is a short machine-readable tag."""

    code = "error"


class DataError(ForestDensityError, ValueError):
    """Input data is malformed or unusable (bad CSV, constant column, ...)."""

    code = "data"


class DegenerateColumnError(DataError):
    code = "degenerate-column"

    def __init__(self, dim, detail="column has zero range"):
        self.dim = dim
        super().__init__(f"dimension {dim}: {detail}")


class GridMismatchError(DataError):
    code = "grid-mismatch"


class NumericError(ForestDensityError, ArithmeticError):
    """A numerical procedure failed (singular covariance, non-PD matrix, ...)."""

    code = "numeric"
