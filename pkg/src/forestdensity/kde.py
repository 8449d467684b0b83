"""
Univariate and bivariate kernel density estimates on a fixed evaluation grid.

All estimates assume data that has been rescaled to the unit cube.  Values are
clamped from below at a small floor so that logarithms of estimated densities
stay finite.  Bivariate estimates use a product kernel and are computed from
per-variable kernel rows ``H[s, k] = K((X_s - x_k) / h) / h``, so the grid
estimate for a pair ``(i, j)`` reduces to ``H_i.T @ H_j / n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateColumnError, GridMismatchError

# Lower truncation of density values.  Compactly supported kernels give exact
# zeros off the data; held-out points landing there would otherwise dominate
# log-likelihoods and cross-entropies.
DEFAULT_FLOOR = 1e-3

# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


def _epanechnikov(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


def _boxcar(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.5, 0.0)


KERNELS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "epanechnikov": _epanechnikov,
    "boxcar": _boxcar,
}


@dataclass(frozen=True)
class KernelSpec:
    """A compactly supported symmetric kernel integrating to one on [-1, 1]."""

    family: str = "epanechnikov"
    support_radius: float = 1.0

    def __post_init__(self):
        if self.family not in KERNELS:
            raise ValueError(f"unknown kernel family {self.family!r}")

    def __call__(self, u):
        return KERNELS[self.family](u)


def as_kernel(kernel) -> KernelSpec:
    if isinstance(kernel, KernelSpec):
        return kernel
    return KernelSpec(str(kernel))


# ---------------------------------------------------------------------------
# Grid and rescaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Uniform midpoint grid ``x_l = (l - 0.5) / m`` on [0, 1]."""

    m: int = 128

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("grid needs at least one point")

    @property
    def points(self) -> np.ndarray:
        return (np.arange(1, self.m + 1) - 0.5) / self.m

    @property
    def cell_width(self) -> float:
        return 1.0 / self.m


@dataclass(frozen=True)
class AffineMap:
    """Per-dimension map ``x -> (x - lo) / span`` into the unit cube."""

    lo: np.ndarray
    span: np.ndarray

    def apply(self, data):
        return (np.asarray(data, dtype=float) - self.lo) / self.span

    def inverse(self, scaled):
        return np.asarray(scaled, dtype=float) * self.span + self.lo

    def to_dict(self):
        return {"lo": self.lo.tolist(), "span": self.span.tolist()}

    @classmethod
    def from_dict(cls, payload):
        return cls(np.asarray(payload["lo"], dtype=float), np.asarray(payload["span"], dtype=float))


def rescale_to_unit_cube(data) -> Tuple[np.ndarray, AffineMap]:
    """Map every column affinely so that its minimum is 0 and maximum is 1.

    Raises
    ------
    DegenerateColumnError
        If a column is constant; the offending dimension is named.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError("data must be a 2-d array")
    if data.shape[0] < 2:
        raise ValueError("need at least two samples to rescale")
    lo = data.min(axis=0)
    span = data.max(axis=0) - lo
    for k in np.flatnonzero(span <= 0):
        raise DegenerateColumnError(int(k))
    amap = AffineMap(lo, span)
    scaled = amap.apply(data)
    # guard against roundoff pushing the endpoints outside [0, 1]
    np.clip(scaled, 0.0, 1.0, out=scaled)
    return scaled, amap


# ---------------------------------------------------------------------------
# Bandwidths
# ---------------------------------------------------------------------------


def _robust_scale(column, dim=None) -> float:
    column = np.asarray(column, dtype=float)
    if column.size < 4:
        raise ValueError("bandwidth rule needs at least 4 samples")
    sigma = float(np.std(column, ddof=1))
    q75, q25 = np.percentile(column, [75, 25])
    iqr_scale = float(q75 - q25) / 1.34
    positive = [s for s in (sigma, iqr_scale) if s > 0]
    if not positive:
        raise DegenerateColumnError(dim if dim is not None else "?", "zero variance and zero IQR")
    return min(positive)


def _plug_in(column, beta, offset, dim) -> float:
    if not beta > 0:
        raise ValueError("beta must be positive")
    n = np.asarray(column).size
    return 1.06 * _robust_scale(column, dim) * n ** (-1.0 / (2.0 * beta + offset))


def bandwidth_univariate(column, beta: float = 2.0, dim=None) -> float:
    """Plug-in bandwidth ``1.06 min(sd, IQR/1.34) n^(-1/(2 beta + 1))``."""
    return _plug_in(column, beta, 1.0, dim)


def bandwidth_bivariate(column, beta: float = 2.0, dim=None) -> float:
    """Per-coordinate bandwidth for the product kernel, exponent ``-1/(2 beta + 2)``."""
    return _plug_in(column, beta, 2.0, dim)


# ---------------------------------------------------------------------------
# Estimates
# ---------------------------------------------------------------------------


def kernel_rows(column, points, h: float, kernel) -> np.ndarray:
    """Return ``H[s, l] = K((X_s - x_l) / h) / h`` with shape (n, len(points))."""
    column = np.asarray(column, dtype=float)
    points = np.asarray(points, dtype=float)
    u = (column[:, None] - points[None, :]) / h
    return as_kernel(kernel)(u) / h


@dataclass
class UnivariateKDE:
    dim_index: int
    bandwidth: float
    values: np.ndarray
    floor: float
    grid: Grid


@dataclass
class BivariateKDE:
    """Grid values ``values[k, l]`` at ``(x_k, x_l)`` for dims ``(i, j)``."""

    dims: Tuple[int, int]
    bandwidths: Tuple[float, float]
    values: np.ndarray
    floor: float
    grid: Grid


def fit_univariate(column, kernel, grid: Grid, h1: float, floor: float = DEFAULT_FLOOR,
                   dim_index: int = 0) -> UnivariateKDE:
    if not h1 > 0:
        raise ValueError("bandwidth must be positive")
    H = kernel_rows(column, grid.points, h1, kernel)
    values = np.maximum(H.mean(axis=0), floor)
    return UnivariateKDE(dim_index, float(h1), values, floor, grid)


def _bivariate_from_rows(Hi, Hj, floor):
    return np.maximum(Hi.T @ Hj / Hi.shape[0], floor)


def fit_bivariate(col_i, col_j, kernel, grid: Grid, h2i: float, h2j: float,
                  floor: float = DEFAULT_FLOOR, dims=(0, 1)) -> BivariateKDE:
    if not (h2i > 0 and h2j > 0):
        raise ValueError("bandwidths must be positive")
    Hi = kernel_rows(col_i, grid.points, h2i, kernel)
    Hj = kernel_rows(col_j, grid.points, h2j, kernel)
    values = _bivariate_from_rows(Hi, Hj, floor)
    return BivariateKDE(tuple(dims), (float(h2i), float(h2j)), values, floor, grid)


def marginalize_bivariate(biv: BivariateKDE, keep: int) -> np.ndarray:
    """Average out the other coordinate; ``keep`` is 0 for dim i, 1 for dim j."""
    if keep not in (0, 1):
        raise ValueError("keep must be 0 or 1")
    return biv.values.mean(axis=1 - keep)


def check_same_grid(*estimates):
    ms = {e.grid.m for e in estimates}
    if len(ms) != 1:
        raise GridMismatchError(f"estimates live on different grids: m in {sorted(ms)}")


# ---------------------------------------------------------------------------
# Off-grid evaluation
# ---------------------------------------------------------------------------

_CHUNK_CELLS = 1 << 22


def _chunks(n_train, n_query):
    step = max(1, _CHUNK_CELLS // max(n_train, 1))
    for start in range(0, n_query, step):
        yield slice(start, min(start + step, n_query))


def eval_univariate(column, h: float, kernel, queries, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """Exact kernel sums at arbitrary query points (no interpolation)."""
    column = np.asarray(column, dtype=float)
    queries = np.atleast_1d(np.asarray(queries, dtype=float))
    out = np.empty(queries.shape[0])
    for sl in _chunks(column.size, queries.shape[0]):
        out[sl] = kernel_rows(column, queries[sl], h, kernel).mean(axis=0)
    return np.maximum(out, floor)


def eval_bivariate(col_i, col_j, h_i: float, h_j: float, kernel, q_i, q_j,
                   floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """Product-kernel density at the query pairs ``(q_i[r], q_j[r])``."""
    col_i = np.asarray(col_i, dtype=float)
    col_j = np.asarray(col_j, dtype=float)
    q_i = np.atleast_1d(np.asarray(q_i, dtype=float))
    q_j = np.atleast_1d(np.asarray(q_j, dtype=float))
    out = np.empty(q_i.shape[0])
    for sl in _chunks(col_i.size, q_i.shape[0]):
        Hi = kernel_rows(col_i, q_i[sl], h_i, kernel)
        Hj = kernel_rows(col_j, q_j[sl], h_j, kernel)
        out[sl] = (Hi * Hj).mean(axis=0)
    return np.maximum(out, floor)


def eval_kde_at_point(train, bandwidths, kernel, query, floor: float = DEFAULT_FLOOR) -> float:
    """Density at one query point for a 1-d or 2-d estimate.

    ``train`` is a single column (1-d) or an ``(n, 2)`` array; ``bandwidths``
    is a scalar or a pair to match.
    """
    train = np.asarray(train, dtype=float)
    query = np.atleast_1d(np.asarray(query, dtype=float))
    if np.any(query < 0) or np.any(query > 1):
        raise ValueError("query must lie in the unit cube")
    if train.ndim == 1:
        return float(eval_univariate(train, float(np.squeeze(bandwidths)), kernel, query[:1], floor)[0])
    hi, hj = bandwidths
    return float(eval_bivariate(train[:, 0], train[:, 1], hi, hj, kernel,
                                query[:1], query[1:2], floor)[0])


# ---------------------------------------------------------------------------
# Per-dataset bank of grid estimates
# ---------------------------------------------------------------------------


@dataclass
class GridFits:
    """Grid KDEs for every variable of one data split.

    Univariate estimates and the bivariate kernel rows ``H^(i)`` are computed
    once per variable; a bivariate estimate for any pair is then a single
    matrix product.
    """

    data: np.ndarray
    grid: Grid
    kernel: KernelSpec
    beta: float
    floor: float
    h1: np.ndarray = field(init=False)
    h2: np.ndarray = field(init=False)
    univariate: list = field(init=False)
    _rows: list = field(init=False, repr=False)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise ValueError("data must be 2-d")
        if np.any(self.data < 0) or np.any(self.data > 1):
            raise ValueError("data must be rescaled to the unit cube first")
        self.kernel = as_kernel(self.kernel)
        d = self.data.shape[1]
        self.h1 = np.array([bandwidth_univariate(self.data[:, k], self.beta, dim=k) for k in range(d)])
        self.h2 = np.array([bandwidth_bivariate(self.data[:, k], self.beta, dim=k) for k in range(d)])
        self.univariate = [
            fit_univariate(self.data[:, k], self.kernel, self.grid, self.h1[k], self.floor, dim_index=k)
            for k in range(d)
        ]
        self._rows = [kernel_rows(self.data[:, k], self.grid.points, self.h2[k], self.kernel)
                      for k in range(d)]

    @classmethod
    def from_config(cls, data, config) -> "GridFits":
        return cls(data, Grid(config.m), KernelSpec(config.kernel), config.beta, config.floor)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def bivariate(self, i: int, j: int) -> BivariateKDE:
        values = _bivariate_from_rows(self._rows[i], self._rows[j], self.floor)
        return BivariateKDE((i, j), (float(self.h2[i]), float(self.h2[j])), values, self.floor, self.grid)
