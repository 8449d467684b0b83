"""Synthetic Gaussian and nonparanormal benchmarks with sparse block precision matrices."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.stats import rankdata

from .errors import NumericError

RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the block-sparse precision benchmark.

    Blocks are disjoint random vertex sets with sizes uniform in
    ``[2, max_block]``, covering about ``coverage`` of the vertices.  Inside a
    block the support is a random spanning tree plus each remaining pair with
    probability ``extra_edge_prob``, so blocks may contain cycles.
    """

    d: int
    n: int
    mean: float = 0.5
    diag: float = 62.0
    offdiag_range: Tuple[float, float] = (-30.0, -10.0)
    max_block: int = 8
    coverage: float = 1.0
    extra_edge_prob: float = 0.2
    seed: int = 0
    transform: str = "none"
    max_retries: int = 100

    def __post_init__(self):
        if self.d < 1 or self.n < 1:
            raise ValueError("d and n must be positive")
        if self.max_block < 2 and self.coverage > 0 and self.d > 1:
            raise ValueError("max_block must be at least 2")
        lo, hi = self.offdiag_range
        if lo > hi:
            raise ValueError("offdiag_range must be (lo, hi) with lo <= hi")
        if self.transform not in ("none", "cdf"):
            raise ValueError("transform must be 'none' or 'cdf'")
        if not 0.0 <= self.coverage <= 1.0:
            raise ValueError("coverage must lie in [0, 1]")

    def to_dict(self):
        out = asdict(self)
        out["offdiag_range"] = list(self.offdiag_range)
        out["rng"] = RNG_ALGORITHM
        return out


@dataclass
class SynthResult:
    data: np.ndarray
    precision: np.ndarray
    truth: List[Tuple[int, int]]
    blocks: List[List[int]]
    spec: SynthSpec


def _random_blocks(d, max_block, coverage, rng) -> List[List[int]]:
    perm = rng.permutation(d)
    target = int(round(coverage * d))
    blocks, pos = [], 0
    while target - pos >= 2:
        size = int(rng.integers(2, max_block + 1))
        size = min(size, target - pos)
        blocks.append(sorted(int(v) for v in perm[pos:pos + size]))
        pos += size
    return blocks


def _block_support(size, extra_prob, rng) -> List[Tuple[int, int]]:
    # random spanning tree by attaching each new vertex to an earlier one
    order = rng.permutation(size)
    pairs = set()
    for t in range(1, size):
        a, b = int(order[t]), int(order[rng.integers(0, t)])
        pairs.add((min(a, b), max(a, b)))
    for a in range(size):
        for b in range(a + 1, size):
            if (a, b) not in pairs and rng.random() < extra_prob:
                pairs.add((a, b))
    return sorted(pairs)


def _is_pd(M) -> bool:
    try:
        linalg.cholesky(M, lower=True)
        return True
    except linalg.LinAlgError:
        return False


def block_precision(spec: SynthSpec, rng) -> Tuple[np.ndarray, List[List[int]]]:
    """Build the precision matrix, resampling a block's values until it is positive definite."""
    omega = np.eye(spec.d) * spec.diag
    blocks = _random_blocks(spec.d, spec.max_block, spec.coverage, rng) if spec.d > 1 else []
    lo, hi = spec.offdiag_range
    for block in blocks:
        support = _block_support(len(block), spec.extra_edge_prob, rng)
        for _ in range(spec.max_retries):
            sub = np.eye(len(block)) * spec.diag
            for a, b in support:
                sub[a, b] = sub[b, a] = rng.uniform(lo, hi)
            if _is_pd(sub):
                break
        else:
            raise NumericError(f"block {block} not positive definite after {spec.max_retries} retries")
        omega[np.ix_(block, block)] = sub
    return omega, blocks


def sample_gaussian_precision(omega, n: int, mean, rng) -> np.ndarray:
    """Draw ``n`` rows of ``N(mean, omega^-1)`` as ``mean + L^-T z`` with ``omega = L L^T``."""
    try:
        L = linalg.cholesky(omega, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericError("precision matrix is not positive definite") from exc
    z = rng.standard_normal((omega.shape[0], n))
    x = linalg.solve_triangular(L, z, lower=True, trans="T")
    return np.asarray(mean, dtype=float) + x.T


def support_edges(omega, tol: float = 0.0) -> List[Tuple[int, int]]:
    iu, ju = np.triu_indices(omega.shape[0], k=1)
    mask = np.abs(omega[iu, ju]) > tol
    return [(int(i), int(j)) for i, j in zip(iu[mask], ju[mask])]


def cdf_transform(data) -> np.ndarray:
    """Replace each column by its empirical CDF, ``rank / (n + 1)``."""
    data = np.asarray(data, dtype=float)
    if data.shape[0] < 2:
        raise ValueError("need at least two rows")
    return rankdata(data, axis=0) / (data.shape[0] + 1)


def generate(spec: SynthSpec) -> SynthResult:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    omega, blocks = block_precision(spec, rng)
    data = sample_gaussian_precision(omega, spec.n, np.full(spec.d, spec.mean), rng)
    if spec.transform == "cdf":
        data = cdf_transform(data)
    return SynthResult(data, omega, support_edges(omega), blocks, spec)


def chain_precision(d: int, rho: float) -> np.ndarray:
    """Precision of a stationary Gaussian AR(1) chain with unit marginal variance."""
    omega = np.zeros((d, d))
    s = 1.0 / (1.0 - rho * rho)
    idx = np.arange(d)
    omega[idx, idx] = s * (1.0 + rho * rho)
    omega[0, 0] = omega[-1, -1] = s
    omega[idx[:-1], idx[1:]] = omega[idx[1:], idx[:-1]] = -rho * s
    return omega


def chain_gaussian(d: int, n: int, rho: float, seed: int = 0,
                   rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Samples of a Gaussian chain with correlation ``rho`` between neighbours."""
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(seed))
    return sample_gaussian_precision(chain_precision(d, rho), n, np.zeros(d), rng)
