"""Grid-based mutual information and cross-entropy edge weights."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import DataError, NumericError
from .kde import BivariateKDE, GridFits, UnivariateKDE, check_same_grid, marginalize_bivariate


@dataclass
class MIMatrix:
    """Symmetric ``d x d`` edge-weight matrix with a zero diagonal.

    ``estimator_tag`` is one of ``fast``, ``medium``, ``slow`` or ``cross``.
    """

    entries: np.ndarray
    estimator_tag: str = "medium"

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, ij):
        return self.entries[ij]

    def scaled(self, c: float) -> "MIMatrix":
        return MIMatrix(self.entries * c, self.estimator_tag)


def _xlogx_sum(values):
    return float(np.sum(values * np.log(values)))


def mi_medium(biv: BivariateKDE, uni_i: UnivariateKDE, uni_j: UnivariateKDE) -> float:
    """Bivariate-weighted log ratio against separately fitted univariate densities."""
    check_same_grid(biv, uni_i, uni_j)
    p = biv.values
    ratio = p / np.outer(uni_i.values, uni_j.values)
    return float(np.sum(p * np.log(ratio))) / biv.grid.m ** 2


def _entropy_form(biv, marg_i, marg_j):
    m = biv.grid.m
    return (_xlogx_sum(biv.values) / m ** 2
            - _xlogx_sum(marg_i) / m
            - _xlogx_sum(marg_j) / m)


def mi_fast(biv: BivariateKDE, uni_i: UnivariateKDE, uni_j: UnivariateKDE) -> float:
    """Plug-in entropy difference; may come out negative."""
    check_same_grid(biv, uni_i, uni_j)
    return _entropy_form(biv, uni_i.values, uni_j.values)


def mi_slow(biv: BivariateKDE, marginal_i: Optional[np.ndarray] = None,
            marginal_j: Optional[np.ndarray] = None) -> float:
    """Entropy difference using marginals integrated out of ``biv`` itself."""
    if marginal_i is None:
        marginal_i = marginalize_bivariate(biv, 0)
    if marginal_j is None:
        marginal_j = marginalize_bivariate(biv, 1)
    m = biv.grid.m
    if len(marginal_i) != m or len(marginal_j) != m:
        raise DataError("marginals do not match the bivariate grid")
    return _entropy_form(biv, np.asarray(marginal_i), np.asarray(marginal_j))


def cross_mi(biv_heldout: BivariateKDE, biv_train: BivariateKDE,
             uni_i: UnivariateKDE, uni_j: UnivariateKDE) -> float:
    """Held-out bivariate estimate integrated against the training log ratio."""
    check_same_grid(biv_heldout, biv_train, uni_i, uni_j)
    ratio = biv_train.values / np.outer(uni_i.values, uni_j.values)
    return float(np.sum(biv_heldout.values * np.log(ratio))) / biv_train.grid.m ** 2


def pair_weight(fits: GridFits, i: int, j: int, estimator: str = "medium",
                heldout: Optional[GridFits] = None) -> float:
    """Edge weight for one pair using precomputed per-variable fits."""
    biv = fits.bivariate(i, j)
    if estimator == "medium":
        return mi_medium(biv, fits.univariate[i], fits.univariate[j])
    if estimator == "fast":
        return mi_fast(biv, fits.univariate[i], fits.univariate[j])
    if estimator == "slow":
        return mi_slow(biv)
    if estimator == "cross":
        if heldout is None:
            raise ValueError("cross estimator needs held-out fits")
        return cross_mi(heldout.bivariate(i, j), biv, fits.univariate[i], fits.univariate[j])
    raise ValueError(f"unknown estimator {estimator!r}")


def mi_matrix(fits: GridFits, estimator: str = "medium", heldout: Optional[GridFits] = None,
              n_jobs: int = 1) -> MIMatrix:
    """Assemble all pairwise weights.

    Per-variable kernel rows live in ``fits`` (and ``heldout`` for the cross
    estimator), so each pair costs one ``m x n`` by ``n x m`` product.  With
    ``n_jobs > 1`` pairs are evaluated on a thread pool; each pair has a fixed
    reduction order so the result does not depend on scheduling.
    """
    d = fits.d
    if d < 2:
        raise DataError("need at least two variables")
    if heldout is not None:
        if heldout.d != d:
            raise DataError(f"held-out data has {heldout.d} columns, training has {d}")
        check_same_grid(fits.univariate[0], heldout.univariate[0])
    pairs = list(combinations(range(d), 2))

    def work(pair):
        i, j = pair
        try:
            return pair_weight(fits, i, j, estimator, heldout)
        except ValueError as exc:
            raise DataError(f"pair ({i}, {j}): {exc}") from exc

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            values = list(pool.map(work, pairs))
    else:
        values = [work(p) for p in pairs]

    entries = np.zeros((d, d))
    for (i, j), v in zip(pairs, values):
        entries[i, j] = entries[j, i] = v
    if not np.all(np.isfinite(entries)):
        raise NumericError("non-finite mutual information estimate")
    return MIMatrix(entries, "cross" if estimator == "cross" else estimator)
