"""End-to-end fitting: rescale, split, estimate weights, build and select forests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import RunConfig
from .density import ForestDensityModel, fit_model
from .forest import Forest, ForestSequence, chow_liu
from .kde import AffineMap, GridFits, rescale_to_unit_cube
from .mutual_info import MIMatrix, mi_matrix
from .restricted import RestrictedResult, restricted_fde
from .selection import Selection, select_k


@dataclass
class SplitData:
    """Unit-cube data split into training (D1) and held-out (D2) rows."""

    train: np.ndarray
    heldout: np.ndarray
    train_raw: np.ndarray
    heldout_raw: np.ndarray
    rescale: AffineMap
    permutation: np.ndarray


def split_data(data, config: RunConfig = RunConfig()) -> SplitData:
    """Rescale all rows jointly, shuffle with ``config.seed``, take the first ``ceil(split n)`` as D1."""
    data = np.asarray(data, dtype=float)
    scaled, amap = rescale_to_unit_cube(data)
    n = data.shape[0]
    perm = np.random.Generator(np.random.PCG64(config.seed)).permutation(n)
    n1 = math.ceil(config.split * n)
    if not 0 < n1 < n:
        raise ValueError(f"split {config.split} leaves an empty part for n={n}")
    a, b = perm[:n1], perm[n1:]
    return SplitData(scaled[a], scaled[b], data[a], data[b], amap, perm)


@dataclass
class FitResult:
    weights: MIMatrix
    sequence: ForestSequence
    selection: Selection
    model: ForestDensityModel
    split: SplitData


def fit_forest(data, config: RunConfig = RunConfig(), split: Optional[SplitData] = None) -> FitResult:
    """Chow-Liu forest on D1 with the number of edges chosen on D2."""
    split = split if split is not None else split_data(data, config)
    train = GridFits.from_config(split.train, config)
    weights = mi_matrix(train, config.estimator, n_jobs=config.n_jobs)
    seq = chow_liu(weights)
    base = fit_model(Forest(seq.d), split.train, config, rescale=split.rescale, train_raw=split.train_raw)
    heldout = GridFits.from_config(split.heldout, config) if config.mode == "grid" else None
    sel = select_k(seq, train, split.heldout, mode=config.mode, heldout=heldout, model=base)
    model = fit_model(sel.forest, split.train, config, rescale=split.rescale, train_raw=split.train_raw)
    model.meta = {"k": sel.k, "mode": sel.mode, "estimator": config.estimator,
                  "split_permutation": split.permutation.tolist()}
    return FitResult(weights, seq, sel, model, split)


def fit_restricted(data, kappa_max: int, config: RunConfig = RunConfig(),
                   split: Optional[SplitData] = None) -> RestrictedResult:
    split = split if split is not None else split_data(data, config)
    train = GridFits.from_config(split.train, config)
    heldout = GridFits.from_config(split.heldout, config)
    result = restricted_fde(train, heldout, kappa_max, config.estimator, n_jobs=config.n_jobs)
    result.model = fit_model(result.forest, split.train, config, rescale=split.rescale,
                             train_raw=split.train_raw)
    result.model.meta = {"kappa": result.kappa, "estimator": config.estimator,
                         "split_permutation": split.permutation.tolist()}
    return result
