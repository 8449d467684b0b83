"""Held-out risk and choice of the forest size along the Chow-Liu path."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .density import ForestDensityModel, fit_model
from .errors import GridMismatchError
from .forest import Forest, ForestSequence
from .kde import GridFits
from .mutual_info import cross_mi


def _require_same_setup(train: GridFits, heldout: GridFits):
    if train.grid.m != heldout.grid.m:
        raise GridMismatchError(f"training grid has m={train.grid.m}, held-out grid has m={heldout.grid.m}")
    if train.d != heldout.d:
        raise GridMismatchError(f"training has d={train.d}, held-out has d={heldout.d}")


def vertex_cross_entropy(train: GridFits, heldout: GridFits) -> np.ndarray:
    """Per-vertex ``(1/m) sum_x p2(x) log p1(x)``."""
    _require_same_setup(train, heldout)
    m = train.grid.m
    return np.array([float(np.sum(h.values * np.log(t.values))) / m
                     for t, h in zip(train.univariate, heldout.univariate)])


def edge_cross_weights(train: GridFits, heldout: GridFits, edges) -> np.ndarray:
    _require_same_setup(train, heldout)
    return np.array([cross_mi(heldout.bivariate(i, j), train.bivariate(i, j),
                              train.univariate[i], train.univariate[j]) for i, j, _ in edges])


def heldout_risk(forest: Forest, train: GridFits, heldout: GridFits) -> float:
    """Held-out negative log-likelihood risk evaluated on the grid.

    Edge terms integrate the held-out bivariate estimate against the training
    log ratio; vertex terms are held-out/training cross-entropies.
    """
    if forest.d != train.d:
        raise GridMismatchError(f"forest has {forest.d} vertices, fits have {train.d}")
    edge = edge_cross_weights(train, heldout, forest.edges)
    return float(-edge.sum() - vertex_cross_entropy(train, heldout).sum())


@dataclass
class Selection:
    """Outcome of choosing ``k`` along the nested forests.

    ``curve[k]`` is the held-out log-likelihood of the ``k``-edge prefix (the
    negated grid risk in grid mode); ``k`` is its first maximizer.
    """

    k: int
    forest: Forest
    curve: np.ndarray
    mode: str


def _curve_from_increments(base: float, increments) -> np.ndarray:
    return base + np.concatenate([[0.0], np.cumsum(increments)])


def select_k(seq: ForestSequence, train: GridFits, heldout_data=None, mode: str = "sample",
             heldout: Optional[GridFits] = None, model: Optional[ForestDensityModel] = None) -> Selection:
    """Pick the prefix ``E^(k)`` that does best on the held-out split.

    One pass over the ``d-1`` edges suffices: every prefix differs from the
    previous one by a single edge, and each edge contributes an additive term.

    Parameters
    ----------
    seq : ForestSequence
        Nested Chow-Liu forests fitted on the training split.
    train : GridFits
        Grid estimates of the training split.
    heldout_data : ndarray, optional
        Held-out rows in unit-cube coordinates (required in sample mode, and
        in grid mode when ``heldout`` is not given).
    mode : {"sample", "grid"}
        ``sample`` averages log densities over held-out rows; ``grid`` uses
        the held-out grid risk.
    """
    if mode == "grid":
        if heldout is None:
            heldout = GridFits(heldout_data, train.grid, train.kernel, train.beta, train.floor)
        base = float(vertex_cross_entropy(train, heldout).sum())
        increments = edge_cross_weights(train, heldout, seq.edges)
    elif mode == "sample":
        if heldout_data is None:
            raise ValueError("sample mode needs held-out data")
        if model is None:
            model = fit_model(Forest(seq.d), train.data, kernel=train.kernel, beta=train.beta,
                              floor=train.floor, m=train.grid.m)
        base = float(model.vertex_terms(heldout_data).sum(axis=1).mean())
        increments = model.edge_terms(heldout_data, seq.edges).mean(axis=0) if len(seq) else np.empty(0)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    curve = _curve_from_increments(base, increments)
    k = int(np.argmax(curve))  # first maximizer, i.e. the sparsest tie
    return Selection(k, seq.prefix(k), curve, mode)
