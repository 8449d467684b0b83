"""Forest-structured density models and Gaussian baselines.

The forest density is

    log p(x) = sum_{(i,j) in E} [log p(x_i, x_j) - log p(x_i) - log p(x_j)]
               + sum_k log p(x_k)

with every factor a kernel estimate on the training split, evaluated exactly
at the query coordinates.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .errors import DataError, NumericError
from .forest import Forest
from .kde import (DEFAULT_FLOOR, AffineMap, KernelSpec, as_kernel, bandwidth_bivariate, bandwidth_univariate,
                  eval_bivariate, eval_univariate)

MODEL_VERSION = 1


def data_hash(data) -> str:
    arr = np.ascontiguousarray(np.asarray(data, dtype="<f8"))
    h = hashlib.sha256()
    h.update(str(arr.shape).encode())
    h.update(arr.tobytes())
    return h.hexdigest()


@dataclass
class ForestDensityModel:
    """A forest plus kernel estimates fitted on the training split.

    ``train`` holds the training data in unit-cube coordinates.  ``h1`` are the
    univariate bandwidths per vertex and ``h2`` the per-coordinate bandwidths
    used by every bivariate factor touching that vertex.
    """

    forest: Forest
    train: np.ndarray
    kernel: KernelSpec
    h1: np.ndarray
    h2: np.ndarray
    floor: float = DEFAULT_FLOOR
    m: int = 128
    beta: float = 2.0
    rescale: Optional[AffineMap] = None
    train_hash: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.train.shape[1]

    def _check(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise DataError(f"expected {self.d} columns, got {X.shape[1]}")
        if np.any(X < 0) or np.any(X > 1) or not np.all(np.isfinite(X)):
            raise DataError("evaluation points must lie in the unit cube")
        return X

    def vertex_terms(self, X) -> np.ndarray:
        """``(n, d)`` array of univariate log densities."""
        X = self._check(X)
        out = np.empty(X.shape)
        for k in range(self.d):
            out[:, k] = np.log(eval_univariate(self.train[:, k], self.h1[k], self.kernel, X[:, k], self.floor))
        return out

    def edge_terms(self, X, edges=None) -> np.ndarray:
        """``(n, |E|)`` array of per-edge log ratios ``log p(xi,xj) / (p(xi) p(xj))``."""
        X = self._check(X)
        edges = self.forest.edges if edges is None else edges
        out = np.empty((X.shape[0], len(edges)))
        uni = {}
        for c, (i, j, _) in enumerate(edges):
            for k in (i, j):
                if k not in uni:
                    uni[k] = np.log(eval_univariate(self.train[:, k], self.h1[k], self.kernel, X[:, k], self.floor))
            biv = eval_bivariate(self.train[:, i], self.train[:, j], self.h2[i], self.h2[j],
                                 self.kernel, X[:, i], X[:, j], self.floor)
            out[:, c] = np.log(biv) - uni[i] - uni[j]
        return out

    def log_density_many(self, X) -> np.ndarray:
        X = self._check(X)
        return self.vertex_terms(X).sum(axis=1) + self.edge_terms(X).sum(axis=1)

    def log_density(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise DataError("log_density takes a single point; use log_density_many")
        return float(self.log_density_many(x[None, :])[0])

    # -- persistence ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": MODEL_VERSION,
            "d": self.d,
            "m": self.m,
            "beta": self.beta,
            "kernel": self.kernel.family,
            "floor": self.floor,
            "rescale": None if self.rescale is None else self.rescale.to_dict(),
            "forest": [[i, j, w] for i, j, w in self.forest.edges],
            "bandwidths": {
                "vertex": self.h1.tolist(),
                "edge": [[self.h2[i], self.h2[j]] for i, j, _ in self.forest.edges],
                "bivariate_per_vertex": self.h2.tolist(),
            },
            "train_hash": self.train_hash,
            "n_train": int(self.train.shape[0]),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, payload: dict, train_raw) -> "ForestDensityModel":
        """Rebuild a model; ``train_raw`` is the training data in original units."""
        if payload.get("version") != MODEL_VERSION:
            raise DataError(f"unsupported model version {payload.get('version')!r}")
        train_raw = np.asarray(train_raw, dtype=float)
        digest = data_hash(train_raw)
        if payload["train_hash"] and digest != payload["train_hash"]:
            raise DataError("training data does not match the hash recorded in the model")
        rescale = None if payload["rescale"] is None else AffineMap.from_dict(payload["rescale"])
        train = train_raw if rescale is None else np.clip(rescale.apply(train_raw), 0.0, 1.0)
        d = int(payload["d"])
        forest = Forest(d, [tuple(e) for e in payload["forest"]])
        return cls(forest=forest, train=train, kernel=KernelSpec(payload["kernel"]),
                   h1=np.asarray(payload["bandwidths"]["vertex"], dtype=float),
                   h2=np.asarray(payload["bandwidths"]["bivariate_per_vertex"], dtype=float),
                   floor=float(payload["floor"]), m=int(payload["m"]), beta=float(payload["beta"]),
                   rescale=rescale, train_hash=payload["train_hash"], meta=payload.get("meta", {}))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path, train_raw) -> "ForestDensityModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), train_raw)


def fit_model(forest: Forest, train, config=None, *, kernel="epanechnikov", beta=2.0,
              floor=DEFAULT_FLOOR, m=128, rescale: Optional[AffineMap] = None,
              train_raw=None) -> ForestDensityModel:
    """Fit plug-in bandwidths on the training split and bind them to ``forest``.

    ``train`` must already be in unit-cube coordinates.  When ``config`` is
    given its kernel, beta, floor and grid size override the keywords.
    """
    if config is not None:
        kernel, beta, floor, m = config.kernel, config.beta, config.floor, config.m
    train = np.asarray(train, dtype=float)
    if train.ndim != 2 or train.shape[1] != forest.d:
        raise DataError(f"forest has {forest.d} vertices but data has shape {train.shape}")
    d = train.shape[1]
    h1 = np.array([bandwidth_univariate(train[:, k], beta, dim=k) for k in range(d)])
    h2 = np.array([bandwidth_bivariate(train[:, k], beta, dim=k) for k in range(d)])
    digest = data_hash(train if train_raw is None else train_raw)
    return ForestDensityModel(forest, train, as_kernel(kernel), h1, h2, floor, m, beta, rescale, digest)


def heldout_loglik_fde(model: ForestDensityModel, heldout) -> float:
    """Mean forest log density over the held-out rows."""
    return float(np.mean(model.log_density_many(heldout)))


# ---------------------------------------------------------------------------
# Gaussian baseline
# ---------------------------------------------------------------------------


@dataclass
class GaussianModel:
    mean: np.ndarray
    precision: np.ndarray
    chol: np.ndarray  # lower Cholesky factor of the precision
    logdet_precision: float

    @property
    def d(self) -> int:
        return self.mean.size

    def log_density_many(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise DataError(f"expected {self.d} columns, got {X.shape[1]}")
        # (x - mu)' Omega (x - mu) = |L' (x - mu)|^2 with Omega = L L'
        z = (X - self.mean) @ self.chol
        quad = np.einsum("ij,ij->i", z, z)
        return -0.5 * quad + 0.5 * self.logdet_precision - 0.5 * self.d * np.log(2 * np.pi)


def fit_gaussian(train) -> GaussianModel:
    """Sample mean and inverse sample covariance (via Cholesky solves)."""
    train = np.atleast_2d(np.asarray(train, dtype=float))
    n, d = train.shape
    if n <= d:
        raise NumericError(f"need more samples than dimensions for a full Gaussian fit (n={n}, d={d}); "
                           "reduce the dimension or regularize the covariance")
    mean = train.mean(axis=0)
    cov = np.atleast_2d(np.cov(train, rowvar=False))
    try:
        c_factor = linalg.cho_factor(cov, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericError("sample covariance is singular; reduce the dimension or regularize") from exc
    precision = linalg.cho_solve(c_factor, np.eye(d))
    precision = 0.5 * (precision + precision.T)
    try:
        chol = linalg.cholesky(precision, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericError("precision matrix is not positive definite") from exc
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return GaussianModel(mean, precision, chol, logdet)


def heldout_loglik_gauss(model: GaussianModel, heldout) -> float:
    return float(np.mean(model.log_density_many(heldout)))
