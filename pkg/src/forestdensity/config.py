from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

from .kde import DEFAULT_FLOOR

ESTIMATORS = ("fast", "medium", "slow")


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every fitting step.

    Defaults follow the experimental setup: a 128-point grid per dimension,
    smoothness ``beta = 2``, Epanechnikov kernel, equal-size data splits and
    the "medium" mutual information estimator.
    """

    m: int = 128
    beta: float = 2.0
    kernel: str = "epanechnikov"
    floor: float = DEFAULT_FLOOR
    split: float = 0.5
    estimator: str = "medium"
    seed: int = 0
    mode: str = "sample"
    n_jobs: int = 1

    def __post_init__(self):
        from .kde import KERNELS

        if not 0.0 < self.split < 1.0:
            raise ValueError(f"split must lie in (0, 1), got {self.split}")
        if self.m < 8:
            raise ValueError(f"m must be >= 8, got {self.m}")
        if not self.floor > 0:
            raise ValueError(f"floor must be positive, got {self.floor}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}; choose from {sorted(KERNELS)}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}; choose from {ESTIMATORS}")
        if self.mode not in ("sample", "grid"):
            raise ValueError(f"mode must be 'sample' or 'grid', got {self.mode!r}")
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be >= 1")

    def to_dict(self):
        return asdict(self)

    def digest(self) -> str:
        """Short stable hash of the settings that affect numerical output."""
        payload = {k: v for k, v in self.to_dict().items() if k != "n_jobs"}
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
