"""Forest-structured nonparametric density estimation."""

__version__ = "0.1.0"

from .config import RunConfig
from .density import (ForestDensityModel, GaussianModel, fit_gaussian, fit_model, heldout_loglik_fde,
                      heldout_loglik_gauss)
from .errors import DataError, DegenerateColumnError, GridMismatchError, NumericError
from .forest import Forest, ForestSequence, build_heldout_forest, chow_liu
from .kde import (AffineMap, BivariateKDE, Grid, GridFits, KernelSpec, UnivariateKDE, bandwidth_bivariate,
                  bandwidth_univariate, eval_kde_at_point, fit_bivariate, fit_univariate,
                  marginalize_bivariate, rescale_to_unit_cube)
from .mutual_info import MIMatrix, cross_mi, mi_fast, mi_matrix, mi_medium, mi_slow
from .pipeline import fit_forest, fit_restricted, split_data
from .restricted import Partition, approx_krf, greedy_degree_bounded, restricted_fde, tree_partition
from .selection import Selection, heldout_risk, select_k
from .synth import SynthSpec, cdf_transform, generate

__all__ = [name for name in dir() if not name.startswith("_")]
