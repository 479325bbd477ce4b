"""Numerical toolkit for boundary-layer semigroups on the half line:
weighted norms, Orr-Sommerfeld resolvents and Green functions, contour
semigroup evaluation, and the unstable approximate-solution cascade."""

__version__ = "0.1.0"

from .grid import GridFunction, HalfLineGrid, differentiate, integrate, make_grid
from .norms import BLNormParams, ModeWeights, norm_1d, norm_2d, phi_weight, sobolev_bl_norm
from .profiles import ShearProfile, eval_profile, heat_evolve, jet_profile, tanh_profile
from .elliptic import green_kernel_1d, solve_1d, velocity_from_vorticity
from .orr_sommerfeld import (EigenResult, OSOperator, SpectralPoint, evans,
                             os_solve, os_spectrum, rayleigh_spectrum, scales)
from .contours import ContourPath, build_contour
from .semigroup import (SemigroupConfig, apply_semigroup_contour,
                        apply_semigroup_oracle, duhamel_derivative, split_sa_ra)
from .instability import CascadeParams, build_cascade, growing_mode
