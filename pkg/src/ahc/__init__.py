"""Effective surface tension of Allen-Cahn type energies in stationary random media."""

from ._accel import backend
from .glue import Box, fundamental_glue
from .grid import Configuration, CylinderDomain, build_cylinder, cube_domain, energy, planar_data
from .homogenize import (MediumSpec, Problem, SweepResult, h_sweep, off_center_check, r_sweep,
                         recovery_energy, rotated_frame_check, subadditive_extrapolate, wulff_scan)
from .medium import FinslerMedium, MediumKind, eval_metric, make_medium, shift
from .perimeter import SurfaceTensionTable, perimeter
from .potential import DoubleWell, TransitionProfile, c_lambda, c_w, eval_w, sigma_1d, tail_e
from .solve import SolverOptions, SurfaceTensionSample, centered_sigma, finite_volume_sigma, minimize

__version__ = "0.1.0"
