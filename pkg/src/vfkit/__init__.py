"""Rational approximation of frequency-response data by Vector Fitting."""

from .errors import InputError, NumericalError, VfkitError
from .fitting import FitConfig, FitResult, FitStatus, Solver, Variant, fit, identify_residues
from .metrics import hinf_estimate, relative_h2_error, sobolev_error
from .model import BarycentricState, PoleResidueModel, SampleSet
from .quadrature import QuadGrid, bcc_grid, h2_norm_sq_estimate
from .systems import StateSpaceModel, random_stable_siso, sample_system

__all__ = [
    "BarycentricState",
    "FitConfig",
    "FitResult",
    "FitStatus",
    "InputError",
    "NumericalError",
    "PoleResidueModel",
    "QuadGrid",
    "SampleSet",
    "Solver",
    "StateSpaceModel",
    "Variant",
    "VfkitError",
    "bcc_grid",
    "fit",
    "h2_norm_sq_estimate",
    "hinf_estimate",
    "identify_residues",
    "random_stable_siso",
    "relative_h2_error",
    "sample_system",
    "sobolev_error",
]
