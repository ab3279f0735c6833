"""feynkac: BDF convolution-quadrature / P1-FEM solver and benchmark suite
for the backward fractional Feynman-Kac equation (separated form), with
all-step starting corrections for nonsmooth data, independent numerical
oracles, and the convergence-table harness."""

from .bdf import (BdfSymbol, CorrectionCoeffs, CqWeightTable, bdf_symbol,
                  correction_coeffs, cq_weights, grunwald_weights)
from .ddreal import CDD, DD, EXTENDED, STD64
from .dft import balanced_radius, circle_samples, dft_coefficients
from .fem import (FemFunction, FemOperators, QuadCache, assemble_operators,
                  interpolant, l2_difference, l2_project, load_vector, norms,
                  transfer, weighted_load, weighted_mass_apply)
from .mesh import Mesh1D, SpatialFn
from .problem import ProblemSpec, SourceTerm
from .quadrature import GaussRule, gauss_rule
from .scheme import (Trajectory, run_comparison_initial, run_comparison_source,
                     run_corrected, run_scheme, run_uncorrected)
from .tridiag import TriDiagonalSystem, tridiag_solve

__version__ = "0.1.0"

__all__ = [
    "BdfSymbol", "CorrectionCoeffs", "CqWeightTable", "bdf_symbol",
    "correction_coeffs", "cq_weights", "grunwald_weights",
    "CDD", "DD", "EXTENDED", "STD64",
    "balanced_radius", "circle_samples", "dft_coefficients",
    "FemFunction", "FemOperators", "QuadCache", "assemble_operators",
    "interpolant", "l2_difference", "l2_project", "load_vector", "norms",
    "transfer", "weighted_load", "weighted_mass_apply",
    "Mesh1D", "SpatialFn", "ProblemSpec", "SourceTerm",
    "GaussRule", "gauss_rule",
    "Trajectory", "run_comparison_initial", "run_comparison_source",
    "run_corrected", "run_scheme", "run_uncorrected",
    "TriDiagonalSystem", "tridiag_solve",
    "__version__",
]
