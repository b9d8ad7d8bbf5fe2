"""Real-analytic solutions of ``div u = f`` with zero boundary values on
planar analytic star-shaped domains, with numerical audits of the
derivative-reduction inequalities behind their analyticity."""

__version__ = "0.1.0"

from .domain import AnalyticDomain, QuadratureSet, l2_norm, make_domain
from .fields import TangentFieldFamily, apply_word, build_family, commutator_with_gradient, commutator_with_laplacian
from .jet import Jet, compose_series, jet_add, jet_diff, jet_mul, kernel_jet
from .norms import DerivativeTable, NormWeights, build_table, certify_radius, psi_norm, rho_norm
from .pipeline import full_report, nonuniqueness_witness, solve_divergence
from .poisson import mfs_harmonic_fit, poly_particular, solve_poisson
from .polynomial import Poly
from .stokes import solve_stokes_bvp

__all__ = [
    "AnalyticDomain", "QuadratureSet", "l2_norm", "make_domain",
    "TangentFieldFamily", "apply_word", "build_family", "commutator_with_gradient", "commutator_with_laplacian",
    "Jet", "compose_series", "jet_add", "jet_diff", "jet_mul", "kernel_jet",
    "DerivativeTable", "NormWeights", "build_table", "certify_radius", "psi_norm", "rho_norm",
    "full_report", "nonuniqueness_witness", "solve_divergence",
    "mfs_harmonic_fit", "poly_particular", "solve_poisson",
    "Poly", "solve_stokes_bvp",
]
