"""Signed-area (defect) statistics of Gaussian Laplace eigenfunctions on the sphere."""

from .constants import c2_series, il_exact, report, variance_exact
from .moments import abs_moment5, even_moment_diagnostics, legendre_moment, scaled_moment_table
from .quad import bessel_moment, c1_direct, gauss_legendre_rule, integrate_theta
from .randfield import mc_variance, sample_coefficients, synthesize
from .specfun import (
    arcsin_coeff,
    assoc_legendre_normalized,
    bessel_j0,
    hilb_approx,
    legendre_batch,
    legendre_eval,
)
from .wigner import cg_squared_diag, threej_zero

__version__ = "0.1.0"
