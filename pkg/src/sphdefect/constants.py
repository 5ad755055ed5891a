"""Defect variance at finite l and the asymptotic constant.

For even l the defect variance is 32 pi I_l with

    I_l = int_0^{pi/2} arcsin(P_l(cos theta)) sin theta d theta,

and l^2 I_l -> C1 = int_0^inf psi (arcsin J0 - J0) dpsi, so that
Var(D_l) ~ C / l^2 with C = 32 pi C1.  C1 is computed directly
(`quad.c1_direct`) and, independently, as the series sum_k a_k c_{2k+1} of
arcsine coefficients times Bessel moments.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .quad import HALF_PI, adaptive_integrate, bessel_moment, c1_direct
from .specfun import arcsin_coeffs, legendre_cos

__all__ = [
    "il_exact",
    "variance_exact",
    "SeriesEstimate",
    "c2_series",
    "ConstantReport",
    "InvariantError",
    "report",
    "convergence_table",
    "LOWER_BOUND",
    "PER_AREA_LOWER_BOUND",
    "BGS_REFERENCE",
]

LOWER_BOUND = 32.0 / math.sqrt(27.0)
PER_AREA_LOWER_BOUND = 2.0 / (math.pi**2 * math.sqrt(27.0))
# signed-area variance per unit area measured for planar monochromatic waves;
# shown for comparison only
BGS_REFERENCE = 0.0386

# the series tail beyond m is estimated with c_{2k+1} ~ 2/(2k+1) up to this k
_SERIES_TAIL_TERMS = 1_000_000


class InvariantError(RuntimeError):
    pass


def _il_edges(l):
    # 8 panels per period pi/l of P_l(cos theta), first panel split
    # geometrically towards theta = 0
    n_panels = max(8, 4 * l)
    edges = np.linspace(0.0, HALF_PI, n_panels + 1)
    h = edges[1]
    head = h * 0.5 ** np.arange(1, 11)[::-1]
    return np.concatenate([[0.0], head, edges[1:]])


def il_exact(l, return_error=False):
    """I_l for even l >= 2 by adaptive 12-point Gauss panels."""
    if l < 2 or l % 2:
        raise ValueError("I_l is defined here for even l >= 2")

    def f(th):
        return np.arcsin(np.clip(legendre_cos(l, th), -1.0, 1.0)) * np.sin(th)

    value, err = adaptive_integrate(f, _il_edges(l), tol=1e-14, order=12)
    return (value, err) if return_error else value


def variance_exact(l, return_error=False):
    """Var(D_l) = 32 pi I_l for even l."""
    value, err = il_exact(l, return_error=True)
    scale = 32.0 * math.pi
    return (scale * value, scale * err) if return_error else scale * value


@dataclass(frozen=True)
class SeriesEstimate:
    value: float  # partial sum over k = 1..m
    terms: int
    quadrature_error: float  # summed error estimates of the c_{2k+1}
    tail_estimate: float  # sum_{k > m} a_k * 2/(2k+1), of order m^(-3/2)


def c2_series(m):
    """Partial sum sum_{k=1}^m a_k c_{2k+1}."""
    if m < 1:
        raise ValueError("m must be >= 1")
    a = arcsin_coeffs(m)
    moments = [bessel_moment(2 * k + 1) for k in range(1, m + 1)]
    c = np.array([r.value for r in moments])
    err = float(np.dot(a, [r.error_estimate for r in moments]))
    k = np.arange(m + 1, _SERIES_TAIL_TERMS + 1, dtype=float)
    tail = float(np.dot(arcsin_coeffs(_SERIES_TAIL_TERMS)[m:], 2.0 / (2.0 * k + 1.0)))
    return SeriesEstimate(float(np.dot(a, c)), m, err, tail)


@dataclass(frozen=True)
class ConstantReport:
    c1_direct: float
    c1_direct_error: float
    c1_series: float
    c1_series_error: float
    partial_terms: int
    C: float
    C_error: float
    C_per_area: float
    lower_bound: float = LOWER_BOUND
    per_area_lower_bound: float = PER_AREA_LOWER_BOUND
    bgs_reference: float = BGS_REFERENCE
    checks: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.checks.values())

    def to_dict(self):
        return asdict(self)


def report(m=200, strict=False):
    """Assemble C1 by both routes, C = 32 pi C1 and the bound checks.

    With ``strict=True`` a failed check raises `InvariantError`.
    """
    direct = c1_direct()
    series = c2_series(m)
    series_err = series.quadrature_error + series.tail_estimate
    scale = 32.0 * math.pi
    big_c = scale * direct.value
    per_area = big_c / (16.0 * math.pi**2)
    checks = {
        "C_above_lower_bound": big_c > LOWER_BOUND,
        "C_per_area_above_bound": per_area > PER_AREA_LOWER_BOUND,
        "routes_agree": abs(direct.value - series.value)
        <= direct.error_estimate + series_err + 1e-9,
        "series_below_direct": series.value < direct.value + direct.error_estimate,
    }
    rep = ConstantReport(
        c1_direct=direct.value,
        c1_direct_error=direct.error_estimate,
        c1_series=series.value,
        c1_series_error=series_err,
        partial_terms=m,
        C=big_c,
        C_error=scale * direct.error_estimate,
        C_per_area=per_area,
        checks=checks,
    )
    if strict and not rep.ok:
        failed = [k for k, v in checks.items() if not v]
        raise InvariantError(f"constant checks failed: {failed}")
    return rep


def convergence_table(l_list=(50, 100, 200, 400), c1=None):
    """Rows (l, Var(D_l), error, l^2 Var(D_l), |l^2 Var - C|) for the given even l."""
    if c1 is None:
        c1 = c1_direct().value
    big_c = 32.0 * math.pi * c1
    rows = []
    for l in l_list:
        var, err = variance_exact(l, return_error=True)
        rows.append((l, var, err, l * l * var, abs(l * l * var - big_c)))
    return rows
