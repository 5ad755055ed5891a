"""Moments of Legendre polynomials against sin(theta) d theta on [0, pi/2].

    M_j(l) = int_0^{pi/2} P_l(cos theta)^j sin theta d theta = int_0^1 P_l(t)^j dt

The integrand in t is a polynomial of degree j*l, so a Gauss-Legendre rule
with enough nodes gives the moment exactly up to roundoff.  For odd j >= 3
l^2 M_j(l) tends to the Bessel moment c_j.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .quad import HALF_PI, adaptive_integrate, bessel_moment, gauss_legendre_rule
from .specfun import bessel_j0, legendre_cos, legendre_eval
from .wigner import cg_squared_diag

__all__ = [
    "MomentRecord",
    "legendre_moment",
    "scaled_moment_table",
    "abs_moment5",
    "RemarkDiagnostics",
    "even_moment_diagnostics",
    "hilb_moment",
    "legendre_zeros_theta",
    "MAX_EXACT_DEGREE",
    "cg_identity_check",
]

# beyond this polynomial degree the exact rule would need > 1e5 nodes
MAX_EXACT_DEGREE = 200_000

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class MomentRecord:
    l: int
    j: int
    value: float
    scaled: float
    limit: float | None = None
    error: float = 0.0


def _exact_moment(l, j):
    n = (j * l + 2) // 2 + 1
    rule = gauss_legendre_rule(n)
    t = 0.5 * (rule.nodes + 1.0)
    f = legendre_eval(l, t) ** j
    terms = 0.5 * rule.weights * f
    value = float(np.sum(terms))
    # roundoff: each P_l carries ~l ulps, raised to the j-th power
    error = float(_EPS * (j * (l + 1) + n) * np.sum(np.abs(terms)))
    return value, error


def legendre_moment(l, j):
    """M_j(l) with its l^2-scaled value.

    Exact Gauss-Legendre in t = cos(theta) with ceil((j*l + 2)/2) or more
    nodes.  Above `MAX_EXACT_DEGREE` it falls back to adaptive panels in
    theta, and ``error`` then carries the quadrature error estimate.
    """
    if l < 0 or j < 1:
        raise ValueError("need l >= 0 and j >= 1")
    if l == 0:
        return MomentRecord(0, j, 1.0, 0.0)
    if j * l <= MAX_EXACT_DEGREE:
        value, error = _exact_moment(l, j)
    else:
        edges = np.linspace(0.0, HALF_PI, 2 * l + 1)
        value, error = adaptive_integrate(
            lambda th: legendre_cos(l, th) ** j * np.sin(th), edges, tol=1e-14, order=24
        )
    return MomentRecord(l, j, value, l * l * value, None, error)


def _map_ordered(func, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


def scaled_moment_table(j, l_list, workers=None):
    """MomentRecords for each even l, with ``limit`` set to c_j."""
    if j < 3 or j % 2 == 0:
        raise ValueError("j must be odd and >= 3")
    l_list = list(l_list)
    if any(l % 2 for l in l_list):
        raise ValueError("scaled moment tables are defined for even l")
    limit = bessel_moment(j).value
    records = _map_ordered(lambda l: legendre_moment(l, j), l_list, workers)
    return [
        MomentRecord(r.l, r.j, r.value, r.scaled, limit, r.error) for r in records
    ]


def legendre_zeros_theta(l):
    """Zeros of P_l(cos theta) in (0, pi/2], increasing."""
    if l < 1:
        return np.empty(0)
    nodes = gauss_legendre_rule(l).nodes
    return np.sort(np.arccos(nodes[nodes >= 0.0]))


def abs_moment5(l, tol=1e-13):
    """int_0^{pi/2} |P_l(cos theta)|^5 sin theta d theta.

    The integrand has kinks at the zeros of P_l, so the range is cut at
    those zeros and each piece is integrated adaptively.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    edges = np.unique(np.concatenate([[0.0], legendre_zeros_theta(l), [HALF_PI]]))
    value, _ = adaptive_integrate(
        lambda th: np.abs(legendre_cos(l, th)) ** 5 * np.sin(th), edges, tol=tol
    )
    return value


@dataclass(frozen=True)
class RemarkDiagnostics:
    l: int
    third_moment: float  # E{sqrt(2l+1) P_l(t)}^3, t ~ U[0, 1]
    fourth_moment: float
    m3_scaled: float  # third moment * sqrt(l): bounded
    m4_scaled: float  # fourth moment / log(l): tends to a positive constant


def even_moment_diagnostics(l):
    if l < 2 or l % 2:
        raise ValueError("l must be even and >= 2")
    third = (2 * l + 1) ** 1.5 * legendre_moment(l, 3).value
    fourth = (2 * l + 1) ** 2 * legendre_moment(l, 4).value
    return RemarkDiagnostics(l, third, fourth, third * math.sqrt(l), fourth / math.log(l))


def hilb_moment(l, j, tol=1e-13):
    """Main term of M_j(l) after Hilb substitution:

    int_0^{pi/2} (theta/sin theta)^{j/2-1} J0((l+1/2) theta)^j theta d theta
    """
    big_l = l + 0.5

    def f(th):
        ratio = np.where(th > 0, th / np.sin(np.where(th > 0, th, 1.0)), 1.0)
        return ratio ** (0.5 * j - 1.0) * bessel_j0(big_l * th) ** j * th

    edges = np.linspace(0.0, HALF_PI, 2 * l + 1)
    value, _ = adaptive_integrate(f, edges, tol=tol)
    return value


def cg_identity_check(l_max=40):
    """Rows (l, int_0^1 P_l^3, CG^2/(2l+1), |difference|) for even l <= l_max."""
    rows = []
    for l in range(0, l_max + 1, 2):
        moment = legendre_moment(l, 3).value
        cg = cg_squared_diag(l) / (2 * l + 1)
        rows.append((l, moment, cg, abs(moment - cg)))
    return rows
