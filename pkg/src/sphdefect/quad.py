"""Quadrature engines.

* Gauss-Legendre rules by Newton iteration on P_n.
* Composite / adaptive panel integration for smooth integrands.
* The zero-partition integrator for the Bessel moments
  c_j = int_0^inf psi J0(psi)^j dpsi and for the constant
  C1 = int_0^inf psi (arcsin J0(psi) - J0(psi)) dpsi: the integrand is
  integrated between consecutive zeros of J0 and the partial sums, which
  alternate in sign, are accelerated with iterated Aitken extrapolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .specfun import bessel_j0

__all__ = [
    "ConvergenceError",
    "QuadratureRule",
    "gauss_legendre_rule",
    "panel_nodes",
    "integrate_theta",
    "adaptive_integrate",
    "bessel_j0_zeros",
    "aitken_limit",
    "BesselMomentResult",
    "bessel_moment",
    "OscillatoryEstimate",
    "c1_direct",
    "j0_tail_bound",
]

HALF_PI = 0.5 * math.pi

# target accuracy for conditionally / absolutely convergent Bessel integrals
CONDITIONAL_TOL = 1e-6
ABSOLUTE_TOL = 1e-8

# zero-interval partition of [0, inf): Gauss order per panel and panels per interval
_PARTITION_ORDER = 24
_HEAD_PANELS = 16
_INTERVAL_PANELS = 2
MAX_INTERVALS = 200


class ConvergenceError(RuntimeError):
    """A quadrature or extrapolation failed to reach its tolerance."""


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on [-1, 1]."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f, a=-1.0, b=1.0):
        half = 0.5 * (b - a)
        x = half * self.nodes + 0.5 * (a + b)
        return half * float(np.dot(self.weights, f(x)))


def _legendre_and_derivative(n, x):
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@lru_cache(maxsize=128)
def gauss_legendre_rule(n):
    """n-point Gauss-Legendre rule, exact for polynomials of degree <= 2n-1.

    Nodes are the roots of P_n found by Newton's method from the Tricomi
    initial guesses; only the positive half is iterated and then mirrored,
    so the rule is exactly symmetric.  The returned arrays are read-only.
    """
    if not 1 <= n <= 100_000:
        raise ValueError("rule size must be in [1, 1e5]")
    half = n // 2
    i = np.arange(1, half + 1, dtype=float)
    x = np.cos(math.pi * (i - 0.25) / (n + 0.5)) * (1.0 - (n - 1.0) / (8.0 * n**3))
    for _ in range(100):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx), initial=0.0) < 1e-15:
            break
    else:
        raise ConvergenceError(f"Newton iteration for the {n}-point rule did not converge")
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    # x is decreasing from just below 1
    mid_x, mid_w = np.empty(0), np.empty(0)
    if n % 2:
        mid_x = np.zeros(1)
        _, dp0 = _legendre_and_derivative(n, mid_x)
        mid_w = 2.0 / dp0**2
    nodes = np.concatenate([-x, mid_x, x[::-1]])
    weights = np.concatenate([w, mid_w, w[::-1]])
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(n, nodes, weights)


def panel_nodes(edges, order):
    """Composite Gauss nodes/weights over the panels delimited by ``edges``.

    Returns arrays of shape ``(len(edges) - 1, order)``.
    """
    rule = gauss_legendre_rule(order)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return half * rule.nodes + 0.5 * (a + b), half * rule.weights


def integrate_theta(f, panels=64, nodes_per_panel=16):
    """Composite Gauss value of int_0^{pi/2} f(theta) sin(theta) dtheta.

    ``f`` must accept an array of angles.
    """
    x, w = panel_nodes(np.linspace(0.0, HALF_PI, panels + 1), nodes_per_panel)
    x, w = x.ravel(), w.ravel()
    return float(np.dot(w, f(x) * np.sin(x)))


def adaptive_integrate(f, edges, tol=1e-12, order=16, max_depth=40):
    """Adaptive composite Gauss quadrature of a vectorized ``f``.

    Every panel is integrated with ``order`` and ``2 * order`` points; panels
    whose two values differ by more than their share of ``tol`` are bisected.
    Returns ``(value, error_estimate)`` where the estimate is the summed
    disagreement of the accepted panels.  Raises `ConvergenceError` if a panel
    still fails after ``max_depth`` bisections.
    """
    lo_rule = gauss_legendre_rule(order)
    hi_rule = gauss_legendre_rule(2 * order)
    edges = np.asarray(edges, dtype=float)
    span = edges[-1] - edges[0]
    a, b = edges[:-1], edges[1:]
    total = 0.0
    error = 0.0
    for _ in range(max_depth + 1):
        half = 0.5 * (b - a)[:, None]
        mid = 0.5 * (a + b)[:, None]
        lo = np.sum(half * lo_rule.weights * f(half * lo_rule.nodes + mid), axis=1)
        hi = np.sum(half * hi_rule.weights * f(half * hi_rule.nodes + mid), axis=1)
        diff = np.abs(hi - lo)
        ok = diff <= tol * (b - a) / span
        total += float(np.sum(hi[ok]))
        error += float(np.sum(diff[ok]))
        if ok.all():
            return total, error
        a, b = a[~ok], b[~ok]
        m = 0.5 * (a + b)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
    raise ConvergenceError(f"adaptive quadrature: {a.size} panels unresolved")


@lru_cache(maxsize=8)
def bessel_j0_zeros(n):
    """First ``n`` positive zeros of J0 by bisection.

    Each zero is bracketed around McMahon's estimate (k - 1/4) pi; the
    spacing of consecutive zeros is close to pi, so a bracket of +-0.4 holds
    exactly one sign change.
    """
    k = np.arange(1, n + 1, dtype=float)
    beta = (k - 0.25) * math.pi
    guess = beta + 1.0 / (8.0 * beta)
    lo, hi = guess - 0.4, guess + 0.4
    f_lo = bessel_j0(lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f_mid = bessel_j0(mid)
        same = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(same, mid, lo)
        f_lo = np.where(same, f_mid, f_lo)
        hi = np.where(same, hi, mid)
    zeros = 0.5 * (lo + hi)
    zeros.flags.writeable = False
    return zeros


def aitken_limit(partial_sums):
    """Iterated Aitken extrapolation of a sequence of partial sums.

    Returns ``(limit, error_estimate)``.  Iteration stops once second
    differences vanish to roundoff; the error estimate is the change in the
    last element between the final two Aitken columns.
    """
    s = np.asarray(partial_sums, dtype=float)
    if s.size < 2:
        raise ValueError("need at least two partial sums")
    scale = max(float(np.max(np.abs(s))), 1e-300)
    prev_last, last = s[-2], s[-1]
    while s.size >= 3:
        d1 = s[2:] - s[1:-1]
        d2 = s[2:] - 2.0 * s[1:-1] + s[:-2]
        if np.any(np.abs(d2) <= 64 * np.finfo(float).eps * scale):
            break
        s = s[2:] - d1 * d1 / d2
        prev_last, last = last, s[-1]
    error = abs(last - prev_last)
    return float(last), max(float(error), 4 * np.finfo(float).eps * abs(last))


@dataclass(frozen=True)
class _ZeroPartition:
    edges: np.ndarray  # 0, z_1, ..., z_n
    psi: np.ndarray  # (n, panels * order) nodes per interval
    weights: np.ndarray
    j0: np.ndarray  # J0 at the nodes


@lru_cache(maxsize=2)
def _zero_partition(n_intervals):
    edges = np.concatenate([[0.0], bessel_j0_zeros(n_intervals)])
    rows_x, rows_w = [], []
    for i in range(n_intervals):
        panels = _HEAD_PANELS if i == 0 else _INTERVAL_PANELS
        sub = np.linspace(edges[i], edges[i + 1], panels + 1)
        x, w = panel_nodes(sub, _PARTITION_ORDER)
        rows_x.append(x.ravel())
        rows_w.append(w.ravel())
    width = max(r.size for r in rows_x)
    psi = np.zeros((n_intervals, width))
    weights = np.zeros((n_intervals, width))
    for i, (x, w) in enumerate(zip(rows_x, rows_w)):
        # head row is padded with zero-weight nodes at psi = 0
        psi[i, : x.size] = x
        weights[i, : w.size] = w
    j0 = np.clip(bessel_j0(psi), -1.0, 1.0)
    for arr in (edges, psi, weights, j0):
        arr.flags.writeable = False
    return _ZeroPartition(edges, psi, weights, j0)


def _interval_integrals(g, n_intervals=MAX_INTERVALS):
    """Integrals of g(psi, J0(psi)) over [0, z_1], [z_1, z_2], ..."""
    part = _zero_partition(n_intervals)
    return np.sum(part.weights * g(part.psi, part.j0), axis=1)


def _accelerate_tail(terms, start, window, tol):
    """Extrapolate sum(terms) from partial sums starting after ``start`` terms.

    With ``window=None`` the window grows until two consecutive estimates
    agree to ``tol``; raises `ConvergenceError` if the available intervals
    run out first.  Returns ``(value, error, intervals_used)``.
    """
    sums = np.cumsum(terms)
    if window is not None:
        if start + window > sums.size:
            raise ValueError("window exceeds the available zero intervals")
        value, err = aitken_limit(sums[start : start + window])
        return value, err, start + window
    prev = None
    for width in range(12, sums.size - start + 1, 4):
        value, err = aitken_limit(sums[start : start + width])
        if prev is not None:
            change = abs(value - prev)
            if change <= tol and err <= tol:
                return value, max(change, err), start + width
        prev = value
    raise ConvergenceError(
        f"zero-interval acceleration did not stabilize within {sums.size} intervals"
    )


def j0_tail_bound(j, x):
    """Bound on int_x^inf psi |J0(psi)|^j dpsi from |J0(psi)| <= sqrt(2/(pi psi)), j >= 5."""
    return (2.0 / math.pi) ** (0.5 * j) * x ** (2.0 - 0.5 * j) / (0.5 * j - 2.0)


@dataclass(frozen=True)
class BesselMomentResult:
    j: int
    value: float
    mode: str  # "conditional" (j = 3) or "absolute" (j >= 5)
    error_estimate: float
    partitions: int


def bessel_moment(j, start=10, window=None):
    """c_j = int_0^inf psi J0(psi)^j dpsi for odd j = 3 or j >= 5.

    For large j the direct sum over `MAX_INTERVALS` zero intervals is used
    when the decay bound certifies the remainder below `ABSOLUTE_TOL`; for
    j = 3, 5, 7, ... where it cannot, the alternating interval contributions
    are extrapolated, with the acceleration starting after ``start``
    intervals.
    """
    if j % 2 == 0 or j < 3:
        raise ValueError("bessel_moment needs odd j >= 3")
    mode = "conditional" if j == 3 else "absolute"
    terms = _interval_integrals(lambda psi, jv: psi * jv**j)
    if j >= 5:
        bound = j0_tail_bound(j, _zero_partition(MAX_INTERVALS).edges[-1])
        if bound <= ABSOLUTE_TOL * 1e-2:
            return BesselMomentResult(j, float(np.sum(terms)), mode, bound, MAX_INTERVALS)
    tol = CONDITIONAL_TOL if j == 3 else ABSOLUTE_TOL
    value, err, used = _accelerate_tail(terms, start, window, tol * 1e-3)
    return BesselMomentResult(j, value, mode, err, used)


@dataclass(frozen=True)
class OscillatoryEstimate:
    value: float
    error_estimate: float
    partitions: int


def c1_direct(head_cutoff=20.0, window=None):
    """C1 = int_0^inf psi (arcsin J0(psi) - J0(psi)) dpsi.

    The integrand has the sign of J0, so the zero-interval contributions
    alternate.  Intervals up to the first zero beyond ``head_cutoff`` are
    summed as they are; the rest of the range is extrapolated.
    """
    terms = _interval_integrals(lambda psi, jv: psi * (np.arcsin(jv) - jv))
    zeros = _zero_partition(MAX_INTERVALS).edges[1:]
    start = int(np.searchsorted(zeros, head_cutoff)) + 1
    value, err, used = _accelerate_tail(terms, start, window, CONDITIONAL_TOL * 1e-3)
    return OscillatoryEstimate(value, err, used)
