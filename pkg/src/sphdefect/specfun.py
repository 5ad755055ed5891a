"""Special functions: Legendre polynomials, normalized associated Legendre
functions, the Bessel function J0, arcsine Taylor coefficients and Hilb's
approximation of P_l(cos theta).

Everything here is pure and vectorized over the argument where that makes
sense.  Degrees are always plain Python integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "legendre_eval",
    "legendre_cos",
    "legendre_batch",
    "assoc_legendre_normalized",
    "assoc_legendre_table",
    "bessel_j0",
    "arcsin_coeff",
    "arcsin_coeffs",
    "HilbApproximation",
    "hilb_approx",
    "hilb_envelope",
    "hilb_error_ratio",
    "hilb_check",
    "HILB_CONSTANT",
    "J0_CROSSOVER",
]

# |t| may exceed 1 by this much before it is treated as a domain error
_T_SLACK = 1e-12

# switch from the power series to the Hankel expansion of J0
J0_CROSSOVER = 12.0
_J0_SERIES_TERMS = 48
_J0_ASYMPTOTIC_TERMS = 12

# universal constant in the Hilb error envelope: 1.2x the sup of
# |P_l(cos theta) - main term| / envelope at l = 50 (0.049); the sup creeps
# up towards ~0.0506 as l grows
HILB_CONSTANT = 0.06


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + _T_SLACK):
        raise ValueError("Legendre argument outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def legendre_eval(l, t):
    """Legendre polynomial P_l(t) by the upward three-term recurrence.

    ``t`` may be a scalar or an array; values within 1e-12 outside [-1, 1]
    are clamped, anything further out raises ``ValueError``.
    """
    if l < 0:
        raise ValueError("degree must be nonnegative")
    scalar = np.ndim(t) == 0
    t = _check_t(t)
    p_prev = np.ones_like(t)
    if l == 0:
        return float(p_prev) if scalar else p_prev
    p = t.copy()
    for k in range(1, l):
        p_prev, p = p, ((2 * k + 1) * t * p - k * p_prev) / (k + 1)
    return float(p) if scalar else p


def legendre_cos(l, theta):
    """P_l(cos theta) evaluated from the angle.

    Runs the recurrence on q_k = P_k - 1 with u = 1 - cos theta = 2 sin^2(theta/2),
    which keeps full relative accuracy of 1 - P_l near theta = 0 where
    going through t = cos theta loses about l^2 ulps.
    """
    if l < 0:
        raise ValueError("degree must be nonnegative")
    scalar = np.ndim(theta) == 0
    theta = np.asarray(theta, dtype=float)
    u = 2.0 * np.sin(0.5 * theta) ** 2
    q_prev = np.zeros_like(u)
    if l == 0:
        return 1.0 if scalar else q_prev + 1.0
    q = -u
    for k in range(1, l):
        q_prev, q = q, ((2 * k + 1) * (q - u * (1.0 + q)) - k * q_prev) / (k + 1)
    p = 1.0 + q
    return float(p) if scalar else p


def legendre_batch(l_max, t):
    """All of P_0(t), ..., P_{l_max}(t) from one recurrence pass.

    Returns an array of shape ``(l_max + 1,) + np.shape(t)``.
    """
    if l_max < 0:
        raise ValueError("degree must be nonnegative")
    t = _check_t(t)
    out = np.empty((l_max + 1,) + t.shape)
    out[0] = 1.0
    if l_max >= 1:
        out[1] = t
    for k in range(1, l_max):
        out[k + 1] = ((2 * k + 1) * t * out[k] - k * out[k - 1]) / (k + 1)
    return out


def assoc_legendre_table(l, t):
    """Fully normalized associated Legendre values for degree ``l``.

    Row ``m`` of the result (shape ``(l + 1, len(t))``) holds

        sqrt((2l+1)/(4 pi) * (l-m)!/(l+m)!) * P_l^m(t)

    without the Condon-Shortley phase, so that ``Y_l0 = row 0`` and
    ``sqrt(2) * row m * cos(m phi)``, ``sqrt(2) * row m * sin(m phi)`` form
    the real orthonormal basis.  Computed with the normalized recurrence in
    degree, which does not overflow (deep in the evanescent region the
    values underflow to zero instead).
    """
    if l < 0:
        raise ValueError("degree must be nonnegative")
    t = np.atleast_1d(_check_t(t))
    s = np.sqrt(np.maximum(0.0, (1.0 - t) * (1.0 + t)))
    out = np.empty((l + 1, t.size))
    p_mm = np.full(t.size, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(l + 1):
        if m > 0:
            p_mm = p_mm * s * math.sqrt((2 * m + 1) / (2.0 * m))
        if m == l:
            out[m] = p_mm
            continue
        p_prev, p = p_mm, math.sqrt(2 * m + 3) * t * p_mm
        for k in range(m + 2, l + 1):
            a = math.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
            b = math.sqrt(((k - 1.0) ** 2 - m * m) / (4.0 * (k - 1.0) ** 2 - 1.0))
            p_prev, p = p, a * (t * p - b * p_prev)
        out[m] = p
    return out


def assoc_legendre_normalized(l, m, t):
    """Single normalized associated Legendre value; see `assoc_legendre_table`."""
    if not 0 <= m <= l:
        raise ValueError(f"order m={m} must satisfy 0 <= m <= l={l}")
    scalar = np.ndim(t) == 0
    row = assoc_legendre_table(l, t)[m]
    return float(row[0]) if scalar else row.reshape(np.shape(t))


def _j0_series(x):
    q = -0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, _J0_SERIES_TERMS):
        term = term * q / (k * k)
        total = total + term
    return total


@lru_cache(maxsize=None)
def _hankel_coeffs():
    # a_k(0) = prod_{i<=k} (-(2i-1)^2) / (8^k k!)
    c = [1.0]
    for k in range(1, 2 * _J0_ASYMPTOTIC_TERMS + 1):
        c.append(c[-1] * (-(2 * k - 1) ** 2) / (8.0 * k))
    return tuple(c)


def _j0_asymptotic(x):
    c = _hankel_coeffs()
    inv = 1.0 / x
    inv2 = inv * inv
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for k in reversed(range(_J0_ASYMPTOTIC_TERMS)):
        sign = -1.0 if k % 2 else 1.0
        p = p * inv2 + sign * c[2 * k]
        q = q * inv2 + sign * c[2 * k + 1]
    q = q * inv
    chi = x - 0.25 * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j0(psi):
    """Bessel function of the first kind of order zero, for psi >= 0.

    Power series below `J0_CROSSOVER`, Hankel asymptotic expansion above.
    Absolute error is below 1e-12 on [0, 1e4].
    """
    scalar = np.ndim(psi) == 0
    x = np.asarray(psi, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("bessel_j0 is defined here for psi >= 0 only")
    out = np.empty_like(x)
    small = x < J0_CROSSOVER
    out[small] = _j0_series(x[small])
    out[~small] = _j0_asymptotic(x[~small])
    return float(out) if scalar else out


_ARCSIN_TABLE = np.array([1.0])


def arcsin_coeffs(m):
    """Array ``[a_1, ..., a_m]`` of coefficients in arcsin(t) - t = sum a_k t^(2k+1)."""
    global _ARCSIN_TABLE
    if m < 1:
        return np.empty(0)
    if _ARCSIN_TABLE.size <= m:
        size = max(m + 1, 2 * _ARCSIN_TABLE.size)
        k = np.arange(size - 1, dtype=float)
        # a_{k+1}/a_k = (2k+1)^2 / ((2k+2)(2k+3)), a_0 = 1
        ratios = (2 * k + 1) ** 2 / ((2 * k + 2) * (2 * k + 3))
        table = np.concatenate([[1.0], np.cumprod(ratios)])
        table.flags.writeable = False
        _ARCSIN_TABLE = table
    return _ARCSIN_TABLE[1 : m + 1]


def arcsin_coeff(k):
    """a_k = (2k)! / (4^k (k!)^2 (2k+1)), via the ratio recurrence."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    return float(arcsin_coeffs(k)[-1])


@dataclass(frozen=True)
class HilbApproximation:
    l: int
    theta: float
    main_term: float
    error_bound: float


def _sqrt_theta_over_sin(theta):
    theta = np.asarray(theta, dtype=float)
    th2 = theta * theta
    # (theta/sin theta)^(1/2) = 1 + th^2/12 + th^4/160 + ...
    series = 1.0 + th2 / 12.0 + th2 * th2 / 160.0
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = np.sqrt(theta / np.sin(theta))
    return np.where(theta < 1e-4, series, direct)


def hilb_envelope(l, theta, constant=HILB_CONSTANT):
    """Two-regime bound K*theta^(1/2)*l^(-3/2) (theta > 1/l) or K*theta^2."""
    theta = np.asarray(theta, dtype=float)
    return constant * np.where(theta > 1.0 / l, np.sqrt(theta) * l ** -1.5, theta * theta)


def hilb_main_term(l, theta):
    """(theta/sin theta)^(1/2) J0((l + 1/2) theta), vectorized in theta."""
    theta = np.asarray(theta, dtype=float)
    return _sqrt_theta_over_sin(theta) * bessel_j0((l + 0.5) * theta)


def hilb_approx(l, theta):
    if not 0.0 <= theta <= 0.5 * math.pi + 1e-15:
        raise ValueError("theta must lie in [0, pi/2]")
    return HilbApproximation(
        l=l,
        theta=float(theta),
        main_term=float(hilb_main_term(l, theta)),
        error_bound=float(hilb_envelope(l, theta)),
    )


def hilb_error_ratio(l, n_points=20001):
    """Largest |P_l(cos theta) - main term| / envelope(K=1) in each regime.

    Returns ``(near, far)`` for theta in (0, 1/l] and (1/l, pi/2].  The near
    grid is geometric down to 1e-4/l, the far grid uniform.
    """
    near = np.geomspace(1e-4 / l, 1.0 / l, n_points)
    far = np.linspace(1.0 / l, 0.5 * math.pi, 10 * n_points)[1:]
    out = []
    for theta in (near, far):
        delta = np.abs(legendre_cos(l, theta) - hilb_main_term(l, theta))
        out.append(float(np.max(delta / hilb_envelope(l, theta, 1.0))))
    return tuple(out)


def hilb_check(l_list=(50, 100, 200), calibrate_l=50, margin=1.2):
    """Calibrate the envelope constant on one degree and test it on others.

    K_fit = margin * (largest ratio at ``calibrate_l``).  Returns
    ``(k_fit, rows)`` with one ``(l, near_ratio, far_ratio, holds)`` row per l.
    """
    k_fit = margin * max(hilb_error_ratio(calibrate_l))
    rows = []
    for l in l_list:
        near, far = hilb_error_ratio(l)
        rows.append((l, near, far, max(near, far) <= k_fit))
    return k_fit, rows
