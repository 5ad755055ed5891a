"""Wigner 3j symbols with all magnetic numbers zero, and the diagonal
Clebsch-Gordan coefficients that give the exact third Legendre moment

    int_0^1 P_l(t)^3 dt = {C^{l0}_{l0l0}}^2 / (2l + 1)      (l even).

Only squares of the coefficients are ever used, so the relative sign
convention between CG coefficients and 3j symbols does not matter.
"""
from __future__ import annotations

import math

__all__ = ["threej_zero", "cg_squared_diag"]


def threej_zero(l1, l2, l3):
    """(l1 l2 l3; 0 0 0) from the closed form, accumulated in log-gamma.

    With 2g = l1 + l2 + l3 even and the triangle conditions satisfied,

        (-1)^g sqrt[(2g-2l1)! (2g-2l2)! (2g-2l3)! / (2g+1)!]
              * g! / ((g-l1)! (g-l2)! (g-l3)!)

    and exactly zero otherwise.
    """
    if min(l1, l2, l3) < 0:
        raise ValueError("angular momenta must be nonnegative")
    total = l1 + l2 + l3
    if total % 2 or l1 > l2 + l3 or l2 > l1 + l3 or l3 > l1 + l2:
        return 0.0
    g = total // 2
    lg = math.lgamma
    log_value = 0.5 * (
        lg(2 * (g - l1) + 1) + lg(2 * (g - l2) + 1) + lg(2 * (g - l3) + 1) - lg(2 * g + 2)
    )
    log_value += lg(g + 1) - lg(g - l1 + 1) - lg(g - l2 + 1) - lg(g - l3 + 1)
    sign = -1.0 if g % 2 else 1.0
    return sign * math.exp(log_value)


def cg_squared_diag(l):
    """{C^{l0}_{l0l0}}^2 = (2l+1) * (l l l; 0 0 0)^2 for even l."""
    if l < 0 or l % 2:
        raise ValueError("the diagonal coefficient is nonzero only for even l >= 0")
    return (2 * l + 1) * threej_zero(l, l, l) ** 2
