import math

import numpy as np
import pytest

from sphdefect.constants import (
    BGS_REFERENCE,
    LOWER_BOUND,
    PER_AREA_LOWER_BOUND,
    InvariantError,
    c2_series,
    convergence_table,
    il_exact,
    report,
    variance_exact,
)
from sphdefect.quad import c1_direct

C3 = 0.36755259694786136634


def _trapezoid_il(l, n=1_000_000):
    # brute-force oracle: Legendre polynomial from numpy, plain trapezoid rule
    theta = np.linspace(0.0, math.pi / 2, n + 1)
    p = np.polynomial.legendre.legval(np.cos(theta), [0] * l + [1])
    f = np.arcsin(np.clip(p, -1, 1)) * np.sin(theta)
    return float(np.sum(f[1:] + f[:-1]) * 0.5 * (theta[1] - theta[0]))


def test_il_against_trapezoid():
    assert il_exact(2) == pytest.approx(_trapezoid_il(2), abs=1e-8)
    assert il_exact(6) == pytest.approx(_trapezoid_il(6), abs=1e-8)


def test_il_rejects_odd():
    with pytest.raises(ValueError):
        il_exact(3)


def test_variance_examples():
    assert variance_exact(2) == pytest.approx(32 * math.pi * il_exact(2), rel=1e-15)
    v = variance_exact(100)
    assert 0 < v < 16 * math.pi**2


def test_il_scaled_converges_to_c1():
    c1 = c1_direct().value
    devs = [abs(l * l * il_exact(l) - c1) for l in (50, 100, 200, 400)]
    assert all(b < a for a, b in zip(devs, devs[1:]))


def test_c2_series():
    s1 = c2_series(1)
    assert s1.value == pytest.approx(C3 / 6, abs=1e-7)
    assert abs(c2_series(50).value - c2_series(100).value) <= 1e-3
    s200 = c2_series(200)
    assert s200.tail_estimate > 0
    # the tail estimate accounts for the remaining gap to the direct route
    gap = c1_direct().value - s200.value
    assert gap == pytest.approx(s200.tail_estimate, rel=0.05)


def test_report_values():
    rep = report()
    assert rep.lower_bound == pytest.approx(32 / math.sqrt(27), rel=1e-15)
    assert rep.per_area_lower_bound == pytest.approx(0.0389, abs=1e-4)
    assert rep.bgs_reference == BGS_REFERENCE == 0.0386
    assert rep.C == pytest.approx(32 * math.pi * rep.c1_direct, rel=1e-15)
    assert rep.C > LOWER_BOUND and rep.C_per_area > PER_AREA_LOWER_BOUND
    assert rep.ok
    assert set(rep.to_dict()) >= {"C", "c1_direct", "c1_series", "lower_bound", "checks"}


def test_report_strict_raises(monkeypatch):
    import sphdefect.constants as mod

    monkeypatch.setattr(mod, "LOWER_BOUND", 1e6)
    with pytest.raises(InvariantError):
        mod.report(m=10, strict=True)


def test_convergence_table_trend():
    rows = convergence_table()
    assert [r[0] for r in rows] == [50, 100, 200, 400]
    devs = [r[4] for r in rows]
    assert all(b < a for a, b in zip(devs, devs[1:]))
