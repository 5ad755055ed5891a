import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphdefect.moments import legendre_moment
from sphdefect.wigner import cg_squared_diag, threej_zero

C3 = 0.36755259694786136634


def test_threej_examples():
    assert threej_zero(1, 1, 1) == 0.0
    assert threej_zero(2, 2, 2) == pytest.approx(-math.sqrt(2 / 35), rel=1e-14)
    assert threej_zero(0, 0, 0) == 1.0


@given(st.integers(0, 60), st.integers(0, 60), st.integers(0, 60))
def test_threej_selection_rules(l1, l2, l3):
    v = threej_zero(l1, l2, l3)
    triangle = l1 <= l2 + l3 and l2 <= l1 + l3 and l3 <= l1 + l2
    if (l1 + l2 + l3) % 2 or not triangle:
        assert v == 0.0
    else:
        assert 0.0 < abs(v) <= 1.0


def test_threej_symmetric_under_permutation():
    assert threej_zero(4, 6, 8) == pytest.approx(threej_zero(8, 4, 6), rel=1e-14)


def test_cg_examples():
    assert cg_squared_diag(0) == 1.0
    assert cg_squared_diag(2) == pytest.approx(2 / 7, rel=1e-14)
    with pytest.raises(ValueError):
        cg_squared_diag(3)


def test_cg_identity_with_third_moment():
    for l in range(0, 41, 2):
        moment = legendre_moment(l, 3).value
        assert abs(moment - cg_squared_diag(l) / (2 * l + 1)) <= 1e-12


def test_cg_large_degree_limit():
    # l^2/(2l+1) * CG^2 tends to c3; the unscaled ratio decays like 1/l^2
    def dev(l):
        return abs(l * l * cg_squared_diag(l) / (2 * l + 1) - C3)

    assert dev(200) <= 0.02 * C3
    assert dev(400) < dev(200) < dev(100)


def test_threej_no_overflow():
    v = threej_zero(3000, 3000, 3000)
    assert math.isfinite(v) and v != 0.0
