import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewconley import base


def test_periodic_identity():
    assert base.shift(base.periodic(1.0), 0.25, 0) == 0.25


def test_periodic_wraps():
    assert base.shift(base.periodic(1.0), 0.25, 1.5) == pytest.approx(0.75, abs=1e-15)


def test_finite_power():
    assert base.shift(base.cyclic_shift(4), 3, 2) == 1


def test_finite_negative_time_inverts():
    b = base.finite([2, 0, 3, 1])
    for p in range(4):
        assert base.shift(b, base.shift(b, p, 3), -3) == p


def test_finite_rejects_fractional_time():
    with pytest.raises(ValueError):
        base.shift(base.cyclic_shift(3), 0, 0.5)


def test_trivial_base_is_a_point():
    assert base.shift(base.trivial(), 0.0, 7.3) == 0.0


def test_invalid_bases_rejected():
    with pytest.raises(ValueError):
        base.periodic(0.0)
    with pytest.raises(ValueError):
        base.finite([0, 0, 1])


times = st.floats(-50, 50, allow_nan=False)


@settings(max_examples=1000, deadline=None)
@given(p=st.floats(0, 1, exclude_max=True), s=times, t=times)
def test_periodic_group_law(p, s, t):
    b = base.periodic(1.0)
    a = base.shift(b, p, t + s)
    c = base.shift(b, base.shift(b, p, s), t)
    d = abs(a - c)
    assert min(d, 1.0 - d) <= 1e-12
    assert 0.0 <= a < 1.0


@settings(max_examples=1000, deadline=None)
@given(perm=st.permutations(range(6)), p=st.integers(0, 5), s=st.integers(-20, 20), t=st.integers(-20, 20))
def test_finite_group_law_exact(perm, p, s, t):
    b = base.finite(perm)
    assert base.shift(b, p, t + s) == base.shift(b, base.shift(b, p, s), t)
    assert base.shift(b, p, 0) == p


@given(p=st.floats(0, 2 * math.pi, exclude_max=True))
def test_periodic_zero_shift(p):
    assert base.shift(base.periodic(2 * math.pi), p, 0.0) == pytest.approx(p, abs=1e-15)
