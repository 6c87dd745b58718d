import math

import pytest
from hypothesis import given, strategies as st

from squidtune._roots import newton_bisect


def test_cubic_root():
    r = newton_bisect(lambda x: x**3 - 2, lambda x: 3 * x**2, 0.0, 2.0)
    assert r == pytest.approx(2 ** (1 / 3), abs=1e-12)


def test_no_sign_change_rejected():
    with pytest.raises(ValueError):
        newton_bisect(lambda x: x * x + 1, lambda x: 2 * x, -1.0, 1.0)


def test_flat_derivative_falls_back_to_bisection():
    # f'(x) = 0 at the seed; Newton alone would divide by zero
    r = newton_bisect(lambda x: math.cos(x), lambda x: 0.0, 1.0, 2.0, x0=1.5)
    assert r == pytest.approx(math.pi / 2, abs=1e-10)


@given(st.floats(2.0, 5000.0), st.floats(-100.0, 100.0))
def test_equilibrium_roots_stay_in_bracket(be, xe):
    k = be / (2 * math.pi)
    a = math.acos(-1 / be) / (2 * math.pi)
    n = round(xe)
    f = lambda x: x + k * math.sin(2 * math.pi * x) - xe  # noqa: E731
    df = lambda x: 1 + be * math.cos(2 * math.pi * x)  # noqa: E731
    lo, hi = n - a, n + a
    if f(lo) < 0 < f(hi):
        r = newton_bisect(f, df, lo, hi, x0=float(n))
        assert lo <= r <= hi
        assert abs(f(r)) < 1e-10 * max(1.0, be)
