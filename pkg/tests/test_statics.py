import math
import random
import time

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from squidtune import statics
from squidtune.core import SquidParams, fig1e_params
from squidtune.errors import InvalidParameterError, WellIndexError

import oracles

TABLE1 = SquidParams(320e-6, 1.18e-9, 2.34e-12, 1.85)
FIG1 = fig1e_params(1.0)


def test_potential_trivial_values():
    for be in (0.5, 10.0, 303.9):
        assert statics.potential(0.0, 0.0, be) == pytest.approx(-1.0, abs=1e-15)
    assert statics.potential(0.5, 0.5, 303.9) == pytest.approx(1.0, abs=1e-15)


def test_potential_has_local_minimum_near_30():
    x = np.linspace(29.5, 30.5, 20001)
    u = statics.potential(x, 0.0, 303.9)
    j = int(np.argmin(u))
    assert 0 < j < len(x) - 1
    assert abs(x[j] - 30) < 0.25
    # tilted washboard: the well at 30 lies above the one at 0
    assert u[j] > statics.potential(0.0, 0.0, 303.9)


def test_table1_census_count_and_speed():
    t0 = time.perf_counter()
    wells = statics.enumerate_wells(TABLE1)
    assert time.perf_counter() - t0 < 1.0
    assert len(wells) == 363
    assert [w.n for w in wells] == list(range(-181, 182))


def test_fig1_census_count():
    # beta_e = 303.85: floor(48.36 + 0.25) = 48 -> 2*48 - 1 = 95 counted wells
    assert statics.max_well_index(FIG1) == 48
    assert len(statics.enumerate_wells(FIG1)) == 95
    assert statics.census_count(FIG1) == 95


def test_census_excludes_exactly_the_outermost_pair():
    for be in (303.9, TABLE1.beta_e):
        brute = oracles.stable_roots(be)
        full = statics.enumerate_wells(be, include_edge=True)
        census = statics.enumerate_wells(be)
        assert len(full) == len(brute)
        np.testing.assert_allclose([w.flux for w in full], sorted(brute), atol=1e-9)
        assert [w.n for w in census] == [w.n for w in full[1:-1]]


def test_well_count_formula_matches_brute_force_on_random_beta_e():
    rng = random.Random(20240611)
    for _ in range(10):
        be = rng.uniform(10, 2000)
        N = math.floor(be / (2 * math.pi) + 0.25)
        brute = oracles.stable_roots(be)
        assert len(brute) == 2 * N + 1, be
        assert len(statics.enumerate_wells(be)) == 2 * N - 1 == len(brute) - 2


def test_wells_satisfy_equilibrium_and_stability():
    for w in statics.enumerate_wells(TABLE1):
        assert abs(statics.equilibrium_residual(w.flux, 0.0, TABLE1.beta_e)) < 1e-10
        assert statics.potential_curvature(w.flux, TABLE1.beta_e) > 0
        assert abs(w.flux - w.n) < 0.25
        assert w.depth > 0


def test_well_current_is_flux_over_inductance():
    w = statics.solve_well(100, TABLE1)
    assert w.current == pytest.approx(w.flux * 2.067833848484e-15 / TABLE1.L, rel=1e-9)


def test_potential_is_stationary_at_wells():
    # central difference in 40-digit arithmetic so that rounding of u (~150 E_J
    # at the outer wells) does not swamp the 1e-8 bound
    be = 303.9
    with mpmath.workdps(40):
        u = lambda x: 2 * mpmath.pi**2 / be * x**2 - mpmath.cos(2 * mpmath.pi * x)  # noqa: E731
        h = mpmath.mpf("1e-12")
        for w in statics.enumerate_wells(be):
            x = mpmath.mpf(w.flux)
            du = (u(x + h) - u(x - h)) / (2 * h)
            assert abs(du) < 1e-8
            assert abs(statics.potential_slope(w.flux, 0.0, be)) < 1e-8
    # double-precision closed form agrees with the high-precision one
    xs = np.array([w.flux for w in statics.enumerate_wells(be)])
    np.testing.assert_allclose(statics.potential(xs, 0.0, be), [float(u(mpmath.mpf(x))) for x in xs], rtol=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.floats(2.0, 3000.0), st.floats(-50.0, 50.0))
def test_wells_at_any_bias_are_roots(be, xe):
    for w in statics.enumerate_wells(be, xe, include_edge=True):
        assert abs(statics.equilibrium_residual(w.flux, xe, be)) < 1e-9 * max(1.0, be)
        assert 1 + be * math.cos(2 * math.pi * w.flux) > 0


def test_single_valued_regime():
    for xe in (-3.0, -0.2, 0.0, 0.7, 5.0):
        wells = statics.enumerate_wells(0.5, xe)
        assert len(wells) == 1
        assert wells[0].status == statics.SINGLE_VALUED
        assert abs(statics.equilibrium_residual(wells[0].flux, xe, 0.5)) < 1e-12
        assert len(oracles.stable_roots(0.5, xe)) == 1


def test_threshold_fig1():
    t = statics.critical_threshold(0, 303.9, +1)
    assert t.approx == pytest.approx(48.6, abs=0.05)
    assert t.exact == pytest.approx(48.6, abs=0.05)
    assert abs(t.exact - t.approx) < 0.02


def test_threshold_exact_matches_oracle():
    for be in (3.0, 303.9, 1147.35, 5000.0):
        assert statics.threshold_offset(be) == pytest.approx(oracles.exact_threshold_offset(be), abs=1e-12)


@given(st.integers(-48, 48))
def test_threshold_odd_symmetry(n):
    a = statics.critical_threshold(-n, 303.9, -1)
    b = statics.critical_threshold(n, 303.9, +1)
    assert a.exact == pytest.approx(-b.exact, abs=1e-12)
    assert a.approx == pytest.approx(-b.approx, abs=1e-12)


def test_threshold_out_of_range():
    with pytest.raises(WellIndexError):
        statics.critical_threshold(49, 303.9)
    with pytest.raises(InvalidParameterError):
        statics.critical_threshold(0, 303.9, 0)


def test_threshold_is_where_the_well_disappears():
    be = 303.9
    t = statics.critical_threshold(3, be).exact
    assert statics.solve_well(3, be, t - 1e-6) is not None
    assert statics.solve_well(3, be, t + 1e-6) is None


def test_hysteresis_symmetric_about_origin():
    up, down = statics.hysteresis_curve(303.9, (-60, 60), points=2401)
    np.testing.assert_allclose(down.xe, -up.xe, atol=1e-12)
    np.testing.assert_allclose(up.flux, -down.flux, atol=1e-9)
    jump0 = [x for x, a, b in up.jumps if a == 0]
    assert jump0 and jump0[0] == pytest.approx(48.6, abs=0.05)
    assert all(b == a + 1 for _, a, b in up.jumps)


def test_hysteresis_jumps_only_at_thresholds():
    be = 303.9
    up, down = statics.hysteresis_curve(be, (-60, 60), points=1201)
    c = statics.threshold_offset(be)
    for x, a, _ in up.jumps:
        assert x == pytest.approx(a + c, abs=1e-12)
    for x, a, _ in down.jumps:
        assert x == pytest.approx(a - c, abs=1e-12)
    # between jumps the branch is continuous: no step larger than the grid allows
    steps = np.abs(np.diff(up.flux))
    big = np.flatnonzero(steps > 0.5)
    assert len(big) == len(up.jumps)


@pytest.mark.parametrize("offset", [-20.0, 30.0])
def test_hysteresis_translates_with_environmental_offset(offset):
    grid = np.linspace(-120, 120, 2401)
    up0, down0 = statics.hysteresis_curve(303.9, grid)
    up1, down1 = statics.hysteresis_curve(303.9, grid - offset, env_offset=offset)
    # identical loops, translated horizontally by -offset
    np.testing.assert_allclose(up1.flux, up0.flux, atol=1e-12)
    np.testing.assert_allclose(down1.flux, down0.flux, atol=1e-12)
    ref = {(a, b): x for x, a, b in up0.jumps + down0.jumps}
    for x, a, b in up1.jumps + down1.jumps:
        assert x == pytest.approx(ref[(a, b)] - offset, abs=1e-9)


def test_hysteresis_below_threshold_has_no_jumps():
    up, down = statics.hysteresis_curve(303.9, (-48.0, 48.0), points=501, start_well=0)
    assert not up.jumps and not down.jumps
    assert set(up.wells) == {0} and set(down.wells) == {0}


def test_hysteresis_custom_policy_is_called():
    calls = []

    def skip_two(params, xe, n, direction):
        calls.append((xe, n, direction))
        return statics.adjacent_jump(params, xe, n, direction) + direction

    up, _ = statics.hysteresis_curve(303.9, (-60, 60), points=601, jump_policy=skip_two)
    assert calls
    assert all(b - a == 2 for _, a, b in up.jumps)


def test_hysteresis_range_validation():
    with pytest.raises(InvalidParameterError):
        statics.hysteresis_curve(303.9, (1.0, -1.0))
    with pytest.raises(InvalidParameterError):
        statics.hysteresis_curve(303.9, (0.0, math.inf))


def test_csv_rows_shape():
    rows = list(statics.well_rows(statics.enumerate_wells(TABLE1)))
    assert len(rows) == 363 and all(len(r) == 4 for r in rows)
    up, down = statics.hysteresis_curve(303.9, (-1, 1), points=5)
    rows = list(statics.hysteresis_rows(up, down))
    assert len(rows) == 10 and {r[2] for r in rows} == {"up", "down"}
