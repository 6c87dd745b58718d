import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from squidtune import stability
from squidtune.errors import InvalidParameterError
from squidtune.figures import IDLE, ZLINE, measured_offset
from squidtune.stability import KvCurve, VoltageTrace, stats, transduce

finite = st.floats(-1e-3, 1e-3, allow_nan=False)


def _trace(p2p, n=11):
    return VoltageTrace(1.0, np.linspace(-p2p / 2, p2p / 2, n))


def test_anchor_points_exact():
    for _, vp2p, fp2p in (stability.IDLE_POINT, stability.BIASED_POINT):
        kv = fp2p / (vp2p * 1e6)
        assert stats(transduce(_trace(vp2p), kv)).p2p == pytest.approx(fp2p, rel=1e-9)
    assert stats(transduce(_trace(0.012e-3), stability.KV_IDLE)).p2p == pytest.approx(15.3, rel=1e-9)
    assert stats(transduce(_trace(0.036e-3), stability.KV_BIASED)).p2p == pytest.approx(50.2, rel=1e-9)


def test_implied_coefficients():
    assert stability.KV_IDLE == pytest.approx(1.275, rel=1e-12)
    assert stability.KV_BIASED == pytest.approx(1.39444, rel=1e-5)
    assert stability.KV_DEFAULT == pytest.approx(0.5 * (1.275 + 1.394444), rel=1e-5)


def test_zero_trace():
    flux = transduce(VoltageTrace(1.0, np.zeros(5)), 1.3)
    assert np.all(flux.values == 0) and flux.period == 1.0


def test_transduce_rejects_bad_kv():
    for kv in (0.0, -1.0, float("inf")):
        with pytest.raises(InvalidParameterError):
            transduce(_trace(1e-3), kv)


def test_trace_validation():
    with pytest.raises(InvalidParameterError):
        VoltageTrace(1.0, [0.0])
    with pytest.raises(InvalidParameterError):
        VoltageTrace(0.0, [0.0, 1.0])


@given(arrays(float, st.integers(2, 50), elements=finite), st.floats(-10, 10), st.floats(0.1, 5))
def test_transduce_linear(samples, a, kv):
    t = VoltageTrace(1.0, samples)
    assert np.array_equal(transduce(t.scaled(a), kv).values, (a * samples) * (kv * 1e6))
    assert np.allclose(transduce(t.scaled(a), kv).values, a * transduce(t, kv).values, rtol=1e-12, atol=1e-12)


@given(arrays(float, st.integers(2, 50), elements=st.floats(-100, 100)), st.floats(-1e3, 1e3), st.floats(0.01, 100))
def test_stats_shift_and_scale(values, shift, scale):
    base = stats(values)
    shifted = stats(values + shift)
    assert shifted.p2p == pytest.approx(base.p2p, abs=1e-9)
    assert shifted.std == pytest.approx(base.std, abs=1e-8)
    scaled = stats(values * scale)
    assert scaled.p2p == pytest.approx(scale * base.p2p, rel=1e-9, abs=1e-12)
    assert scaled.std == pytest.approx(scale * base.std, rel=1e-9, abs=1e-12)
    assert base.p2p >= base.std >= 0


def test_constant_series_and_empty():
    s = stats(np.full(10, 7.0), 0.2)
    assert s.p2p == 0 and s.std == 0 and s.rsd_ppm == 0
    with pytest.raises(InvalidParameterError):
        stats(np.array([]))
    assert stats(np.array([1.0, 2.0])).rsd_ppm is None
    assert stats(np.array([1.0, 2.0]), 0.0).rsd_ppm is None


def test_rsd_reproduces_published_values():
    offset = measured_offset()
    assert offset == pytest.approx(0.206, abs=0.001)
    assert stability.rsd_ppm(4.9, offset) == pytest.approx(24.5, rel=0.05)
    assert stability.rsd_ppm(11.0, offset) == pytest.approx(55.0, rel=0.05)
    assert stability.rsd_ppm(4.9, 0.2064) == pytest.approx(23.7, abs=0.05)


def test_zline_regime():
    trace = stability.dac_noise_model(**ZLINE, seed=0)
    s = stats(transduce(trace, stability.KV_BIASED), measured_offset())
    assert s.std == pytest.approx(11.0, rel=0.2)
    assert s.p2p == pytest.approx(50.2, rel=0.2)


def test_rf_squid_scheme_quieter():
    z = stats(transduce(stability.dac_noise_model(**ZLINE, seed=0), stability.KV_BIASED))
    rf = stats(transduce(stability.dac_noise_model(**IDLE, seed=1), stability.KV_IDLE))
    assert rf.std < z.std and rf.p2p < z.p2p


def test_seed_determinism():
    a = stability.dac_noise_model(**ZLINE, seed=3)
    b = stability.dac_noise_model(**ZLINE, seed=3)
    c = stability.dac_noise_model(**ZLINE, seed=4)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_code_boundary_constant():
    code = 0.1 / 2**16
    t = stability.dac_noise_model(16, 0.1, 0.0, 10.0, 1.0, setpoint=1234 * code)
    assert np.all(t.samples == 0)


def test_halving_noise_halves_p2p():
    kw = dict(bits=40, fullscale=0.1, duration=2000.0, period=1.0, seed=5)
    full = stats(transduce(stability.dac_noise_model(noise_p2p=0.036e-3, **kw), stability.KV_BIASED))
    half = stats(transduce(stability.dac_noise_model(noise_p2p=0.018e-3, **kw), stability.KV_BIASED))
    assert half.p2p == pytest.approx(full.p2p / 2, rel=1e-6)


def test_jitter_bounded():
    t = stability.dac_noise_model(40, 0.1, 1e-3, 5000.0, 1.0, seed=0)
    assert t.samples.max() - t.samples.min() <= 1e-3


def test_dac_validation():
    with pytest.raises(InvalidParameterError):
        stability.dac_noise_model(0, 0.1, 1e-5, 10, 1)
    with pytest.raises(InvalidParameterError):
        stability.dac_noise_model(16, 0.1, -1e-5, 10, 1)
    with pytest.raises(InvalidParameterError):
        stability.dac_noise_model(16, 0.0, 1e-5, 10, 1)


def test_kv_curve():
    kv = KvCurve()
    assert kv(stability.IDLE_POINT[0]) == pytest.approx(stability.KV_IDLE)
    assert kv(stability.BIASED_POINT[0]) == pytest.approx(stability.KV_BIASED)
    mid = 0.5 * (stability.IDLE_POINT[0] + stability.BIASED_POINT[0])
    assert kv(mid) == pytest.approx(stability.KV_DEFAULT)
    assert kv(1.0) == pytest.approx(stability.KV_BIASED)
    with pytest.raises(InvalidParameterError):
        KvCurve((0.1, 0.0), (1.0, 1.0))
    with pytest.raises(InvalidParameterError):
        KvCurve((0.0,), (0.0,))


def test_csv_ingestion(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("t_s,v_rel_V\n0,1e-6\n120,-1e-6\n240,0\n")
    t = stability.read_trace_csv(path)
    assert t.period == 120 and list(t.samples) == [1e-6, -1e-6, 0]
    assert stability.read_trace_csv(str(path)).samples.size == 3
    for bad in ("t,v\n0,1\n1,2\n", "t_s,v_rel_V\n0,1\n", "t_s,v_rel_V\n0,1\n1,x\n",
                "t_s,v_rel_V\n0,1\n1,2\n5,3\n", ""):
        with pytest.raises(InvalidParameterError):
            stability.read_trace_csv(bad)


def test_trace_rows_round_trip():
    t = stability.dac_noise_model(16, 0.1, 1e-5, 600, 120, seed=0)
    text = "t_s,v_rel_V\n" + "\n".join(f"{a!r},{b!r}" for a, b in stability.trace_rows(t))
    back = stability.read_trace_csv(text)
    assert np.array_equal(back.samples, t.samples) and back.period == t.period


def test_stats_record_keys():
    assert set(stats(np.array([0.0, 1.0]), 0.2).to_record()) == {"p2p_uphi0", "std_uphi0", "rsd_ppm"}
