"""Desk-scale regeneration of every figure's data with checked anchors.

Each reproducer returns named tables plus a list of ``Check`` records; the
CLI writes both.  Nothing here plots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, planner, qubitmap, stability, statics, tdm, thermal
from .core import FIG1E_RESISTANCES, IvMeasurement, fig1e_params, fit_from_iv
from .config import default_config, env_offset_from_config, network_from_config, squid_from_config, transmon_from_config

TAGS = ("1c", "1d", "1e", "1f", "2a", "2b", "2c", "2d", "s1", "s2", "s3", "s4", "3")
RATIOS = tuple(sorted(FIG1E_RESISTANCES))

# ratio 0.3 (quoted R), amplitude 49.4 from n = 0: validated against a fixed-step RK4 run
GOLDEN_FINAL_R03 = 29
GOLDEN_DELTA_R03 = 28.898067688071137


@dataclass
class Table:
    header: tuple[str, ...]
    rows: list[tuple]


@dataclass(frozen=True)
class Check:
    check: str
    expected: object
    got: object
    tolerance: object
    passed: bool

    def to_record(self) -> dict:
        return {"check": self.check, "expected": self.expected, "got": self.got,
                "tolerance": self.tolerance, "pass": bool(self.passed)}


@dataclass
class FigureOutput:
    tag: str
    tables: dict[str, Table] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def near(self, name, expected, got, tol):
        self.checks.append(Check(name, expected, got, tol, abs(got - expected) <= tol))

    def within(self, name, lo, hi, got):
        self.checks.append(Check(name, [lo, hi], got, "interval", lo <= got <= hi))

    def truth(self, name, got: bool, expected=True):
        self.checks.append(Check(name, expected, got, "exact", got == expected))


def _table1():
    cfg = default_config()
    return (squid_from_config(cfg), network_from_config(cfg), transmon_from_config(cfg),
            env_offset_from_config(cfg))


def fig_1c(workers=1) -> FigureOutput:
    out = FigureOutput("1c")
    p = fig1e_params(1.0, quoted_resistance=True)
    x = np.linspace(-60, 60, 4801)
    u = statics.potential(x, 0.0, p.beta_e)
    out.tables["potential"] = Table(("x_phi0", "u_ej"), list(zip(x.tolist(), u.tolist())))
    out.near("beta_e", 303.9, p.beta_e, 0.1)
    out.near("u(0) at zero bias", -1.0, float(statics.potential(0.0, 0.0, p.beta_e)), 1e-12)
    out.near("local minimum near 30 Phi0", 30.0, statics.well_flux(30, p), 0.25)
    return out


def _hysteresis_tables(out, name, up, down):
    out.tables[name] = Table(("phi_e_phi0", "phi_phi0", "branch"), list(statics.hysteresis_rows(up, down)))


def fig_1d(workers=1) -> FigureOutput:
    out = FigureOutput("1d")
    p = fig1e_params(1.0, quoted_resistance=True)
    up, down = statics.hysteresis_curve(p, (-60.0, 60.0), points=2401)
    _hysteresis_tables(out, "hysteresis", up, down)
    out.tables["wells"] = Table(("n", "phi_phi0", "current_uA", "depth_ej"), list(statics.well_rows(statics.enumerate_wells(p))))
    asym = float(np.max(np.abs(up.flux + down.flux)))  # down.xe[j] == -up.xe[j] on a symmetric grid
    out.near("branch symmetry max|up(xe) + down(-xe)|", 0.0, asym, 1e-9)
    jump0 = [j[0] for j in up.jumps if j[1] == 0]
    out.near("up-sweep jump from n=0", 48.6, jump0[0] if jump0 else math.nan, 0.05)
    return out


def fig_1e(workers=1) -> FigureOutput:
    out = FigureOutput("1e")
    finals = {}
    for ratio in RATIOS:
        p = fig1e_params(ratio, quoted_resistance=True)
        pulse = dynamics.FluxPulse.in_tau(49.4, p.tau0)
        r = dynamics.pulse_transition(p, 0, pulse, keep_trajectory=True)
        finals[ratio] = r
        out.tables[f"trajectory_r{ratio}"] = Table(("tau", "x_phi0", "dxdtau", "xe_phi0"), list(r.trajectory.rows()))
    out.truth("ratio 2.0 lands on n=1", finals[2.0].final == 1)
    out.truth("ratio 1.0 lands on n=1", finals[1.0].final == 1)
    out.truth("ratio 0.3 multiple transition (final > 1)", finals[0.3].final > 1)
    out.near("ratio 0.3 final well (golden)", GOLDEN_FINAL_R03, finals[0.3].final, 0)
    out.near("ratio 0.3 delta phi (golden)", GOLDEN_DELTA_R03, finals[0.3].delta_phi, 1e-6)
    out.truth("all runs settled", all(r.settled for r in finals.values()))
    return out


def fig_1f(workers=1) -> FigureOutput:
    out = FigureOutput("1f")
    fits, finals = [], {}
    for ratio in RATIOS:
        p = fig1e_params(ratio, quoted_resistance=True)
        sweep = dynamics.transition_sweep(p, 0, dynamics.fig1f_amplitudes(p), workers=workers)
        out.tables[f"sweep_r{ratio}"] = Table(("amplitude_phi0", "delta_phi_phi0", "final_n", "settled"), list(sweep.rows()))
        fits.append((ratio, sweep.slope, sweep.intercept, sweep.fit.n_points))
        finals[ratio] = [r.final for r in sweep.results]
        out.near(f"slope at ratio {ratio}", 1.0, sweep.slope, 0.01)
    out.tables["fits"] = Table(("ratio", "slope", "intercept", "n_points"), fits)
    out.truth("ratios 1.0 and 2.0 give identical final wells", finals[1.0] == finals[2.0])
    return out


def fig_2a(workers=1) -> FigureOutput:
    out = FigureOutput("2a")
    p, *_ = _table1()
    up, down = statics.hysteresis_curve(p, (-250.0, 250.0), points=5001)
    _hysteresis_tables(out, "hysteresis", up, down)
    jump0 = [j[0] for j in up.jumps if j[1] == 0]
    th = statics.critical_threshold(0, p)
    out.near("up-sweep jump from n=0 (exact threshold)", th.exact, jump0[0] if jump0 else math.nan, 1e-9)
    out.near("threshold approximation vs exact", th.approx, th.exact, 0.02)
    return out


def fig_2b(workers=1, loss: float = 24.0) -> FigureOutput:
    """Transition sweep from n = -58 through an emulated lossy line."""
    out = FigureOutput("2b")
    p, _, _, env = _table1()
    probe = -58
    line = dynamics.LossyLine(1.0, loss)
    cal = planner.calibrate_basic_transition(p, probe, line=line, offsets=[float(o) for o in range(0, 40, 2)])
    out.tables["sweep"] = Table(("amplitude_phi0", "delta_phi_phi0", "final_n", "settled"),
                                [(t.amplitude, t.delta_phi, t.final, int(t.settled)) for t in cal.transitions[1:]])
    predicted = -57.5 + statics.threshold_offset_approx(p.beta_e)
    out.near("predicted critical amplitude at -57.5 Phi0", 125.4, predicted, 1.0)
    out.near("predicted minus environmental offset", 94.9, predicted - env, 1.0)
    out.near("linear-law slope", 1.0, cal.fit.slope, 0.05)
    out.truth("intercept negative on lossy line", cal.fit.intercept < 0)
    out.within("implied precompensation -b/k (at least 24)", loss, loss + 1.0, cal.precompensation)
    out.tables["fit"] = Table(("slope", "intercept", "n_points", "precomp_phi0"),
                              [(cal.fit.slope, cal.fit.intercept, cal.fit.n_points, cal.precompensation)])
    return out


def fig_2c(workers=1) -> FigureOutput:
    out = FigureOutput("2c")
    p, net, model, _ = _table1()
    rows = qubitmap.census(p, net, model)
    out.tables["census"] = Table(("n", "squid_phi_phi0", "qubit_flux_phi0", "f01_GHz"),
                                 [(r.n, r.squid_flux, r.qubit_flux, r.f01) for r in rows])
    out.near("well count", 363, len(rows), 0)
    out.near("per-well qubit flux step", 0.0034, net.flux_step, 0.03 * 0.0034)
    qmax = max(abs(r.qubit_flux) for r in rows)
    out.within("max qubit flux", 0.61, 0.65, qmax)
    out.near("f01 at 0.32 Phi0", 3.7721, qubitmap.f01(0.32, model), 0.01 * 3.7721)
    out.truth("census spans 3.77-5.14 GHz",
              min(r.f01 for r in rows) <= 3.7721 * 1.01 and max(r.f01 for r in rows) >= 5.1387 * 0.99)
    return out


ZLINE = dict(bits=16, fullscale=0.1, noise_p2p=stability.BIASED_POINT[1], duration=3600 * 120.0, period=120.0,
             setpoint=stability.BIASED_POINT[0])
IDLE = dict(ZLINE, noise_p2p=stability.IDLE_POINT[1], setpoint=stability.IDLE_POINT[0])


def measured_offset(model=None) -> float:
    """Qubit flux offset of the stability run, from its measured 4.5904 GHz."""
    model = model or qubitmap.TransmonModel(5.1387)
    return qubitmap.qubit_flux_from_f01(4.5904, model)


def fig_2d(workers=1, seed: int = 0) -> FigureOutput:
    out = FigureOutput("2d")
    offset = measured_offset()
    z = stability.dac_noise_model(**ZLINE, seed=seed)
    rf = stability.dac_noise_model(**IDLE, seed=seed + 1)
    zs = stability.stats(stability.transduce(z, stability.KV_BIASED), offset)
    rs = stability.stats(stability.transduce(rf, stability.KV_IDLE), offset)
    out.tables["zline_trace"] = Table(("t_s", "v_rel_V"), stability.trace_rows(z))
    out.tables["bias_trace"] = Table(("t_s", "v_rel_V"), stability.trace_rows(rf))
    out.tables["stats"] = Table(("scheme", "p2p_uphi0", "std_uphi0", "rsd_ppm"),
                                [("z-line", zs.p2p, zs.std, zs.rsd_ppm), ("rf-bias", rs.p2p, rs.std, rs.rsd_ppm)])
    out.near("flux offset from 4.5904 GHz", 0.206, offset, 0.001)
    out.near("RSD from STD 4.9", 24.5, stability.rsd_ppm(4.9, offset), 0.05 * 24.5)
    out.near("RSD from STD 11.0", 55.0, stability.rsd_ppm(11.0, offset), 0.05 * 55.0)
    out.near("simulated Z-line STD", 11.0, zs.std, 0.2 * 11.0)
    out.truth("idle-source flux noise below Z-line noise", rs.std < zs.std)
    return out


def fig_s1(workers=1) -> FigureOutput:
    out = FigureOutput("s1")
    p, d = fit_from_iv(IvMeasurement(320e-6, 146e-6, 1.85), 1.18e-9)
    q = 4 * 320 / (math.pi * 146)
    out.tables["iv_fit"] = Table(("Q", "C_pF", "beta", "beta_c", "damping_ratio"),
                                 [(q, p.C / 1e-12, d.beta, d.beta_c, d.damping_ratio)])
    out.near("quality factor", 2.79, q, 0.01)
    out.near("C (pF)", 2.34, p.C / 1e-12, 0.02 * 2.34)
    out.near("beta", 12.1, d.beta, 0.02 * 12.1)
    out.near("beta_c", 40.1, d.beta_c, 0.02 * 40.1)
    out.truth("underdamped", d.damping_ratio < 1)
    return out


def fig_s2(workers=1) -> FigureOutput:
    out = FigureOutput("s2")
    p, *_ = _table1()
    wells = statics.enumerate_wells(p)
    out.tables["thermal"] = Table(("n", "i", "log10_rate_20mK", "log10_rate_100mK", "log10_lifetime_s"),
                                  thermal.thermal_rows(p, wells=wells))
    f0 = p.derived.omega_p0 / (2 * math.pi) / 1e9
    m20 = thermal.max_rate_over_wells(p, 0.020, wells)
    m100 = thermal.max_rate_over_wells(p, 0.100, wells)
    out.near("plasma frequency (GHz)", 102.6, f0, 0.005 * 102.6)
    out.near("log10 max rate at 20 mK", -284.4, m20.result.log10_rate, 60)
    out.near("log10 max rate at 100 mK", -48.4, m100.result.log10_rate, 12)
    out.truth("max rate at 20 mK below 1e-200", m20.result.log10_rate < -200)
    out.near("arg-max well flux", 180.8, abs(m20.flux), 1.0)
    return out


def fig_s3(workers=1) -> FigureOutput:
    out = FigureOutput("s3")
    p, *_ = _table1()
    base = None
    for off in (0.0, -20.0, 30.0):
        up, down = statics.hysteresis_curve(p, (-250.0, 250.0), points=5001, env_offset=off)
        _hysteresis_tables(out, f"hysteresis_env{off:+g}", up, down)
        jumps = {(a, b): x for x, a, b in up.jumps + down.jumps}
        if base is None:
            base = jumps
            continue
        common = base.keys() & jumps.keys()
        shift = max(abs(jumps[k] + off - base[k]) for k in common)
        out.near(f"loop translated by {-off:+g} Phi0", 0.0, shift, 1e-9)
    return out


def fig_s4(workers=1) -> FigureOutput:
    out = FigureOutput("s4")
    rows = []
    for name, (vmean, vp2p, fp2p), kv in (("idle", stability.IDLE_POINT, stability.KV_IDLE),
                                          ("biased", stability.BIASED_POINT, stability.KV_BIASED)):
        trace = stability.VoltageTrace(120.0, np.array([-vp2p / 2, vp2p / 2, 0.0]))
        got = stability.stats(stability.transduce(trace, kv)).p2p
        rows.append((name, vmean, vp2p, kv, got))
        out.near(f"{name} transduction P2P (uPhi0)", fp2p, got, 1e-9)
    curve = stability.KvCurve()
    out.tables["kv"] = Table(("point", "mean_V", "p2p_V", "kv_phi0_per_V", "flux_p2p_uphi0"), rows)
    out.near("kv curve at idle voltage", stability.KV_IDLE, curve(stability.IDLE_POINT[0]), 1e-12)
    return out


def fig_3(workers=1) -> FigureOutput:
    out = FigureOutput("3")
    ns = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 4096, 10000]
    out.tables["cables"] = Table(("n_qubits", "n_couplers", "classical", "tdm", "ratio"), tdm.cable_rows(ns))
    fabric = tdm.build_fabric(64)
    out.tables["truth_table"] = Table(("code", "channel", "kind"),
                                      [(r.code, "" if r.channel is None else r.channel, r.kind) for r in tdm.truth_table(fabric)])
    report = tdm.campaign(fabric)
    out.tables["campaign"] = Table(tuple(report.to_record()), [tuple(report.to_record().values())])
    out.near("classical cables (64 qubits)", 192, tdm.cable_count(64)[0], 0)
    out.near("tdm cables (64 qubits)", 9, tdm.cable_count(64)[1], 0)
    out.near("unused codes (192 channels)", 64, fabric.n_unused, 0)
    out.truth("each of 192 channels delivered exactly once", report.all_once)
    c, t = tdm.cable_count(10_000)
    out.near("classical/tdm ratio at 1e4 qubits", 1875.0, c / t, 1e-9)
    return out


REPRODUCERS = {
    "1c": fig_1c, "1d": fig_1d, "1e": fig_1e, "1f": fig_1f,
    "2a": fig_2a, "2b": fig_2b, "2c": fig_2c, "2d": fig_2d,
    "s1": fig_s1, "s2": fig_s2, "s3": fig_s3, "s4": fig_s4, "3": fig_3,
}


def reproduce(tag: str, workers: int = 1, seed: int = 0) -> FigureOutput:
    try:
        fn = REPRODUCERS[tag]
    except KeyError:
        raise KeyError(f"unknown figure tag {tag!r}; choose from {', '.join(TAGS)}") from None
    if fn is fig_2d:
        return fn(workers, seed=seed)
    return fn(workers)
