"""Command-line interface: ``squidtune <subcommand> [options]``.

Exit status is 0 on success, 2 for usage and parameter errors and 1 for
computational failures (including failed reproduction checks and plans
that do not verify).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import dynamics, figures, planner, qubitmap, stability, statics, tdm, thermal
from .config import (
    default_config,
    env_offset_from_config,
    load_config,
    network_from_config,
    squid_from_config,
    transmon_from_config,
)
from .core import IvMeasurement, classify_damping, fig1e_params, fit_from_iv
from .errors import (
    ConfigError,
    InvalidParameterError,
    OutOfModelError,
    SquidError,
    WellIndexError,
    WrongDampingError,
)

log = logging.getLogger("squidtune")

USAGE_ERRORS = (ConfigError, InvalidParameterError, WellIndexError, WrongDampingError, OutOfModelError)


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------------
# output


def _clean(value):
    """JSON-safe scalar: NaN and inf become null, numpy scalars become Python."""
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in (_clean(x) for x in row)])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


class Emitter:
    """Writes named outputs either into ``--out`` or to stdout."""

    def __init__(self, out: str | None, fmt: str, stdout=None):
        self.out = Path(out) if out else None
        self.fmt = fmt
        self.stdout = stdout or sys.stdout
        self.written: list[Path] = []

    def _write(self, name: str, text: str, ext: str):
        if self.out is None:
            self.stdout.write(text)
            return
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / f"{name}.{ext}"
        path.write_text(text)
        self.written.append(path)

    def table(self, name: str, header, rows):
        rows = list(rows)
        if self.fmt == "json":
            self._write(name, _json_text([dict(zip(header, r)) for r in rows]), "json")
        else:
            self._write(name, _csv_text(header, rows), "csv")

    def record(self, name: str, record):
        """A record (dict) or list of records."""
        if self.fmt == "json":
            self._write(name, _json_text(record), "json")
            return
        records = record if isinstance(record, list) else [record]
        header = list(records[0]) if records else []
        rows = [[json.dumps(_clean(v)) if isinstance(v, (list, dict)) else v for v in r.values()] for r in records]
        self._write(name, _csv_text(header, rows), "csv")


# ----------------------------------------------------------------------------
# helpers


def _load(args) -> dict:
    if args.config is None:
        return default_config()
    return load_config(args.config)


def _squid(args):
    return squid_from_config(_load(args))


def _workers(args) -> int:
    return max(1, args.threads or os.cpu_count() or 1)


def _plan_config(args, values, params) -> planner.PlanConfig:
    if args.env_offset is not None:
        env = args.env_offset
    else:
        env = 0.0 if args.fig1e else env_offset_from_config(values)
    basic = args.basic_transition
    if basic is None and classify_damping(params).underdamped:
        cal = planner.calibrate_basic_transition(params, args.probe_well, offsets=(0.0, 2.0))
        basic = cal.basic_transition
        log.info("calibrated basic transition %.6f Phi0 at well %d", basic, args.probe_well)
    return planner.PlanConfig(env_offset=env, precomp=args.precomp, basic_transition=basic,
                              basic_transition_minus=args.basic_transition_minus)


# ----------------------------------------------------------------------------
# subcommands


def cmd_derive(args, em: Emitter) -> int:
    values = _load(args)
    if args.ir_uA is not None:
        squid_from_config(values)  # still validates presence of every SQUID key
        iv = IvMeasurement(values["ic_uA"] * 1e-6, args.ir_uA * 1e-6, values["r_ohm"])
        p, d = fit_from_iv(iv, values["l_nH"] * 1e-9)
    else:
        p = squid_from_config(values)
        d = p.derived
    damping = classify_damping(d)
    em.record("derive", {
        "ic_A": p.Ic, "l_H": p.L, "c_F": p.C, "r_ohm": p.R,
        "beta_e": d.beta_e, "beta": d.beta, "beta_c": d.beta_c,
        "omega_p0_rad_s": d.omega_p0, "tau0_s": d.tau0,
        "damping_ratio": damping.ratio, "damping": damping.kind.value,
        "max_well_index": statics.max_well_index(d.beta_e), "census_count": statics.census_count(d.beta_e),
    })
    return 0


def cmd_wells(args, em: Emitter) -> int:
    p = _squid(args)
    wells = statics.enumerate_wells(p, args.xe, include_edge=args.include_edge)
    em.table("wells", ("n", "phi_phi0", "current_uA", "depth_ej"), statics.well_rows(wells))
    return 0


def cmd_hysteresis(args, em: Emitter) -> int:
    p = _squid(args)
    policy = statics.adjacent_jump if args.policy == "adjacent" else dynamics.dynamic_jump_policy(p)
    up, down = statics.hysteresis_curve(p, tuple(args.range), points=args.points, env_offset=args.env_offset,
                                        jump_policy=policy)
    em.table("hysteresis", ("phi_e_phi0", "phi_phi0", "branch"), statics.hysteresis_rows(up, down))
    return 0


def _sweep_params(args):
    if args.fig1e:
        return fig1e_params(1.0 if args.ratio is None else args.ratio, quoted_resistance=args.quoted_r)
    if args.ratio is not None:
        raise UsageError("--ratio requires --fig1e")
    return _squid(args)


def cmd_simulate(args, em: Emitter) -> int:
    p = _sweep_params(args)
    pulse = dynamics.FluxPulse.in_tau(args.amplitude, p.tau0, args.duration_tau, args.rise_tau)
    r = dynamics.pulse_transition(p, args.start_well, pulse, keep_trajectory=True)
    em.table("trajectory", ("tau", "x_phi0", "dxdtau", "xe_phi0"), r.trajectory.rows())
    em.record("transition", {"initial": r.initial, "final": r.final, "delta_phi_phi0": r.delta_phi,
                             "settled": r.settled, "amplitude_phi0": r.amplitude})
    return 0


def cmd_sweep(args, em: Emitter) -> int:
    p = _sweep_params(args)
    if args.amplitudes:
        amps = args.amplitudes
    else:
        amps = dynamics.fig1f_amplitudes(p, range(args.n_min + args.start_well, args.n_max + args.start_well + 1))
    sweep = dynamics.transition_sweep(p, args.start_well, amps, duration=args.duration_tau, rise=args.rise_tau,
                                      workers=_workers(args))
    em.table("sweep", ("amplitude_phi0", "delta_phi_phi0", "final_n", "settled"), sweep.rows())
    em.record("sweep_fit", {"slope": sweep.slope, "intercept": sweep.intercept, "n_points": sweep.fit.n_points,
                            "damping_ratio": p.damping_ratio})
    return 0


def cmd_plan(args, em: Emitter) -> int:
    values = _load(args)
    p = _sweep_params(args) if args.fig1e else squid_from_config(values)
    cfg = _plan_config(args, values, p)
    cfg = planner.PlanConfig(cfg.env_offset, cfg.precomp, cfg.basic_transition, cfg.basic_transition_minus,
                             args.duration_tau, args.rise_tau)
    plan = planner.plan(args.n_i, args.n_f, p, cfg)
    record = plan.to_record(p.tau0)
    record["config"] = {"env_offset_phi0": cfg.env_offset, "precomp_phi0": cfg.precomp,
                        "basic_transition_phi0": cfg.basic_transition}
    if em.fmt == "json":
        em.record("plan", record)
    else:
        em.table("plan", ("index", "amplitude_phi0", "duration_ns", "rise_ns", "predicted_well"),
                 [(i, q["amplitude_phi0"], q["duration_ns"], q["rise_ns"], w)
                  for i, (q, w) in enumerate(zip(record["pulses"], record["predicted_wells"]))])
    return 0


def cmd_verify(args, em: Emitter) -> int:
    values = _load(args)
    p = _sweep_params(args) if args.fig1e else squid_from_config(values)
    try:
        record = json.loads(Path(args.plan).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read plan {args.plan!r}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"plan {args.plan!r} is not valid JSON: {exc}") from None
    conf = record.get("config", {})
    env = args.env_offset if args.env_offset is not None else conf.get("env_offset_phi0", 0.0)
    precomp = conf.get("precomp_phi0", 0.0) if args.precomp == 0.0 else args.precomp
    cfg = planner.PlanConfig(env_offset=env, precomp=precomp)
    plan = planner.PulsePlan.from_record(record, p.tau0, cfg)
    line = dynamics.LossyLine(args.attenuation, args.loss) if (args.loss or args.attenuation != 1.0) else None
    result = planner.verify_plan(plan, p, cfg, line=line)
    em.record("verify", {"ok": result.ok, "n_i": plan.n_i, "n_f": plan.n_f, "achieved": result.achieved,
                         "wells": result.wells})
    return 0 if result.ok else 1


def cmd_qubit_census(args, em: Emitter) -> int:
    values = _load(args)
    p = squid_from_config(values)
    net = network_from_config(values)
    model = transmon_from_config(values, Ec=args.ec)
    rows = qubitmap.census(p, net, model, include_edge=args.include_edge)
    if args.infer is not None:
        s = qubitmap.infer_squid_state(args.infer, model, net, p, sign=args.sign, wells=rows)
        em.record("inference", {"f01_GHz": args.infer, "n": s.n, "squid_flux_phi0": s.squid_flux,
                                "qubit_flux_phi0": s.qubit_flux, "well_flux_phi0": s.well_flux,
                                "residual_GHz": s.residual})
        return 0
    em.table("census", ("n", "squid_phi_phi0", "qubit_flux_phi0", "f01_GHz"),
             [(r.n, r.squid_flux, r.qubit_flux, r.f01) for r in rows])
    return 0


def cmd_thermal(args, em: Emitter) -> int:
    p = _squid(args)
    wells = statics.enumerate_wells(p)
    em.table("thermal", ("n", "i", "log10_rate_20mK", "log10_rate_100mK", "log10_lifetime_s"),
             thermal.thermal_rows(p, wells=wells))
    if args.max:
        recs = []
        for T in (0.020, 0.100):
            m = thermal.max_rate_over_wells(p, T, wells)
            recs.append({"T_K": T, "n": m.n, "flux_phi0": m.flux, "i": m.i, "log10_rate": m.result.log10_rate,
                         "log10_lifetime_s": thermal.lifetime(m.result), "status": m.result.status})
        em.record("thermal_max", recs)
    return 0


def cmd_stability(args, em: Emitter) -> int:
    if args.trace:
        try:
            trace = stability.read_trace_csv(Path(args.trace))
        except OSError as exc:
            raise UsageError(f"cannot read trace {args.trace!r}: {exc.strerror or exc}") from None
    else:
        trace = stability.dac_noise_model(args.bits, args.fullscale, args.noise_p2p, args.samples * args.period,
                                          args.period, setpoint=args.setpoint, seed=args.seed)
        em.table("trace", ("t_s", "v_rel_V"), stability.trace_rows(trace))
    kv = args.kv if args.kv is not None else stability.KvCurve()(args.setpoint)
    offset = args.offset if args.offset is not None else figures.measured_offset()
    s = stability.stats(stability.transduce(trace, kv), offset)
    record = s.to_record()
    record.update({"kv_phi0_per_V": kv, "offset_phi0": offset})
    em.record("stats", record)
    return 0


def cmd_tdm(args, em: Emitter) -> int:
    fabric = tdm.build_fabric(args.qubits, args.couplers)
    em.table("truth_table", ("code", "channel", "kind"),
             [(r.code, "" if r.channel is None else r.channel, r.kind) for r in tdm.truth_table(fabric)])
    classical, cables = tdm.cable_count(fabric.n_qubits, fabric.n_couplers)
    report = tdm.campaign(fabric).to_record()
    report.update({"classical_cables": classical, "depth": fabric.depth, "unused_codes": fabric.n_unused})
    em.record("campaign", report)
    return 0 if report["all_once"] else 1


def cmd_reproduce(args, em: Emitter) -> int:
    tags = figures.TAGS if args.tag == "all" else (args.tag,)
    failed = 0
    for tag in tags:
        fig = figures.reproduce(tag, workers=_workers(args), seed=args.seed)
        sub = Emitter(str(Path(args.out) / f"fig{tag}"), em.fmt)
        for name, table in fig.tables.items():
            sub.table(name, table.header, table.rows)
        sub.record("summary", [c.to_record() for c in fig.checks])
        for c in fig.checks:
            print(f"[{'PASS' if c.passed else 'FAIL'}] {tag}: {c.check}", file=sys.stderr)
        failed += not fig.passed
    return 1 if failed else 0


# ----------------------------------------------------------------------------
# parser


def _common(sp, config=True):
    if config:
        sp.add_argument("--config", help="parameter file (default: the shipped table1.cfg)")
    sp.add_argument("--out", help="output directory (default: write to stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")


def _fig1e_opts(sp):
    sp.add_argument("--fig1e", action="store_true", help="use the 100 uA / 1 nH / 2 pF simulation example")
    sp.add_argument("--ratio", type=float, default=None, help="damping ratio beta/beta_c (with --fig1e)")
    sp.add_argument("--quoted-r", action="store_true", help="use the rounded shunt resistance listed for the ratio")


def _pulse_opts(sp):
    sp.add_argument("--duration-tau", type=float, default=dynamics.DEFAULT_DURATION_TAU)
    sp.add_argument("--rise-tau", type=float, default=dynamics.DEFAULT_RISE_TAU)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="squidtune", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, metavar="subcommand")

    sp = sub.add_parser("derive", help="derived dimensionless parameters")
    _common(sp)
    sp.add_argument("--ir-uA", type=float, default=None, help="retrapping current; fit C from the I-V curve")
    sp.set_defaults(func=cmd_derive)

    sp = sub.add_parser("wells", help="metastable well census")
    _common(sp)
    sp.add_argument("--xe", type=float, default=0.0, help="applied flux, Phi0")
    sp.add_argument("--include-edge", action="store_true", help="keep the outermost shallow pair")
    sp.set_defaults(func=cmd_wells)

    sp = sub.add_parser("hysteresis", help="quasi-static up/down flux sweep")
    _common(sp)
    sp.add_argument("--range", type=float, nargs=2, default=(-250.0, 250.0), metavar=("LO", "HI"))
    sp.add_argument("--points", type=int, default=2001)
    sp.add_argument("--env-offset", type=float, default=0.0)
    sp.add_argument("--policy", choices=("adjacent", "dynamic"), default="adjacent")
    sp.set_defaults(func=cmd_hysteresis)

    sp = sub.add_parser("simulate", help="integrate one pulse transition")
    _common(sp)
    _fig1e_opts(sp)
    _pulse_opts(sp)
    sp.add_argument("--amplitude", type=float, required=True, help="pulse amplitude, Phi0")
    sp.add_argument("--start-well", type=int, default=0)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="transition sweep with linear fit")
    _common(sp)
    _fig1e_opts(sp)
    _pulse_opts(sp)
    sp.add_argument("--start-well", type=int, default=0)
    sp.add_argument("--amplitudes", type=float, nargs="+", default=None)
    sp.add_argument("--n-min", type=int, default=1, help="amplitudes (beta_e/2pi + n), n from n-min")
    sp.add_argument("--n-max", type=int, default=10)
    sp.set_defaults(func=cmd_sweep)

    for name, func, text in (("plan", cmd_plan, "plan a pulse sequence"), ("verify", cmd_verify, "verify a plan")):
        sp = sub.add_parser(name, help=text)
        _common(sp)
        _fig1e_opts(sp)
        sp.add_argument("--env-offset", type=float, default=None, help="default: env_flux_phi0 from the config")
        sp.add_argument("--precomp", type=float, default=0.0)
        if name == "plan":
            _pulse_opts(sp)
            sp.add_argument("n_i", type=int)
            sp.add_argument("n_f", type=int)
            sp.add_argument("--basic-transition", type=float, default=None, help="default: calibrate by simulation")
            sp.add_argument("--basic-transition-minus", type=float, default=None)
            sp.add_argument("--probe-well", type=int, default=0)
        else:
            sp.add_argument("plan", help="plan JSON written by 'plan --format json'")
            sp.add_argument("--loss", type=float, default=0.0, help="emulated line loss, Phi0")
            sp.add_argument("--attenuation", type=float, default=1.0)
        sp.set_defaults(func=func)

    sp = sub.add_parser("qubit-census", help="wells mapped to qubit flux and f01")
    _common(sp)
    sp.add_argument("--ec", type=float, default=0.0, help="charging energy, GHz")
    sp.add_argument("--include-edge", action="store_true")
    sp.add_argument("--infer", type=float, default=None, metavar="F01_GHZ", help="infer the well from a frequency")
    sp.add_argument("--sign", type=int, choices=(1, -1), default=1)
    sp.set_defaults(func=cmd_qubit_census)

    sp = sub.add_parser("thermal", help="thermal escape rates per well")
    _common(sp)
    sp.add_argument("--max", action="store_true", help="also emit the maximum-rate well at 20 and 100 mK")
    sp.set_defaults(func=cmd_thermal)

    sp = sub.add_parser("stability", help="flux-noise statistics from a voltage trace")
    _common(sp, config=False)
    sp.add_argument("--trace", help="CSV with header t_s,v_rel_V (default: synthesize a DAC trace)")
    sp.add_argument("--kv", type=float, default=None, help="Phi0/V (default: interpolated at --setpoint)")
    sp.add_argument("--offset", type=float, default=None, help="mean qubit flux offset, Phi0")
    sp.add_argument("--bits", type=int, default=16)
    sp.add_argument("--fullscale", type=float, default=0.1, help="DAC span, V")
    sp.add_argument("--noise-p2p", type=float, default=stability.BIASED_POINT[1], help="V")
    sp.add_argument("--setpoint", type=float, default=stability.BIASED_POINT[0], help="mean output, V")
    sp.add_argument("--samples", type=int, default=3600)
    sp.add_argument("--period", type=float, default=120.0, help="s")
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("tdm", help="switch-tree truth table and routing campaign")
    _common(sp, config=False)
    sp.add_argument("--qubits", type=int, default=64)
    sp.add_argument("--couplers", type=int, default=None, help="default: 2 per qubit")
    sp.set_defaults(func=cmd_tdm)

    sp = sub.add_parser("reproduce", help="regenerate one figure's data, or 'all'")
    _common(sp, config=False)
    sp.add_argument("tag", choices=figures.TAGS + ("all",))
    sp.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    if args.command == "reproduce" and args.out is None:
        args.out = "figures"
    em = Emitter(args.out, args.format)
    try:
        return args.func(args, em)
    except UsageError as exc:
        print(f"squidtune {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"squidtune {args.command}: config error: {exc}", file=sys.stderr)
        return 2
    except USAGE_ERRORS as exc:
        print(f"squidtune {args.command}: invalid parameter: {exc}", file=sys.stderr)
        return 2
    except SquidError as exc:
        print(f"squidtune {args.command}: computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
