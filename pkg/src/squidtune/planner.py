"""Pulse-sequence planning between metastable wells.

Amplitude windows use the threshold offset w = beta_e / 2 pi + 1/4.  A
positive pulse whose amplitude lies in [m - 1 + w, m + w) releases the
state into well m; a negative pulse in (m - w, m + 1 - w] releases it into
well m from above.  A critically or overdamped SQUID stops right there.  An
underdamped one overshoots: the first supra-threshold transition spans
``basic_transition`` wells instead of one, and every further Phi_0 of
amplitude adds one well.

Commanded amplitudes are ``raw + sign * precomp - env_offset``: the
environmental flux adds to whatever is sent, and precompensation raises
the magnitude to make up for line loss.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .core import SquidParams, classify_damping
from .dynamics import (
    DEFAULT_DURATION_TAU,
    DEFAULT_RISE_TAU,
    FluxPulse,
    IntegratorControls,
    LinearFit,
    LossyLine,
    SettleCriteria,
    TransitionResult,
    critical_amplitude,
    fit_line,
    pulse_transition,
)
from .errors import InvalidParameterError, PlanningError, UncalibratedError, WellIndexError, WrongDampingError
from .statics import census_limit, threshold_offset_approx

SINGLE = "single-pulse"
TWO_PULSE = "two-pulse-underdamped"
MULTI_PULSE = "multi-pulse-underdamped"
MAX_PULSES = 5


@dataclass(frozen=True)
class PlanConfig:
    env_offset: float = 0.0  # Phi_0
    precomp: float = 0.0  # Phi_0
    basic_transition: float | None = None  # Phi_0, positive pulses
    basic_transition_minus: float | None = None  # Phi_0, negative pulses; defaults to the positive value
    duration_tau: float = DEFAULT_DURATION_TAU
    rise_tau: float = DEFAULT_RISE_TAU

    def __post_init__(self):
        if not (math.isfinite(self.precomp) and self.precomp >= 0):
            raise InvalidParameterError(f"precomp must be >= 0, got {self.precomp}")
        if not math.isfinite(self.env_offset):
            raise InvalidParameterError("env_offset must be finite")

    def jump(self, sign: int) -> int:
        """Wells crossed by a just-supra-threshold pulse of the given polarity."""
        value = self.basic_transition
        if sign < 0 and self.basic_transition_minus is not None:
            value = self.basic_transition_minus
        if value is None or round(abs(value)) < 1:
            raise UncalibratedError("underdamped planning needs a calibrated, nonzero basic transition")
        return round(abs(value))

    def commanded(self, raw: float) -> float:
        return raw + math.copysign(self.precomp, raw) - self.env_offset

    def device_referred(self, commanded: float) -> float:
        """Inverse of ``commanded`` (for a nonzero raw amplitude)."""
        raw = commanded + self.env_offset
        return raw - math.copysign(self.precomp, raw)


@dataclass(frozen=True)
class PlannedPulse:
    amplitude: float  # commanded, Phi_0
    raw: float  # device-referred, Phi_0
    window: tuple[float, float]  # raw amplitude window
    closed_low: bool  # True: [lo, hi); False: (lo, hi]
    predicted_well: int

    @property
    def sign(self) -> int:
        return 1 if self.raw > 0 else -1

    def in_window(self, raw: float | None = None) -> bool:
        a = self.raw if raw is None else raw
        lo, hi = self.window
        return (lo <= a < hi) if self.closed_low else (lo < a <= hi)


@dataclass
class PulsePlan:
    strategy: str
    n_i: int
    n_f: int
    pulses: list[PlannedPulse] = field(default_factory=list)
    duration_tau: float = DEFAULT_DURATION_TAU
    rise_tau: float = DEFAULT_RISE_TAU

    @property
    def amplitudes(self) -> list[float]:
        return [p.amplitude for p in self.pulses]

    @property
    def predicted_wells(self) -> list[int]:
        return [p.predicted_well for p in self.pulses]

    def __len__(self):
        return len(self.pulses)

    def to_record(self, tau0: float) -> dict:
        """JSON-ready record; pulse timing is converted to ns with ``tau0`` (s)."""
        return {
            "strategy": self.strategy,
            "n_i": self.n_i,
            "n_f": self.n_f,
            "pulses": [
                {
                    "amplitude_phi0": p.amplitude,
                    "duration_ns": self.duration_tau * tau0 * 1e9,
                    "rise_ns": self.rise_tau * tau0 * 1e9,
                }
                for p in self.pulses
            ],
            "predicted_wells": self.predicted_wells,
        }

    @classmethod
    def from_record(cls, record: dict, tau0: float, cfg: PlanConfig | None = None) -> "PulsePlan":
        """Rebuild an executable plan; windows are not serialised and are left empty."""
        cfg = cfg or PlanConfig()
        try:
            pulses_in = record["pulses"]
            wells = record.get("predicted_wells") or [record["n_f"]] * len(pulses_in)
            pulses = [
                PlannedPulse(float(p["amplitude_phi0"]), cfg.device_referred(float(p["amplitude_phi0"])),
                             (math.nan, math.nan), True, int(w))
                for p, w in zip(pulses_in, wells)
            ]
            duration = pulses_in[0]["duration_ns"] * 1e-9 / tau0 if pulses_in else DEFAULT_DURATION_TAU
            rise = pulses_in[0]["rise_ns"] * 1e-9 / tau0 if pulses_in else DEFAULT_RISE_TAU
            return cls(str(record["strategy"]), int(record["n_i"]), int(record["n_f"]), pulses, duration, rise)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParameterError(f"malformed plan record: {exc}") from None


def _check_range(params, *indices):
    limit = census_limit(params)
    for n in indices:
        if abs(n) > limit:
            raise WellIndexError(f"well index {n} outside the addressable range |n| <= {limit}")


def _pulse_to(n_from: int, target: int, sign: int, jump: int, w: float, cfg: PlanConfig) -> PlannedPulse:
    """Pulse that moves the state from ``n_from`` to ``target`` given the per-pulse jump."""
    if sign > 0:
        m = target - (jump - 1)  # well released into
        if m < n_from + 1:
            raise PlanningError(f"target {target} is closer than one jump above {n_from}")
        lo, hi, closed_low = m - 1 + w, m + w, True
    else:
        m = target + (jump - 1)
        if m > n_from - 1:
            raise PlanningError(f"target {target} is closer than one jump below {n_from}")
        lo, hi, closed_low = m - w, m + 1 - w, False
    raw = 0.5 * (lo + hi)
    return PlannedPulse(cfg.commanded(raw), raw, (lo, hi), closed_low, target)


def plan_overdamped(n_i: int, n_f: int, params: SquidParams, cfg: PlanConfig | None = None) -> PulsePlan:
    """Single pulse at the centre of the landing window of ``n_f``."""
    cfg = cfg or PlanConfig()
    damping = classify_damping(params)
    if damping.underdamped:
        raise WrongDampingError(f"single-pulse planning needs beta/beta_c >= 1, got {damping.ratio:.3f}")
    _check_range(params, n_i, n_f)
    plan = PulsePlan(SINGLE, n_i, n_f, duration_tau=cfg.duration_tau, rise_tau=cfg.rise_tau)
    if n_f != n_i:
        sign = 1 if n_f > n_i else -1
        plan.pulses.append(_pulse_to(n_i, n_f, sign, 1, threshold_offset_approx(params.beta_e), cfg))
    return plan


def _reachable(n: int, jp: int, jm: int, limit: int):
    yield from ((t, +1) for t in range(n + jp, limit + 1))
    yield from ((t, -1) for t in range(n - jm, -limit - 1, -1))


def _search(n_i: int, n_f: int, jp: int, jm: int, limit: int, max_pulses: int):
    """Breadth-first search over wells for the shortest pulse sequence."""
    prev = {n_i: None}
    queue = deque([(n_i, 0)])
    while queue:
        n, depth = queue.popleft()
        if depth == max_pulses:
            continue
        for t, sign in _reachable(n, jp, jm, limit):
            if t in prev:
                continue
            prev[t] = (n, sign)
            if t == n_f:
                steps = []
                while prev[t] is not None:
                    src, s = prev[t]
                    steps.append((src, t, s))
                    t = src
                return steps[::-1]
            queue.append((t, depth + 1))
    return None


def plan_underdamped(n_i: int, n_f: int, params: SquidParams, cfg: PlanConfig) -> PulsePlan:
    """Two-pulse plan for an underdamped SQUID.

    The first pulse moves away from the target by one basic transition
    (to n_r = n_i -/+ jump); the second, of opposite polarity, uses the
    linear transition law to land on ``n_f``.  When an intermediate well
    would fall outside the addressable range the other ordering is tried,
    then a breadth-first search over sequences of up to five pulses.
    """
    damping = classify_damping(params)
    if not damping.underdamped:
        raise WrongDampingError(f"two-pulse planning needs beta/beta_c < 1, got {damping.ratio:.3f}")
    _check_range(params, n_i, n_f)
    plan = PulsePlan(TWO_PULSE, n_i, n_f, duration_tau=cfg.duration_tau, rise_tau=cfg.rise_tau)
    if n_f == n_i:
        return plan
    jp, jm = cfg.jump(+1), cfg.jump(-1)
    limit = census_limit(params)
    w = threshold_offset_approx(params.beta_e)
    up = n_f > n_i
    orderings = [(-1, +1), (+1, -1)] if up else [(+1, -1), (-1, +1)]
    for first, second in orderings:
        n_r = n_i - jm if first < 0 else n_i + jp
        if abs(n_r) > limit:
            continue
        if second > 0 and n_f - n_r < jp or second < 0 and n_r - n_f < jm:
            continue
        plan.pulses = [
            _pulse_to(n_i, n_r, first, jm if first < 0 else jp, w, cfg),
            _pulse_to(n_r, n_f, second, jp if second > 0 else jm, w, cfg),
        ]
        return plan
    steps = _search(n_i, n_f, jp, jm, limit, MAX_PULSES)
    if steps is None:
        raise PlanningError(f"no sequence of <= {MAX_PULSES} pulses reaches well {n_f} from {n_i}")
    plan.pulses = [_pulse_to(src, dst, s, jp if s > 0 else jm, w, cfg) for src, dst, s in steps]
    plan.strategy = {1: SINGLE, 2: TWO_PULSE}.get(len(steps), MULTI_PULSE)
    return plan


def plan(n_i: int, n_f: int, params: SquidParams, cfg: PlanConfig | None = None) -> PulsePlan:
    """Dispatch on the damping class."""
    cfg = cfg or PlanConfig()
    if classify_damping(params).underdamped:
        return plan_underdamped(n_i, n_f, params, cfg)
    return plan_overdamped(n_i, n_f, params, cfg)


@dataclass
class Verification:
    ok: bool
    achieved: int
    wells: list[int]
    transitions: list[TransitionResult]


def verify_plan(plan: PulsePlan, params: SquidParams, cfg: PlanConfig | None = None, *,
                line: LossyLine | None = None, controls: IntegratorControls | None = None,
                settle: SettleCriteria | None = None) -> Verification:
    """Execute a plan pulse by pulse through the RCSJ dynamics.

    The device sees ``line.deliver(commanded) + env_offset`` during each
    pulse.  Succeeds iff every transition settles and the last well is n_f.
    """
    cfg = cfg or PlanConfig()
    n = plan.n_i
    wells, transitions = [], []
    for p in plan.pulses:
        delivered = p.amplitude if line is None else line.deliver(p.amplitude)
        pulse = FluxPulse.in_tau(delivered + cfg.env_offset, params.tau0, plan.duration_tau, plan.rise_tau)
        result = pulse_transition(params, n, pulse, controls=controls, settle=settle)
        transitions.append(result)
        wells.append(result.final)
        n = result.final
        if not result.settled:
            return Verification(False, n, wells, transitions)
    return Verification(n == plan.n_f, n, wells, transitions)


@dataclass
class Calibration:
    basic_transition: float  # Phi_0; 0 when the probe did not switch
    calibrated: bool
    fit: LinearFit | None  # (delta_phi - delta_phi_first) vs (amplitude - critical amplitude)
    critical_amplitude: float
    transitions: list[TransitionResult]

    @property
    def precompensation(self) -> float | None:
        """Extra amplitude implied by a negative intercept: -b / k."""
        if self.fit is None:
            return None
        return max(0.0, -self.fit.intercept / self.fit.slope)


def calibrate_basic_transition(params: SquidParams, probe_well: int = 0, *, epsilon: float = 0.05,
                               offsets=(0.0, 2.0, 4.0, 6.0, 8.0, 10.0), line: LossyLine | None = None,
                               duration_tau: float = DEFAULT_DURATION_TAU, rise_tau: float = DEFAULT_RISE_TAU,
                               controls: IntegratorControls | None = None,
                               settle: SettleCriteria | None = None) -> Calibration:
    """Measure the underdamped basic transition and the linear transition law.

    A probe pulse just above the predicted critical amplitude of
    ``probe_well`` gives the basic transition.  A short sweep at
    ``critical + epsilon + offsets`` is then fitted as

        delta_phi - delta_phi_first = k (amplitude - critical) + b

    over the points that switched, where ``delta_phi_first`` belongs to the
    first switching point.  With a lossy line the first switch happens late
    and b comes out negative.
    """
    damping = classify_damping(params)
    if not damping.underdamped:
        raise WrongDampingError(f"basic-transition calibration needs beta/beta_c < 1, got {damping.ratio:.3f}")
    a_c = critical_amplitude(params, probe_well, +1)

    def run(amplitude):
        pulse = FluxPulse.in_tau(amplitude, params.tau0, duration_tau, rise_tau)
        return pulse_transition(params, probe_well, pulse, line=line, controls=controls, settle=settle)

    probe = run(a_c + epsilon)
    switched = probe.settled and probe.final != probe.initial
    delta_b = probe.delta_phi if switched else 0.0
    transitions = [probe] + [run(a_c + epsilon + off) for off in offsets]
    moved = [t for t in transitions[1:] if t.settled and t.final != t.initial]
    fit = None
    if len(moved) >= 2:
        base = moved[0].delta_phi
        fit = fit_line([t.amplitude - a_c for t in moved], [t.delta_phi - base for t in moved])
    return Calibration(delta_b, switched, fit, a_c, transitions)
