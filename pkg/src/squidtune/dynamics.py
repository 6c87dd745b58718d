"""Pulse-driven RCSJ dynamics of the rf-SQUID loop.

In the dimensionless time tau = t / sqrt(LC) the loop flux x = Phi/Phi_0
obeys

    x'' = -beta x' - (beta_e / 2 pi) sin(2 pi x) + (xe(tau) - x)

which is integrated with an adaptive explicit Runge-Kutta scheme
(scipy's DOP853, order 8 with dense output).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .core import SquidParams
from .errors import FitUndefinedError, IntegrationDivergedError, InvalidParameterError
from .statics import TWO_PI, potential, stable_indices, threshold_offset, well_flux, _half_width, _solve_branch

DEFAULT_DURATION_TAU = 50.0
DEFAULT_RISE_TAU = 5.0
#: ring-down budget after the pulse before a run is declared unsettled
DEFAULT_RINGDOWN_TAU = 1000.0
_CHUNK_TAU = 25.0


@dataclass(frozen=True)
class FluxPulse:
    """Trapezoidal applied-flux pulse.

    Times are in seconds; ``rise_time`` is the length of each linear edge.
    """

    amplitude: float  # Phi_0
    duration: float
    rise_time: float = 0.0
    start: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.amplitude, self.duration, self.rise_time, self.start)):
            raise InvalidParameterError("pulse fields must be finite")
        if self.duration <= 0:
            raise InvalidParameterError(f"pulse duration must be positive, got {self.duration}")
        if not 0 <= self.rise_time <= self.duration / 2:
            raise InvalidParameterError(f"rise_time must lie in [0, duration/2], got {self.rise_time}")

    @classmethod
    def in_tau(cls, amplitude: float, tau0: float, duration: float = DEFAULT_DURATION_TAU,
               rise: float = DEFAULT_RISE_TAU, start: float = 0.0) -> "FluxPulse":
        """Build a pulse whose timing is given in units of tau0 = sqrt(LC)."""
        return cls(amplitude, duration * tau0, rise * tau0, start * tau0)

    @property
    def end(self) -> float:
        return self.start + self.duration

    def with_amplitude(self, amplitude: float) -> "FluxPulse":
        return FluxPulse(amplitude, self.duration, self.rise_time, self.start)

    def value(self, t: float) -> float:
        return _TauPulse.from_pulse(self, 1.0)(t)


@dataclass(frozen=True)
class _TauPulse:
    amplitude: float
    start: float
    rise: float
    end: float

    @classmethod
    def from_pulse(cls, pulse: FluxPulse, tau0: float) -> "_TauPulse":
        return cls(pulse.amplitude, pulse.start / tau0, pulse.rise_time / tau0, pulse.end / tau0)

    def __call__(self, t: float) -> float:
        if t <= self.start or t >= self.end:
            return 0.0
        if self.rise > 0:
            if t < self.start + self.rise:
                return self.amplitude * (t - self.start) / self.rise
            if t > self.end - self.rise:
                return self.amplitude * (self.end - t) / self.rise
        return self.amplitude

    @property
    def breakpoints(self) -> list[float]:
        return sorted({self.start, self.start + self.rise, self.end - self.rise, self.end})

    @property
    def final_value(self) -> float:
        return 0.0


@dataclass(frozen=True)
class _ConstantDrive:
    level: float

    def __call__(self, t: float) -> float:
        return self.level

    breakpoints: tuple = ()

    @property
    def final_value(self) -> float:
        return self.level


@dataclass(frozen=True)
class LossyLine:
    """Delivery model for the bias line: |A| -> attenuation * |A| - loss."""

    attenuation: float = 1.0
    loss: float = 0.0

    def deliver(self, amplitude: float) -> float:
        magnitude = max(0.0, self.attenuation * abs(amplitude) - self.loss)
        return math.copysign(magnitude, amplitude)


@dataclass(frozen=True)
class IntegratorControls:
    rtol: float = 1e-9
    atol: float = 1e-12
    method: str = "DOP853"
    max_step: float = math.inf


@dataclass(frozen=True)
class SettleCriteria:
    velocity: float = 1e-6  # |dx/dtau|
    position: float = 1e-3  # Phi_0 from the nearest well
    dwell: float = 100.0  # tau units the two conditions must hold


@dataclass
class Trajectory:
    tau: np.ndarray
    x: np.ndarray
    v: np.ndarray
    xe: np.ndarray
    tau0: float

    @property
    def t(self) -> np.ndarray:
        return self.tau * self.tau0

    def energy(self, beta_e: float) -> np.ndarray:
        """Kinetic plus potential energy in the units of the equation of motion."""
        return 0.5 * self.v**2 + beta_e / (4 * math.pi**2) * potential(self.x, self.xe, beta_e)

    def rows(self):
        """Rows for the CSV header ``tau,x_phi0,dxdtau,xe_phi0``."""
        for row in zip(self.tau, self.x, self.v, self.xe):
            yield tuple(float(v) for v in row)


def _rhs(beta: float, k: float, drive):
    sin = math.sin

    def f(t, y):
        x, v = y
        return (v, -beta * v - k * sin(TWO_PI * x) + (drive(t) - x))

    return f


class _Integrator:
    """Piecewise integration that restarts at every kink of the drive."""

    def __init__(self, params: SquidParams, drive, controls: IntegratorControls):
        self.beta = params.beta
        self.beta_e = params.beta_e
        self.drive = drive
        self.controls = controls
        self.f = _rhs(self.beta, self.beta_e / TWO_PI, drive)
        self.tau = []
        self.x = []
        self.v = []

    def run(self, t0: float, t1: float, y0) -> np.ndarray:
        cuts = [t0] + [b for b in self.drive.breakpoints if t0 < b < t1] + [t1]
        y = np.asarray(y0, dtype=float)
        c = self.controls
        for a, b in zip(cuts[:-1], cuts[1:]):
            sol = solve_ivp(self.f, (a, b), y, method=c.method, rtol=c.rtol, atol=c.atol, max_step=c.max_step)
            if sol.status < 0 or not np.all(np.isfinite(sol.y)):
                raise IntegrationDivergedError(f"integration failed on [{a:g}, {b:g}] tau: {sol.message}")
            start = 1 if self.tau else 0
            self.tau.extend(sol.t[start:])
            self.x.extend(sol.y[0, start:])
            self.v.extend(sol.y[1, start:])
            y = sol.y[:, -1]
        return y

    def trajectory(self, tau0: float) -> Trajectory:
        tau = np.asarray(self.tau)
        xe = np.fromiter((self.drive(t) for t in tau), float, len(tau))
        return Trajectory(tau, np.asarray(self.x), np.asarray(self.v), xe, tau0)


def _as_drive(drive, tau0: float):
    if drive is None:
        return _ConstantDrive(0.0)
    if isinstance(drive, FluxPulse):
        return _TauPulse.from_pulse(drive, tau0)
    if isinstance(drive, (int, float)):
        return _ConstantDrive(float(drive))
    raise InvalidParameterError(f"unsupported drive {drive!r}")


def integrate(params: SquidParams, x0: float, v0: float, drive, horizon: float,
              controls: IntegratorControls | None = None) -> Trajectory:
    """Integrate the RCSJ equation from (x0, v0) up to ``horizon`` seconds.

    ``drive`` is a FluxPulse, a constant applied flux, or None for zero bias.
    """
    if not (math.isfinite(horizon) and horizon > 0):
        raise InvalidParameterError(f"horizon must be positive, got {horizon}")
    tau0 = params.tau0
    integ = _Integrator(params, _as_drive(drive, tau0), controls or IntegratorControls())
    integ.run(0.0, horizon / tau0, (x0, v0))
    return integ.trajectory(tau0)


class _WellCache:
    def __init__(self, params, xe: float):
        self.params = params
        self.xe = xe
        self.stable = stable_indices(params.beta_e, xe)
        self._flux = {}

    def flux(self, n: int) -> float:
        if n not in self._flux:
            self._flux[n] = _solve_branch(n, self.xe, self.params.beta_e) if n in self.stable else math.nan
        return self._flux[n]

    def nearest(self, x: float) -> int:
        # stable minima sit within 1/4 of their index at zero bias; near the
        # ends of the stable range check neighbours explicitly
        n0 = round(x)
        best, dist = n0, math.inf
        for n in (n0 - 1, n0, n0 + 1):
            d = abs(x - self.flux(n))
            if d < dist:
                best, dist = n, d
        return best

    def distance(self, x: float) -> float:
        d = abs(x - self.flux(self.nearest(x)))
        return math.inf if math.isnan(d) else d


@dataclass
class _SettleOutcome:
    settled: bool
    final_n: int
    x: float
    v: float
    tau_settled: float | None


def _ring_down(integ: _Integrator, t: float, y, wells: _WellCache, settle: SettleCriteria,
               t_max: float) -> _SettleOutcome:
    since = None
    while True:
        t_next = min(t + _CHUNK_TAU, t_max)
        first = len(integ.tau)
        y = integ.run(t, t_next, y)
        for tau_k, x_k, v_k in zip(integ.tau[first:], integ.x[first:], integ.v[first:]):
            ok = abs(v_k) < settle.velocity and wells.distance(x_k) < settle.position
            if ok:
                if since is None:
                    since = tau_k
            else:
                since = None
        t = t_next
        if since is not None and t - since >= settle.dwell:
            return _SettleOutcome(True, wells.nearest(y[0]), y[0], y[1], since)
        if t >= t_max:
            return _SettleOutcome(False, wells.nearest(y[0]), y[0], y[1], None)


@dataclass
class TransitionResult:
    initial: int
    final: int
    delta_phi: float  # Phi_0
    settled: bool
    amplitude: float  # commanded Phi_0
    trajectory: Trajectory | None = field(default=None, repr=False)

    @property
    def delta_n(self) -> int:
        return self.final - self.initial


def pulse_transition(params: SquidParams, start_well: int, pulse: FluxPulse, *,
                     controls: IntegratorControls | None = None, settle: SettleCriteria | None = None,
                     ringdown: float = DEFAULT_RINGDOWN_TAU, line: LossyLine | None = None,
                     keep_trajectory: bool = False) -> TransitionResult:
    """Apply one pulse to a SQUID resting in ``start_well`` and classify the outcome.

    The state is prepared at the exact zero-bias well flux.  After the pulse
    the run continues until the velocity and the distance to the nearest
    well stay below the settle thresholds for ``settle.dwell`` tau, or until
    ``ringdown`` tau have passed (then ``settled`` is False).

    ``delta_phi`` is the difference of exact well fluxes when settled, and of
    the raw end points otherwise.
    """
    settle = settle or SettleCriteria()
    controls = controls or IntegratorControls()
    x0 = well_flux(start_well, params, 0.0)
    delivered = pulse if line is None else pulse.with_amplitude(line.deliver(pulse.amplitude))
    drive = _TauPulse.from_pulse(delivered, params.tau0)
    integ = _Integrator(params, drive, controls)
    y = integ.run(0.0, drive.end, (x0, 0.0))
    wells = _WellCache(params, 0.0)
    out = _ring_down(integ, drive.end, y, wells, settle, drive.end + ringdown)
    if out.settled:
        delta = wells.flux(out.final_n) - x0
    else:
        delta = out.x - x0
    traj = integ.trajectory(params.tau0) if keep_trajectory else None
    return TransitionResult(start_well, out.final_n, delta, out.settled, pulse.amplitude, traj)


# ----------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    n_points: int


def fit_line(xs, ys) -> LinearFit:
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    if len(xs) < 2 or np.ptp(xs) == 0:
        raise FitUndefinedError(f"need at least two distinct supra-threshold points, got {len(xs)}")
    slope, intercept = np.polyfit(xs, ys, 1)
    return LinearFit(float(slope), float(intercept), len(xs))


@dataclass
class SweepResult:
    results: list[TransitionResult]
    fit: LinearFit

    @property
    def slope(self) -> float:
        return self.fit.slope

    @property
    def intercept(self) -> float:
        return self.fit.intercept

    def rows(self):
        """Rows for the CSV header ``amplitude_phi0,delta_phi_phi0,final_n,settled``."""
        for r in self.results:
            yield r.amplitude, r.delta_phi, r.final, int(r.settled)


def _sweep_one(args):
    params, start_well, amplitude, duration, rise, kwargs = args
    pulse = FluxPulse.in_tau(amplitude, params.tau0, duration, rise)
    return pulse_transition(params, start_well, pulse, **kwargs)


def run_sweep(params: SquidParams, start_well: int, amplitudes, *, duration: float = DEFAULT_DURATION_TAU,
              rise: float = DEFAULT_RISE_TAU, workers: int = 1, **kwargs) -> list[TransitionResult]:
    """One pulse_transition per amplitude (pulse timing in tau units)."""
    jobs = [(params, start_well, float(a), duration, rise, kwargs) for a in amplitudes]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs))
    return [_sweep_one(job) for job in jobs]


def transition_sweep(params: SquidParams, start_well: int, amplitudes, **kwargs) -> SweepResult:
    """Sweep the pulse amplitude and fit delta_phi = k * amplitude + b.

    Only supra-threshold points (those that changed well) enter the fit.
    Raises FitUndefinedError, with the raw results attached as ``.results``,
    when fewer than two points changed well.
    """
    results = run_sweep(params, start_well, amplitudes, **kwargs)
    moved = [r for r in results if r.final != r.initial]
    try:
        fit = fit_line([r.amplitude for r in moved], [r.delta_phi for r in moved])
    except FitUndefinedError as exc:
        exc.results = results
        raise
    return SweepResult(results, fit)


def fig1f_amplitudes(params, n_values=range(1, 11)) -> list[float]:
    """Amplitudes (beta_e / 2 pi + n) Phi_0."""
    k = params.beta_e / TWO_PI
    return [k + n for n in n_values]


# ----------------------------------------------------------------------------
# hysteresis jump resolution


def dynamic_jump_policy(params: SquidParams, controls: IntegratorControls | None = None,
                        settle: SettleCriteria | None = None, ringdown: float = DEFAULT_RINGDOWN_TAU):
    """Jump policy for ``statics.hysteresis_curve`` that lets the dynamics decide.

    When well n vanishes the state is released at rest from the edge of its
    branch with the applied flux held at the current sweep value, and the
    well it settles into is returned.
    """
    controls = controls or IntegratorControls()
    settle = settle or SettleCriteria()
    a = _half_width(params.beta_e)

    def policy(_params, xe: float, n: int, direction: int) -> int:
        drive = _ConstantDrive(xe)
        integ = _Integrator(params, drive, controls)
        wells = _WellCache(params, xe)
        out = _ring_down(integ, 0.0, np.array([n + direction * a, 0.0]), wells, settle, ringdown)
        if not out.settled:
            raise IntegrationDivergedError(f"release from well {n} at xe={xe:g} did not settle")
        return out.final_n

    return policy


def critical_amplitude(params, n: int, sign: int = +1) -> float:
    """Exact threshold of well n (shortcut used by sweeps and calibration)."""
    return n + sign * threshold_offset(params.beta_e)
