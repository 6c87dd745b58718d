"""Thermal escape rate and lifetime of metastable wells.

Rates at millikelvin temperatures are far below the smallest double, so
everything is carried as log10 values; the linear rate is only exposed when
it is comfortably representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import CONST, SquidParams
from .errors import InvalidParameterError
from .statics import enumerate_wells

LN10 = math.log(10.0)
LINEAR_LIMIT = 300.0  # decades

OK = "ok"
BARRIER_COLLAPSE = "barrier-collapse"


@dataclass(frozen=True)
class EscapeQuery:
    i: float  # I / Ic
    T: float  # K

    def __post_init__(self):
        if not (math.isfinite(self.i) and 0 <= self.i < 1):
            raise InvalidParameterError(f"reduced current must lie in [0, 1), got {self.i!r}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise InvalidParameterError(f"temperature must be positive, got {self.T!r}")


@dataclass(frozen=True)
class EscapeResult:
    omega_pi: float  # rad/s
    barrier: float  # J
    log10_rate: float  # log10(Gamma / s^-1)
    status: str = OK

    @property
    def rate(self) -> float | None:
        """Linear rate in 1/s, or None when it would under- or overflow."""
        if abs(self.log10_rate) < LINEAR_LIMIT:
            return 10.0 ** self.log10_rate
        return None


def plasma_frequency(i: float, params: SquidParams) -> float:
    """omega_p,i = omega_p,0 (1 - i^2)^(1/4), rad/s."""
    return params.derived.omega_p0 * (1.0 - i * i) ** 0.25


def barrier(i: float, params: SquidParams) -> float:
    """H(i) = (Ic Phi0 / pi)(sqrt(1 - i^2) - i arccos i) - hbar omega_p,i / 2, J."""
    classical = params.Ic * CONST.phi0 / math.pi * (math.sqrt(1.0 - i * i) - i * math.acos(i))
    return classical - 0.5 * CONST.hbar * plasma_frequency(i, params)


def escape_rate(q: EscapeQuery, params: SquidParams) -> EscapeResult:
    """Gamma = (omega_p,i / 2 pi) exp(-H(i) / kB T), evaluated as log10."""
    omega = plasma_frequency(q.i, params)
    H = barrier(q.i, params)
    log_attempt = math.log10(omega / (2 * math.pi))
    if H < 0:
        return EscapeResult(omega, H, log_attempt, BARRIER_COLLAPSE)
    return EscapeResult(omega, H, log_attempt - H / (CONST.kB * q.T * LN10))


def reduced_current(flux: float, params: SquidParams) -> float:
    """|I| / Ic for a zero-bias well at total flux ``flux`` (Phi_0)."""
    return abs(flux) * CONST.phi0 / (params.L * params.Ic)


@dataclass(frozen=True)
class WellRate:
    n: int
    flux: float  # Phi_0
    i: float
    result: EscapeResult


def well_rates(params: SquidParams, T: float, wells=None) -> list[WellRate]:
    """Escape rate of every zero-bias well."""
    wells = enumerate_wells(params, 0.0) if wells is None else wells
    out = []
    for w in wells:
        i = reduced_current(w.flux, params)
        out.append(WellRate(w.n, w.flux, i, escape_rate(EscapeQuery(i, T), params)))
    return out


def max_rate_over_wells(params: SquidParams, T: float, wells=None) -> WellRate:
    """The well with the largest escape rate (ties resolved toward positive n)."""
    rates = well_rates(params, T, wells)
    if not rates:
        raise InvalidParameterError("no metastable wells to evaluate")
    return max(rates, key=lambda r: (r.result.log10_rate, r.n))


def lifetime(result: EscapeResult) -> float:
    """log10 of the mean lifetime 1/Gamma in seconds."""
    return -result.log10_rate


def thermal_rows(params: SquidParams, temperatures=(0.020, 0.100), wells=None):
    """Rows for the CSV ``n,i,log10_rate_20mK,log10_rate_100mK,log10_lifetime_s``.

    The lifetime column refers to the first temperature.
    """
    wells = enumerate_wells(params, 0.0) if wells is None else wells
    lo, hi = temperatures
    rows = []
    for a, b in zip(well_rates(params, lo, wells), well_rates(params, hi, wells)):
        rows.append((a.n, a.i, a.result.log10_rate, b.result.log10_rate, lifetime(a.result)))
    return rows
