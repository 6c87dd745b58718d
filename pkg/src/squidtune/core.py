"""Physical constants, rf-SQUID parameter records and damping classification.

All quantities are SI internally.  Fluxes crossing the public API are in
units of the flux quantum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

from scipy import constants as _sc

from .errors import DegenerateMeasurementError, InvalidParameterError


@dataclass(frozen=True)
class PhysicalConstants:
    phi0: float = _sc.h / (2 * _sc.e)  # Wb
    kB: float = _sc.k  # J/K
    hbar: float = _sc.hbar  # J s


CONST = PhysicalConstants()
PHI0 = CONST.phi0

#: beta_c = BETA_C_PREFACTOR * sqrt(beta_e / 2 pi)
BETA_C_PREFACTOR = 2.97


def _require_positive(**values):
    for name, value in values.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise InvalidParameterError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class DerivedParams:
    beta_e: float
    beta: float
    beta_c: float
    omega_p0: float
    tau0: float

    @property
    def damping_ratio(self) -> float:
        return self.beta / self.beta_c


@dataclass(frozen=True)
class SquidParams:
    """Junction and loop parameters of an rf-SQUID.

    Attributes:
        Ic: critical current, A.
        L: loop self-inductance, H.
        C: junction shunt capacitance, F.
        R: junction shunt resistance, Ohm.
    """

    Ic: float
    L: float
    C: float
    R: float

    def __post_init__(self):
        _require_positive(Ic=self.Ic, L=self.L, C=self.C, R=self.R)

    @cached_property
    def derived(self) -> DerivedParams:
        return derive_params(self)

    @property
    def beta_e(self) -> float:
        return self.derived.beta_e

    @property
    def beta(self) -> float:
        return self.derived.beta

    @property
    def beta_c(self) -> float:
        return self.derived.beta_c

    @property
    def damping_ratio(self) -> float:
        return self.derived.damping_ratio

    @property
    def tau0(self) -> float:
        return self.derived.tau0

    def with_resistance(self, R: float) -> "SquidParams":
        return SquidParams(self.Ic, self.L, self.C, R)


def derive_params(p: SquidParams) -> DerivedParams:
    _require_positive(Ic=p.Ic, L=p.L, C=p.C, R=p.R)
    beta_e = 2 * math.pi * p.Ic * p.L / PHI0
    beta = math.sqrt(p.L / p.C) / p.R
    beta_c = BETA_C_PREFACTOR * math.sqrt(beta_e / (2 * math.pi))
    omega_p0 = math.sqrt(2 * math.pi * p.Ic / (PHI0 * p.C))
    tau0 = math.sqrt(p.L * p.C)
    return DerivedParams(beta_e, beta, beta_c, omega_p0, tau0)


class Damping(enum.Enum):
    UNDERDAMPED = "underdamped"
    CRITICAL_OR_OVERDAMPED = "critical-or-overdamped"


@dataclass(frozen=True)
class DampingClass:
    kind: Damping
    ratio: float

    @property
    def underdamped(self) -> bool:
        return self.kind is Damping.UNDERDAMPED


def classify_damping(d: DerivedParams | SquidParams) -> DampingClass:
    """Underdamped iff beta/beta_c < 1; the boundary counts as critical."""
    if isinstance(d, SquidParams):
        d = d.derived
    ratio = d.beta / d.beta_c
    kind = Damping.UNDERDAMPED if ratio < 1 else Damping.CRITICAL_OR_OVERDAMPED
    return DampingClass(kind, ratio)


@dataclass(frozen=True)
class IvMeasurement:
    Ic: float  # switching current, A
    Ir: float  # retrapping current, A
    R: float  # resistive-branch slope, Ohm

    def __post_init__(self):
        if self.Ir == 0:
            raise DegenerateMeasurementError("retrapping current Ir = 0 leaves the quality factor undefined")
        _require_positive(Ic=self.Ic, Ir=self.Ir, R=self.R)
        if self.Ir > self.Ic:
            raise InvalidParameterError(f"retrapping current {self.Ir} exceeds critical current {self.Ic}")


def quality_factor_from_retrapping(Ic: float, Ir: float) -> float:
    """Junction quality factor from the underdamped retrapping law Ir/Ic = 4/(pi Q)."""
    if Ir == 0:
        raise DegenerateMeasurementError("retrapping current Ir = 0 leaves the quality factor undefined")
    return 4 * Ic / (math.pi * Ir)


def shunt_capacitance(Q: float, Ic: float, R: float) -> float:
    """C with Q = omega_p0 R C, i.e. C = Q^2 phi0 / (2 pi Ic R^2)."""
    _require_positive(Q=Q, Ic=Ic, R=R)
    return Q**2 * PHI0 / (2 * math.pi * Ic * R**2)


def fit_from_iv(iv: IvMeasurement, L: float) -> tuple[SquidParams, DerivedParams]:
    """Recover the shunt capacitance from an I-V curve.

    With Q = omega_p0 R C and omega_p0 = sqrt(2 pi Ic / (phi0 C)) the
    capacitance follows as C = Q^2 phi0 / (2 pi Ic R^2).
    """
    _require_positive(L=L)
    Q = quality_factor_from_retrapping(iv.Ic, iv.Ir)
    C = shunt_capacitance(Q, iv.Ic, iv.R)
    p = SquidParams(Ic=iv.Ic, L=L, C=C, R=iv.R)
    return p, p.derived


# Simulation parameters of the single-pulse numerical example (100 uA, 1 nH, 2 pF).
FIG1E_IC = 100e-6
FIG1E_L = 1e-9
FIG1E_C = 2e-12
#: Shunt resistances quoted for the nominal damping ratios 0.3, 0.5, 1.0, 2.0.
FIG1E_RESISTANCES = {0.3: 3.6, 0.5: 2.2, 1.0: 1.1, 2.0: 0.5}


def resistance_for_ratio(Ic: float, L: float, C: float, ratio: float) -> float:
    """Shunt resistance that puts beta/beta_c exactly at ``ratio``."""
    _require_positive(ratio=ratio)
    p = SquidParams(Ic, L, C, 1.0)
    return math.sqrt(L / C) / (ratio * p.beta_c)


def fig1e_params(ratio: float = 1.0, *, quoted_resistance: bool = False) -> SquidParams:
    """Parameters of the single-pulse simulation example at a damping ratio.

    By default R is solved so that beta/beta_c equals ``ratio`` exactly.  With
    ``quoted_resistance`` the rounded resistance listed for that ratio is
    used instead (only 0.3, 0.5, 1.0 and 2.0 are listed).
    """
    if quoted_resistance:
        try:
            R = FIG1E_RESISTANCES[ratio]
        except KeyError:
            raise InvalidParameterError(
                f"no quoted resistance for ratio {ratio}; choose one of {sorted(FIG1E_RESISTANCES)}"
            ) from None
    else:
        R = resistance_for_ratio(FIG1E_IC, FIG1E_L, FIG1E_C, ratio)
    return SquidParams(FIG1E_IC, FIG1E_L, FIG1E_C, R)
