"""Mapping between rf-SQUID state, qubit flux and transmon frequency."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import PHI0
from .errors import InvalidParameterError, OutOfModelError
from .statics import enumerate_wells


@dataclass(frozen=True)
class CouplingNetwork:
    """Mutual inductances around one rf-SQUID (all in H).

    M12 couples the bias line to the SQUID, M13 the bias line to the qubit
    and M23 the SQUID loop to the qubit.
    """

    M12: float
    M13: float
    M23: float
    L: float

    def __post_init__(self):
        for name in ("M12", "M13", "M23", "L"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be positive, got {value!r}")

    @property
    def flux_step(self) -> float:
        """Qubit flux per unit of SQUID flux (one well spacing ~ one Phi_0)."""
        return self.M23 / self.L


TABLE1_NETWORK = CouplingNetwork(M12=70e-12, M13=2.90e-12, M23=4.07e-12, L=1.18e-9)


@dataclass(frozen=True)
class TransmonModel:
    f01_max: float  # GHz
    Ec: float = 0.0  # GHz

    def __post_init__(self):
        if not (math.isfinite(self.f01_max) and self.f01_max > 0):
            raise InvalidParameterError(f"f01_max must be positive, got {self.f01_max!r}")
        if not (math.isfinite(self.Ec) and self.Ec >= 0):
            raise InvalidParameterError(f"Ec must be non-negative, got {self.Ec!r}")


def qubit_flux(squid_flux: float, net: CouplingNetwork) -> float:
    """Static qubit flux (Phi_0) produced by the loop current at zero applied flux."""
    current = squid_flux * PHI0 / net.L
    return net.M23 * current / PHI0


def f01(qflux: float, model: TransmonModel) -> float:
    """Symmetric-transmon frequency law (f_max + Ec) sqrt|cos(pi phi)| - Ec, GHz."""
    return (model.f01_max + model.Ec) * math.sqrt(abs(math.cos(math.pi * qflux))) - model.Ec


def qubit_flux_from_f01(f: float, model: TransmonModel) -> float:
    """Inverse of f01 on the monotone branch [0, 0.5] Phi_0."""
    if not f > -model.Ec:
        raise OutOfModelError(f"frequency {f} GHz is below the model floor {-model.Ec} GHz")
    top = model.f01_max + model.Ec
    ratio = (f + model.Ec) / top
    if ratio > 1 + 1e-12:
        raise OutOfModelError(f"frequency {f} GHz exceeds f01_max = {model.f01_max} GHz")
    return math.acos(min(ratio, 1.0) ** 2) / math.pi


def bias_line_crosstalk(pulse_amplitude: float, net: CouplingNetwork) -> float:
    """Transient qubit flux caused directly by the bias-line current of a pulse.

    ``pulse_amplitude`` is the SQUID-referred amplitude in Phi_0, i.e. the
    bias current is amplitude * Phi_0 / M12.
    """
    bias_current = pulse_amplitude * PHI0 / net.M12
    return net.M13 * bias_current / PHI0


@dataclass(frozen=True)
class InferredState:
    n: int
    squid_flux: float  # Phi_0, from the frequency inversion
    qubit_flux: float  # Phi_0, signed
    well_flux: float  # exact flux of the chosen well
    residual: float  # GHz, measured minus predicted f01 of the chosen well


@dataclass(frozen=True)
class CensusRow:
    n: int
    squid_flux: float
    qubit_flux: float
    f01: float


def census(params, net: CouplingNetwork, model: TransmonModel, include_edge: bool = False) -> list[CensusRow]:
    """Every zero-bias well mapped to qubit flux and frequency."""
    rows = []
    for w in enumerate_wells(params, 0.0, include_edge=include_edge):
        q = qubit_flux(w.flux, net)
        rows.append(CensusRow(w.n, w.flux, q, f01(q, model)))
    return rows


def infer_squid_state(f01_measured: float, model: TransmonModel, net: CouplingNetwork, params,
                      sign: int = +1, wells: list[CensusRow] | None = None) -> InferredState:
    """Deduce the SQUID well from a measured qubit frequency.

    f01 is even in flux, so the sign of the loop current is not observable;
    ``sign`` selects the branch (known in practice from the polarity of the
    last pulse).  Candidates are restricted to wells whose qubit flux lies on
    the monotone branch |phi| <= 0.5; the well with the nearest predicted
    frequency is returned together with the residual.
    """
    if sign not in (1, -1):
        raise InvalidParameterError(f"sign must be +1 or -1, got {sign}")
    if not f01_measured > 0:
        raise OutOfModelError(f"measured frequency must be positive, got {f01_measured}")
    q = sign * qubit_flux_from_f01(f01_measured, model)
    squid = q / net.flux_step
    rows = wells if wells is not None else census(params, net, model)
    candidates = [r for r in rows if abs(r.qubit_flux) <= 0.5 and (r.n == 0 or (r.n > 0) == (sign > 0))]
    if not candidates:
        raise OutOfModelError("no well lies on the monotone branch of the frequency law")
    best = min(candidates, key=lambda r: (abs(r.f01 - f01_measured), abs(r.n)))
    return InferredState(best.n, squid, q, best.squid_flux, f01_measured - best.f01)
