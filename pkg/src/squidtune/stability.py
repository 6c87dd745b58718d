"""Transduction of electronics voltage noise into qubit flux noise.

The flux-per-volt coefficient kv is a calibrated input.  Two calibration
points are known: with the source idling near zero output (-3.256 mV) a
0.012 mV peak-to-peak fluctuation gives 15.3 micro-Phi_0, and at 188.797 mV
output a 0.036 mV fluctuation gives 50.2 micro-Phi_0.  Between them kv is
interpolated linearly in the mean output voltage.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import truncnorm

from .errors import InvalidParameterError

MICRO = 1e6

# (mean output voltage V, voltage P2P V, flux P2P micro-Phi_0)
IDLE_POINT = (-3.256e-3, 0.012e-3, 15.3)
BIASED_POINT = (188.797e-3, 0.036e-3, 50.2)

KV_IDLE = IDLE_POINT[2] / (IDLE_POINT[1] * MICRO)  # Phi_0 / V
KV_BIASED = BIASED_POINT[2] / (BIASED_POINT[1] * MICRO)
KV_DEFAULT = 0.5 * (KV_IDLE + KV_BIASED)

#: jitter is a Gaussian truncated at +-JITTER_CLIP standard deviations
JITTER_CLIP = 2.0


@dataclass(frozen=True)
class VoltageTrace:
    period: float  # s
    samples: np.ndarray  # V, relative to the mean output

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 2:
            raise InvalidParameterError("a voltage trace needs at least two samples")
        if not (math.isfinite(self.period) and self.period > 0):
            raise InvalidParameterError(f"sample period must be positive, got {self.period!r}")
        object.__setattr__(self, "samples", samples)

    @property
    def times(self) -> np.ndarray:
        return self.period * np.arange(self.samples.size)

    def scaled(self, factor: float) -> "VoltageTrace":
        return VoltageTrace(self.period, factor * self.samples)


@dataclass(frozen=True)
class FluxSeries:
    period: float  # s
    values: np.ndarray  # micro-Phi_0


@dataclass(frozen=True)
class KvCurve:
    """Piecewise-linear kv (Phi_0/V) versus mean output voltage (V), clamped outside."""

    voltages: tuple[float, ...] = (IDLE_POINT[0], BIASED_POINT[0])
    kv: tuple[float, ...] = (KV_IDLE, KV_BIASED)

    def __post_init__(self):
        if len(self.voltages) != len(self.kv) or not self.voltages:
            raise InvalidParameterError("kv curve needs matching, non-empty voltage and kv lists")
        if any(b <= a for a, b in zip(self.voltages, self.voltages[1:])):
            raise InvalidParameterError("kv curve voltages must be strictly increasing")
        if any(not k > 0 for k in self.kv):
            raise InvalidParameterError("kv values must be positive")

    def __call__(self, mean_voltage: float) -> float:
        return float(np.interp(mean_voltage, self.voltages, self.kv))


def transduce(trace: VoltageTrace, kv: float) -> FluxSeries:
    """Flux fluctuation in micro-Phi_0 for a voltage fluctuation and kv in Phi_0/V."""
    if not (math.isfinite(kv) and kv > 0):
        raise InvalidParameterError(f"kv must be positive, got {kv!r}")
    return FluxSeries(trace.period, trace.samples * (kv * MICRO))


@dataclass(frozen=True)
class FluxNoiseStats:
    p2p: float  # micro-Phi_0
    std: float  # micro-Phi_0
    rsd_ppm: float | None

    def to_record(self) -> dict:
        return {"p2p_uphi0": self.p2p, "std_uphi0": self.std, "rsd_ppm": self.rsd_ppm}


def stats(series, mean_offset: float | None = None) -> FluxNoiseStats:
    """Peak-to-peak, population standard deviation and relative deviation.

    ``series`` is in micro-Phi_0 and ``mean_offset`` (the mean qubit flux
    bias) in Phi_0, so rsd_ppm = std / mean_offset directly.  The RSD is
    omitted unless the offset is positive.
    """
    values = np.asarray(getattr(series, "values", series), dtype=float)
    if values.size == 0:
        raise InvalidParameterError("cannot take statistics of an empty series")
    p2p = float(values.max() - values.min())
    std = float((values - values[0]).std())  # rebased so a constant series gives exactly 0
    rsd = std / mean_offset if mean_offset is not None and mean_offset > 0 else None
    return FluxNoiseStats(p2p, std, rsd)


def rsd_ppm(std_uphi0: float, mean_offset: float) -> float:
    return std_uphi0 / mean_offset


def quantize(v, bits: int, fullscale: float):
    """Round to the nearest of the 2**bits codes spanning ``fullscale`` volts."""
    step = fullscale / 2**bits
    return np.round(np.asarray(v, dtype=float) / step) * step


def dac_noise_model(bits: int, fullscale: float, noise_p2p: float, duration: float, period: float, *,
                    setpoint: float = 0.0, seed: int = 0) -> VoltageTrace:
    """Synthetic DAC output fluctuation around its mean.

    Each sample is ``quantize(setpoint + jitter)``, where the jitter is a
    Gaussian truncated at +-noise_p2p/2 (two standard deviations).  The
    returned samples are relative to their mean.
    """
    if int(bits) != bits or bits < 1:
        raise InvalidParameterError(f"bits must be a positive integer, got {bits!r}")
    for name, value in (("fullscale", fullscale), ("duration", duration), ("period", period)):
        if not (math.isfinite(value) and value > 0):
            raise InvalidParameterError(f"{name} must be positive, got {value!r}")
    if not (math.isfinite(noise_p2p) and noise_p2p >= 0):
        raise InvalidParameterError(f"noise_p2p must be non-negative, got {noise_p2p!r}")
    n = max(2, int(round(duration / period)))
    rng = np.random.default_rng(seed)
    unit = truncnorm.rvs(-JITTER_CLIP, JITTER_CLIP, size=n, random_state=rng)
    jitter = unit * (noise_p2p / (2 * JITTER_CLIP))
    step = fullscale / 2 ** int(bits)
    codes = np.round((setpoint + jitter) / step)
    return VoltageTrace(period, (codes - codes.mean()) * step)


def read_trace_csv(source) -> VoltageTrace:
    """Parse a ``t_s,v_rel_V`` CSV (path or text) into a uniformly sampled trace."""
    if isinstance(source, Path) or (isinstance(source, str) and source and "\n" not in source and Path(source).is_file()):
        text = Path(source).read_text()
    else:
        text = str(source)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["t_s", "v_rel_V"]:
        raise InvalidParameterError("trace CSV must start with the header t_s,v_rel_V")
    t, v = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        try:
            t.append(float(row[0]))
            v.append(float(row[1]))
        except (IndexError, ValueError):
            raise InvalidParameterError(f"line {lineno}: expected two numbers, got {row!r}") from None
    if len(t) < 2:
        raise InvalidParameterError("a voltage trace needs at least two samples")
    dt = np.diff(t)
    if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-6):
        raise InvalidParameterError("trace times must be uniformly increasing")
    return VoltageTrace(float(dt[0]), np.array(v))


def trace_rows(trace: VoltageTrace):
    return [(float(t), float(v)) for t, v in zip(trace.times, trace.samples)]
