"""Flat ``key = value`` parameter files.

Keys (units in the name)::

    ic_uA l_nH c_pF r_ohm m12_pH m13_pH m23_pH f01max_GHz env_flux_phi0

Blank lines and ``#`` comments are ignored.  Unknown keys are rejected so
that typos do not silently fall back to defaults.
"""

from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

from .core import SquidParams
from .errors import ConfigError, InvalidParameterError
from .qubitmap import CouplingNetwork, TransmonModel

KEYS = ("ic_uA", "l_nH", "c_pF", "r_ohm", "m12_pH", "m13_pH", "m23_pH", "f01max_GHz", "env_flux_phi0")
SQUID_KEYS = KEYS[:4]
NETWORK_KEYS = ("m12_pH", "m13_pH", "m23_pH", "l_nH")

_SCALE = {
    "ic_uA": 1e-6,
    "l_nH": 1e-9,
    "c_pF": 1e-12,
    "r_ohm": 1.0,
    "m12_pH": 1e-12,
    "m13_pH": 1e-12,
    "m23_pH": 1e-12,
    "f01max_GHz": 1.0,
    "env_flux_phi0": 1.0,
}


def parse_config(text: str, source: str = "<string>") -> dict[str, float]:
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCALE:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}", key=key)
        try:
            number = float(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: value for {key!r} is not a number: {value!r}", key=key) from None
        if not math.isfinite(number):
            raise ConfigError(f"{source}:{lineno}: value for {key!r} must be finite", key=key)
        values[key] = number
    return values


def load_config(path: str | Path) -> dict[str, float]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror or exc}") from None
    return parse_config(text, source=str(path))


def default_config_text() -> str:
    """The shipped ``table1.cfg`` (device parameters of the tuning experiment)."""
    return resources.files("squidtune").joinpath("data/table1.cfg").read_text()


def default_config() -> dict[str, float]:
    return parse_config(default_config_text(), source="table1.cfg")


def _require(values, keys):
    for key in keys:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}", key=key)


def squid_from_config(values: dict[str, float]) -> SquidParams:
    _require(values, SQUID_KEYS)
    try:
        return SquidParams(
            Ic=values["ic_uA"] * _SCALE["ic_uA"],
            L=values["l_nH"] * _SCALE["l_nH"],
            C=values["c_pF"] * _SCALE["c_pF"],
            R=values["r_ohm"],
        )
    except InvalidParameterError as exc:
        raise ConfigError(f"invalid SQUID parameters: {exc}") from None


def network_from_config(values: dict[str, float]) -> CouplingNetwork:
    _require(values, NETWORK_KEYS)
    try:
        return CouplingNetwork(
            M12=values["m12_pH"] * 1e-12,
            M13=values["m13_pH"] * 1e-12,
            M23=values["m23_pH"] * 1e-12,
            L=values["l_nH"] * 1e-9,
        )
    except InvalidParameterError as exc:
        raise ConfigError(f"invalid coupling network: {exc}") from None


def transmon_from_config(values: dict[str, float], Ec: float = 0.0) -> TransmonModel:
    _require(values, ("f01max_GHz",))
    try:
        return TransmonModel(f01_max=values["f01max_GHz"], Ec=Ec)
    except InvalidParameterError as exc:
        raise ConfigError(f"invalid transmon model: {exc}") from None


def env_offset_from_config(values: dict[str, float]) -> float:
    return values.get("env_flux_phi0", 0.0)


def format_config(params: SquidParams | None = None, network: CouplingNetwork | None = None,
                  f01_max: float | None = None, env_offset: float | None = None) -> str:
    """Serialise parameter records back to the flat text format."""
    lines = []
    if params is not None:
        lines += [
            f"ic_uA = {params.Ic / 1e-6:.12g}",
            f"l_nH = {params.L / 1e-9:.12g}",
            f"c_pF = {params.C / 1e-12:.12g}",
            f"r_ohm = {params.R:.12g}",
        ]
    if network is not None:
        if params is None:
            lines.append(f"l_nH = {network.L / 1e-9:.12g}")
        lines += [
            f"m12_pH = {network.M12 / 1e-12:.12g}",
            f"m13_pH = {network.M13 / 1e-12:.12g}",
            f"m23_pH = {network.M23 / 1e-12:.12g}",
        ]
    if f01_max is not None:
        lines.append(f"f01max_GHz = {f01_max:.12g}")
    if env_offset is not None:
        lines.append(f"env_flux_phi0 = {env_offset:.12g}")
    return "\n".join(lines) + "\n"
