"""INI run configurations for the command line.

Two parameter styles are accepted, never both:

* ``[params]`` gives rates and couplings directly (``kappa1``, ``kappa2``,
  ``gamma_m``, ``omega_m``, ``G``, ``n``, optional ``delta0`` and ``g0``).
* ``[physical]`` gives the device (``cavity_length``, ``mass``, ``wavelength``,
  ``mech_freq``, rates, ``control_power1/2``); ``G`` and ``n`` are derived
  from the steady state.

Rates take a unit suffix: ``Hz``, ``kHz``, ``MHz`` or ``GHz`` (cyclic, so
``215 kHz`` means 2 pi * 215e3 rad/s), or ``kappa``. A bare number counts as
``kappa``. All rates in one file must use the same family. Angles accept a
``pi`` suffix (``0.5 pi``).
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .model import (
    DEFAULT_WAVELENGTH,
    SPEED_OF_LIGHT,
    DriveConfig,
    PhysicalParams,
    SystemParams,
    derive_system_params,
)

_HZ_SCALE = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY = re.compile(rf"^\s*(?P<value>{_NUMBER})\s*(?P<unit>[A-Za-z/]*)\s*$")

_SECTIONS = {"params", "physical", "drive", "grid", "delay", "sweep", "stability", "selfcheck", "output"}
_DIRECT_KEYS = {"kappa1", "kappa2", "gamma_m", "omega_m", "G", "n", "delta0", "g0"}
_DIRECT_RATES = {"kappa1", "kappa2", "gamma_m", "omega_m", "G", "delta0", "g0"}
_PHYSICAL_KEYS = {
    "cavity_length", "mass", "wavelength", "mech_freq", "detuning",
    "kappa1", "kappa2", "gamma_m", "control_power1", "control_power2",
}  # fmt: skip
_PHYSICAL_RATES = {"mech_freq", "detuning", "kappa1", "kappa2", "gamma_m"}
_DRIVE_KEYS = {"eps_L", "eps_R", "theta", "eps_cL", "eps_cR"}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (command-line exit code 2)."""


def parse_rate(text: str) -> tuple[float, str]:
    """``(value, family)``; family is ``"hz"`` (value in rad/s) or ``"kappa"``."""
    m = _QUANTITY.match(text)
    if not m:
        raise ConfigError(f"cannot parse rate {text!r}")
    value = float(m["value"])
    unit = m["unit"].lower()
    if unit in ("", "kappa"):
        return value, "kappa"
    if unit in _HZ_SCALE:
        return 2 * math.pi * value * _HZ_SCALE[unit], "hz"
    raise ConfigError(f"unknown rate unit {m['unit']!r} in {text!r}; use Hz, kHz, MHz, GHz or kappa")


def parse_angle(text: str) -> float:
    m = _QUANTITY.match(text)
    if not m or m["unit"].lower() not in ("", "pi", "rad"):
        raise ConfigError(f"cannot parse angle {text!r}; use radians or a 'pi' suffix")
    value = float(m["value"])
    return value * math.pi if m["unit"].lower() == "pi" else value


def parse_float(text: str, name: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{name}: expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{name}: must be finite, got {text!r}")
    return value


def parse_int(text: str, name: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{name}: expected an integer, got {text!r}") from None


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration, everything in units of kappa1.

    ``kappa_rad_s`` is kappa1 in rad/s when rates were given in Hz units,
    else None (delays then stay in 1/kappa).
    """

    params: SystemParams
    drive: DriveConfig
    style: str
    physical: PhysicalParams | None = None
    kappa_rad_s: float | None = None
    sections: dict = field(default_factory=dict)
    output_path: str | None = None
    output_format: str = "csv"
    precision: int = 12

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})

    def rate(self, text: str, name: str) -> float:
        """A rate from a mode section, converted to units of kappa1."""
        value, family = parse_rate(text)
        expected = "hz" if self.kappa_rad_s is not None else "kappa"
        if family != expected:
            raise ConfigError(f"{name}: mixed rate units ({family} in a {expected} configuration)")
        return value / self.kappa_rad_s if family == "hz" else value

    def delta_grid(self, count: int | None = None) -> np.ndarray:
        grid = self.section("grid")
        _check_keys("grid", grid, {"delta_min", "delta_max", "count"})
        lo = self.rate(grid.get("delta_min", "-5"), "delta_min")
        hi = self.rate(grid.get("delta_max", "5"), "delta_max")
        n = count if count is not None else parse_int(grid.get("count", "1001"), "count")
        if n < 1:
            raise ConfigError("grid count must be >= 1")
        if n > 1 and not hi > lo:
            raise ConfigError("grid needs delta_max > delta_min")
        return np.linspace(lo, hi, n)


def _check_keys(section: str, values: dict, allowed: set) -> None:
    unknown = sorted(set(values) - allowed)
    if unknown:
        raise ConfigError(f"[{section}]: unknown keys {unknown}; allowed {sorted(allowed)}")


def _rates(section: dict, names: set) -> tuple[dict, set]:
    out, families = {}, set()
    for key in names & set(section):
        out[key], family = parse_rate(section[key])
        families.add(family)
    return out, families


def _drive(section: dict) -> DriveConfig:
    _check_keys("drive", section, _DRIVE_KEYS)
    kwargs = {}
    for key in ("eps_L", "eps_R", "eps_cL", "eps_cR"):
        if key in section:
            kwargs[key] = parse_float(section[key], key)
    if "theta" in section:
        kwargs["theta"] = parse_angle(section["theta"])
    return DriveConfig(**kwargs)


def _direct(section: dict, drive: DriveConfig):
    _check_keys("params", section, _DIRECT_KEYS)
    rates, families = _rates(section, _DIRECT_RATES)
    if len(families) > 1:
        raise ConfigError("[params]: mixed rate units (Hz-family and kappa)")
    family = families.pop() if families else "kappa"
    if family == "hz" and "kappa1" not in rates:
        raise ConfigError("[params]: kappa1 is required when rates are given in Hz units")
    kwargs = dict(rates)
    if "n" in section:
        kwargs["n"] = parse_float(section["n"], "n")
    params = SystemParams(**kwargs)
    kappa = params.kappa1 if family == "hz" else None
    return params.normalized(), drive, None, kappa


def _physical(section: dict, drive: DriveConfig):
    _check_keys("physical", section, _PHYSICAL_KEYS)
    missing = sorted({"cavity_length", "mass", "mech_freq", "kappa1", "kappa2", "gamma_m", "control_power1"} - set(section))
    if missing:
        raise ConfigError(f"[physical]: missing keys {missing}")
    rates, families = _rates(section, _PHYSICAL_RATES)
    if families != {"hz"}:
        raise ConfigError("[physical]: every rate needs a Hz-family unit (Hz, kHz, MHz, GHz)")
    wavelength = parse_float(section.get("wavelength", repr(DEFAULT_WAVELENGTH)), "wavelength")
    if not wavelength > 0:
        raise ConfigError("wavelength must be > 0")
    control_freq = 2 * math.pi * SPEED_OF_LIGHT / wavelength
    power1 = parse_float(section["control_power1"], "control_power1")
    phys = PhysicalParams(
        cavity_length=parse_float(section["cavity_length"], "cavity_length"),
        mass=parse_float(section["mass"], "mass"),
        cavity_freq=control_freq + rates.get("detuning", rates["mech_freq"]),
        mech_freq=rates["mech_freq"],
        control_freq=control_freq,
        kappa1=rates["kappa1"],
        kappa2=rates["kappa2"],
        gamma_m=rates["gamma_m"],
        control_power1=power1,
        control_power2=parse_float(section.get("control_power2", repr(power1)), "control_power2"),
    )
    params = derive_system_params(phys)
    return params.normalized(), drive, phys, phys.kappa1


def load_config(path) -> RunConfig:
    """Parse an INI file. Raises ConfigError for anything malformed."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep G distinct from g0
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return parse_sections({name: dict(parser[name]) for name in parser.sections()})


def parse_sections(sections: dict) -> RunConfig:
    unknown = sorted(set(sections) - _SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections {unknown}; allowed {sorted(_SECTIONS)}")
    has_direct, has_physical = "params" in sections, "physical" in sections
    if has_direct and has_physical:
        raise ConfigError("give either [params] or [physical], not both")
    try:
        drive = _drive(sections.get("drive", {}))
        if has_physical:
            params, drive, phys, kappa = _physical(sections["physical"], drive)
        else:
            params, drive, phys, kappa = _direct(sections.get("params", {}), drive)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    output = sections.get("output", {})
    _check_keys("output", output, {"path", "format", "precision"})
    fmt = output.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"[output] format must be csv or json, got {fmt!r}")
    precision = parse_int(output.get("precision", "12"), "precision")
    if not 1 <= precision <= 17:
        raise ConfigError("precision must be in 1..17")
    return RunConfig(
        params=params,
        drive=drive,
        style="physical" if has_physical else "direct",
        physical=phys,
        kappa_rad_s=kappa,
        sections={k: dict(v) for k, v in sections.items()},
        output_path=output.get("path"),
        output_format=fmt,
        precision=precision,
    )
