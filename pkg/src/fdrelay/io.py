"""JSON config files and CSV tables.

Config files are JSON objects whose keys are :class:`SystemConfig` field
names. Power-like fields (``p_S``, ``p_R``, ``p_p``, ``sigma_LI2``) take a
linear number or a string with a ``dB`` suffix such as ``"-10dB"``. ADC
fields take a bit count, ``"inf"``, or an object ``{"bits": b}`` or
``{"rho": r}``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .adc import AdcModel
from .config import ConfigError, SystemConfig, db_to_linear

__all__ = [
    "POWER_FIELDS",
    "parse_value",
    "parse_adc",
    "config_from_dict",
    "parse_config",
    "format_cell",
    "write_csv",
    "read_csv",
]

POWER_FIELDS = ("p_S", "p_R", "p_p", "sigma_LI2")
REQUIRED = ("M", "K", "p_S", "p_R", "p_p", "sigma_LI2")
_FIELDS = {
    "M", "K", "p_S", "p_R", "p_p", "sigma_LI2", "relay_adc", "dest_adc",
    "tau_c", "tau_p", "beta_SR", "beta_RD",
}


def parse_value(text) -> float:
    """Number, numeric string, ``"inf"`` or a ``dB``-suffixed string to float."""
    if isinstance(text, bool):
        raise ConfigError(f"expected a number, got {text!r}")
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip()
    if s.lower() == "infinite":
        return math.inf
    try:
        if s.lower().endswith("db"):
            return float(db_to_linear(float(s[:-2])))
        return float(s)
    except ValueError:
        raise ConfigError(f"cannot parse {text!r} as a number or dB value") from None


def parse_adc(spec) -> AdcModel:
    try:
        if isinstance(spec, dict):
            if set(spec) == {"bits"}:
                return AdcModel.from_bits(parse_value(spec["bits"]))
            if set(spec) == {"rho"}:
                return AdcModel.from_rho(parse_value(spec["rho"]))
            raise ConfigError(f"ADC object must have exactly one of 'bits' or 'rho', got {spec}")
        bits = parse_value(spec)
        return AdcModel.from_bits(bits)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def config_from_dict(data: dict) -> SystemConfig:
    """Validated config from a mapping in the config-file schema."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = [k for k in REQUIRED if k not in data]
    if missing:
        raise ConfigError(f"missing required config keys: {missing}")
    kw = {}
    for key, val in data.items():
        if key in POWER_FIELDS:
            kw[key] = parse_value(val)
        elif key in ("relay_adc", "dest_adc"):
            kw[key] = parse_adc(val)
        elif key in ("beta_SR", "beta_RD"):
            kw[key] = None if val is None else [parse_value(v) for v in val]
        elif key == "tau_p" and val is None:
            kw[key] = None
        else:
            kw[key] = parse_value(val)
    return SystemConfig(**kw)


def parse_config(path) -> SystemConfig:
    """Read and validate a JSON config file.

    Raises
    ------
    ConfigError
        On unreadable JSON, missing or unknown keys, or a violated invariant.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(data)


def format_cell(value) -> str:
    """Floats as ``repr`` (shortest round-trip form); everything else via ``str``."""
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    if hasattr(value, "dtype") and value.dtype.kind == "f":
        return format_cell(float(value))
    return str(value)


def write_csv(path, header, rows, append: bool = False) -> None:
    """Write a header row and data rows. With ``append`` the header is only
    written if the file does not exist yet."""
    path = Path(path)
    exists = path.exists() and path.stat().st_size > 0
    with path.open("a" if append else "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if not (append and exists):
            w.writerow(header)
        for row in rows:
            w.writerow([format_cell(v) for v in row])


def read_csv(path):
    """Return ``(header, rows)``; numeric cells become floats, others stay text."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for raw in reader:
            row = []
            for cell in raw:
                try:
                    row.append(float(cell))
                except ValueError:
                    row.append(cell)
            rows.append(row)
    return header, rows
