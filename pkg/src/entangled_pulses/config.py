"""Flat ``key = value`` configuration files.

Keys are the :class:`~entangled_pulses.model.PhysicalParams` field names.
Frequencies are ordinary frequencies in Hz, angles are radians and times are
seconds. Blank lines and text after ``#`` are ignored. Complex couplings may
be written in Python syntax, e.g. ``g_c = 1e6+0.5e6j``. ``none`` leaves an
optional field at its default. Keys that are missing take the reference
values of :func:`~entangled_pulses.model.reference_params`; write
``delta2_override = none`` to use the Stokes/anti-Stokes default
``delta1 - 2 nu``.

Example::

    # reference set with a narrow cavity
    kappa = 800
    kappa_h = 20
    delta1 = -120e6
"""

from __future__ import annotations

from pathlib import Path

from .model import FREQUENCY_FIELDS, TWO_PI, PhysicalParams, param_names, reference_params

COMPLEX_FIELDS = ("g_c", "omega1", "omega2")


class ConfigError(ValueError):
    pass


def _parse_value(key: str, text: str, where: str):
    if text.lower() == "none":
        return None
    try:
        value = complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"{where}: cannot parse value {text!r} for {key}") from None
    if key in COMPLEX_FIELDS:
        return value if value.imag else value.real
    if value.imag:
        raise ConfigError(f"{where}: {key} must be real, got {text!r}")
    return value.real


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse config text into a dict of raw values (Hz, radians)."""
    allowed = set(param_names())
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        values[key] = _parse_value(key, value, where)
    return values


def params_from_values(values: dict) -> PhysicalParams:
    """Reference parameters updated with ``values`` given in Hz / radians."""
    values = dict(values)
    kappa = values.pop("kappa", 800.0)
    try:
        return reference_params(kappa, **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> PhysicalParams:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return params_from_values(parse_config(text, str(path)))


def dump_config(params: PhysicalParams) -> str:
    """Inverse of :func:`load_config` (values in Hz / radians)."""
    lines = []
    for name in param_names():
        value = getattr(params, name)
        if value is not None and name in FREQUENCY_FIELDS:
            value = value / TWO_PI
        if isinstance(value, complex) and value.imag == 0:
            value = value.real
        lines.append(f"{name} = {value!r}")
    return "\n".join(lines) + "\n"

