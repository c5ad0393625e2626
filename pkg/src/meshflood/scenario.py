"""Scenario files: flat `key=value` text mapping onto SimConfig.

Lines are `key = value`, `#` starts a comment, blank lines are ignored.
Unknown keys are rejected so typos cannot silently fall back to defaults.
The extra keys beyond SimConfig's fields are `fixture` (built-in topology
name) and `rate_schedule` (`t:bits` pairs joined by commas).
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

from .engine import SimConfig
from .errors import ConfigError

_BOOL_WORDS = {
    "on": True,
    "off": False,
    "true": True,
    "false": False,
    "yes": True,
    "no": False,
    "1": True,
    "0": False,
}


def _parse_bool(key: str, raw: str) -> bool:
    try:
        return _BOOL_WORDS[raw.lower()]
    except KeyError:
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}") from None


def parse_rate_schedule(raw: str) -> tuple[tuple[float, int], ...]:
    """Parse `t:bits,t:bits` into a sorted schedule of payload changes."""
    entries = []
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        t_s, sep, bits_s = chunk.partition(":")
        if not sep:
            raise ConfigError(f"rate_schedule entry {chunk!r} is not t:bits")
        try:
            entries.append((float(t_s), int(bits_s)))
        except ValueError:
            raise ConfigError(f"rate_schedule entry {chunk!r} is not t:bits") from None
    return tuple(sorted(entries))


_INT_KEYS = {
    "node_count",
    "channel_bps",
    "payload_bits",
    "header_bits_per_relay",
    "seed",
}
_FLOAT_KEYS = {
    "area_side",
    "radio_range",
    "tx_power_mw",
    "packet_interval_s",
    "topo_control_interval_s",
    "hold_time_s",
    "topo_stability_s",
    "duplicate_ttl_s",
    "sim_duration_s",
    "mobility_displacement",
}
_BOOL_KEYS = {"rule2", "repeat_seq"}
_STR_KEYS = {"placement", "mode", "inflight", "relay_order", "fixture"}

_KNOWN_KEYS = (
    _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | _STR_KEYS | {"rate_schedule"}
)
assert _KNOWN_KEYS <= {f.name for f in dataclasses.fields(SimConfig)}


def _convert(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if key in _BOOL_KEYS:
        return _parse_bool(key, raw)
    if key == "rate_schedule":
        return parse_rate_schedule(raw)
    return raw


def parse_scenario_text(text: str, origin: str = "<string>") -> SimConfig:
    """Build a validated SimConfig from scenario text."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise ConfigError(f"{origin}:{lineno}: expected key=value, got {raw!r}")
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        values[key] = _convert(key, value)
    cfg = SimConfig(**values)
    cfg.validate()
    return cfg


def load_scenario(path) -> SimConfig:
    """Read and validate a scenario file."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {p}: {exc}") from exc
    return parse_scenario_text(text, origin=str(p))
