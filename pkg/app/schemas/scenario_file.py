# app/schemas/scenario_file.py
"""
Scenario files: KEY=VALUE lines (the .env syntax), comments with '#'.
Missing keys fall back to the reference values; unknown keys, duplicates and
invalid values fail with "<file>:<line>: <message>".
"""

import io
import logging
import re
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

from dotenv.parser import parse_stream
from pydantic import ValidationError

from app.core.fading import NakagamiPower, NoFading, ShadowedRice
from app.core.standards import TABLE1
from app.schemas.scenario_schema import Densities, LinkBudget, NetworkGeometry, ScenarioConfig
from app.utils.errors import ScenarioError

logger = logging.getLogger(__name__)

# blank lines ahead of a binding are part of it; its reported line is where they start
_NEWLINE = re.compile(r"\r\n|\n|\r")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _boolean(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _integer(text: str) -> int:
    return int(text.strip())


def _number(text: str) -> float:
    return float(text.strip())


def _fading_kind(text: str) -> str:
    kind = text.strip().lower()
    if kind not in ("nakagami", "shadowed_rice", "none"):
        raise ValueError(f"fading must be nakagami, shadowed_rice or none, got {text!r}")
    return kind


SCENARIO_KEYS: Dict[str, Callable[[str], object]] = {
    "earth_radius_km": _number,
    "satellite_altitude_km": _number,
    "platform_altitude_km": _number,
    "satellite_angular_speed_rad_s": _number,
    "mean_orbits": _number,
    "mean_sats_per_orbit": _number,
    "platform_enabled": _boolean,
    "sat_rx_power_dbm": _number,
    "sat_gain_db": _number,
    "sat_bandwidth_hz": _number,
    "sat_noise_density_dbm_hz": _number,
    "ground_rx_power_dbm": _number,
    "ground_gain_db": _number,
    "ground_bandwidth_hz": _number,
    "ground_noise_density_dbm_hz": _number,
    "path_loss_exponent": _number,
    "fading": _fading_kind,
    "fading_m": _number,
    "fading_omega": _number,
    "fading_b": _number,
    "fading_m_tilde": _number,
    "fading_omega_tilde": _number,
    "ground_node_count": _integer,
}

_FADING_KEYS = {
    "nakagami": ("fading_m", "fading_omega"),
    "shadowed_rice": ("fading_b", "fading_m_tilde", "fading_omega_tilde"),
    "none": (),
}


class _Document:
    def __init__(self, source: str):
        self.source = source
        self.values: Dict[str, object] = {}
        self.lines: Dict[str, int] = {}

    def fail(self, key: Optional[str], message: str, line: Optional[int] = None) -> ScenarioError:
        line = line if line is not None else self.lines.get(key, 0)
        return ScenarioError(f"{self.source}:{line}: {message}")

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def first_line(self, *keys: str) -> int:
        present = [self.lines[k] for k in keys if k in self.lines]
        return min(present) if present else 0


def _read_bindings(text: str, source: str) -> _Document:
    doc = _Document(source)
    for binding in parse_stream(io.StringIO(text)):
        text = binding.original.string
        line = binding.original.line + len(_NEWLINE.findall(text[: len(text) - len(text.lstrip())]))
        if binding.error:
            raise doc.fail(None, f"malformed line {binding.original.string.strip()!r}", line)
        if binding.key is None:
            continue
        key = binding.key
        if key not in SCENARIO_KEYS:
            raise doc.fail(None, f"unknown key {key!r}", line)
        if key in doc.values:
            raise doc.fail(None, f"duplicate key {key!r} (first set on line {doc.lines[key]})", line)
        if binding.value is None or binding.value.strip() == "":
            raise doc.fail(None, f"key {key!r} has no value", line)
        doc.lines[key] = line
        try:
            doc.values[key] = SCENARIO_KEYS[key](binding.value)
        except ValueError as exc:
            raise doc.fail(key, f"{key}: {exc}") from exc
    return doc


def _build(doc: _Document, key_map: Dict[str, str], factory: Callable, **kwargs):
    """Build a sub-model; key_map maps model fields to scenario keys for error anchoring."""
    try:
        return factory(**kwargs)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = str(error["loc"][0]) if error["loc"] else None
        key = key_map.get(field)
        line = doc.lines.get(key) if key else doc.first_line(*key_map.values())
        where = key or ", ".join(sorted(set(key_map.values())))
        raise doc.fail(None, f"{where}: {error['msg']}", line or 0) from exc


def _link(doc: _Document, prefix: str) -> LinkBudget:
    key_map = {
        "rx_power_at_1m_dbm": f"{prefix}_rx_power_dbm",
        "aggregate_gain_db": f"{prefix}_gain_db",
        "bandwidth_hz": f"{prefix}_bandwidth_hz",
        "noise_density_dbm_hz": f"{prefix}_noise_density_dbm_hz",
        "path_loss_exponent": "path_loss_exponent",
    }
    kwargs = {field: doc.get(key, TABLE1[field]) for field, key in key_map.items()}
    return _build(doc, key_map, LinkBudget, **kwargs)


def _fading(doc: _Document):
    kind = doc.get("fading", "nakagami")
    for keys in _FADING_KEYS.values():
        for key in keys:
            if key in doc.values and key not in _FADING_KEYS[kind]:
                raise doc.fail(key, f"{key} does not apply to fading={kind}")
    if kind == "none":
        return NoFading()
    if kind == "nakagami":
        key_map = {"m": "fading_m", "omega": "fading_omega"}
        return _build(doc, key_map, NakagamiPower, m=doc.get("fading_m", 1.0), omega=doc.get("fading_omega", 1.0))
    missing = [k for k in _FADING_KEYS["shadowed_rice"] if k not in doc.values]
    if missing:
        raise doc.fail("fading", f"fading=shadowed_rice needs {', '.join(missing)}")
    key_map = {"b": "fading_b", "m_tilde": "fading_m_tilde", "omega_tilde": "fading_omega_tilde"}
    return _build(
        doc,
        key_map,
        ShadowedRice,
        b=doc.get("fading_b"),
        m_tilde=doc.get("fading_m_tilde"),
        omega_tilde=doc.get("fading_omega_tilde"),
    )


def parse_scenario(text: str, source: str = "<scenario>") -> ScenarioConfig:
    doc = _read_bindings(text, source)

    geometry_keys = {
        "satellite_altitude_km": "satellite_altitude_km",
        "platform_altitude_km": "platform_altitude_km",
        "earth_radius_km": "earth_radius_km",
        "satellite_angular_speed_rad_s": "satellite_angular_speed_rad_s",
    }
    geom = _build(
        doc,
        geometry_keys,
        NetworkGeometry.from_altitudes,
        **{field: doc.get(key, TABLE1[key]) for field, key in geometry_keys.items()},
    )
    density_keys = {"mean_orbits": "mean_orbits", "mean_sats_per_orbit": "mean_sats_per_orbit"}
    densities = _build(doc, density_keys, Densities, **{k: doc.get(k, TABLE1[k]) for k in density_keys})

    cfg = ScenarioConfig(
        geom=geom,
        densities=densities,
        platform_enabled=doc.get("platform_enabled", True),
        sat_link=_link(doc, "sat"),
        platform_link=_link(doc, "ground"),
        fading=_fading(doc),
        ground_node_count=doc.get("ground_node_count"),
    )
    logger.debug("parsed scenario %s with %d explicit keys", source, len(doc.values))
    return cfg


def load_scenario(path: Optional[str]) -> ScenarioConfig:
    """Parse a scenario file; None gives the reference scenario."""
    if path is None:
        return parse_scenario("", source="<defaults>")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}:0: cannot read scenario file ({exc.strerror})") from exc
    return parse_scenario(text, source=str(path))


def scenario_items(cfg: ScenarioConfig) -> Tuple[Tuple[str, object], ...]:
    """Flat (key, value) pairs of a scenario, e.g. for run tracking."""
    return (
        ("satellite_altitude_km", cfg.geom.satellite_altitude_km),
        ("platform_altitude_km", cfg.geom.platform_altitude_km),
        ("mean_orbits", cfg.densities.mean_orbits),
        ("mean_sats_per_orbit", cfg.densities.mean_sats_per_orbit),
        ("platform_enabled", cfg.platform_enabled),
        ("fading", cfg.fading.kind),
        ("path_loss_exponent", cfg.sat_link.path_loss_exponent),
    )
