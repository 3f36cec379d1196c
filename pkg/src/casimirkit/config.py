"""Run configuration: a flat key = value file with units in the key names.

The format is deliberately minimal: one `key = value` pair per line, `#`
comments, and a mandatory schema_version. Unknown keys are errors, so typos
cannot silently fall back to defaults. serialize(parse(f)) is idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .exceptions import ConfigError

__all__ = ["RunConfig", "parse_config", "serialize_config"]

_CHOICES = {
    "sample": ("untreated", "uv_treated"),
    "carriers": ("on", "off", "both"),
    "band": ("lower", "upper", "both"),
    "carrier_prescription": ("drude", "plasma"),
}


@dataclass
class RunConfig:
    """Resolved configuration of a theory/extraction run."""

    schema_version: int = 1
    # stack geometry
    radius_um: float = 101.2
    temperature_k: float = 275.15
    film_thickness_nm: float = 74.6
    # film permittivity source ('builtin' uses the packaged reconstruction
    # of the top-surface curve; a CSV path supplies user data)
    sample: str = "untreated"
    ito_table_csv: str = "builtin"
    carriers: str = "both"
    band: str = "both"
    carrier_prescription: str = "drude"
    plasma_omega_p_ev: float = 1.3
    # roughness
    roughness: bool = True
    roughness_ito_csv: str = "builtin"
    roughness_au_csv: str = "builtin"
    # separation grid
    separation_min_nm: float = 60.0
    separation_max_nm: float = 150.0
    separation_points: int = 91
    # permittivity output grid
    xi_min_ev: float = 0.05
    xi_max_ev: float = 30.0
    xi_points: int = 60
    # numerics
    matsubara_tail_rel_tol: float = 1e-7
    quad_rel_tol: float = 1e-6
    kk_rel_tol: float = 1e-5
    # extraction
    noise_floor_pn: float = 1.0
    drift_correction: bool = False
    # output
    out_dir: str = "runs"
    figures: bool = True

    def validate(self) -> "RunConfig":
        if self.schema_version != 1:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        positive = (
            "radius_um",
            "temperature_k",
            "film_thickness_nm",
            "plasma_omega_p_ev",
            "separation_min_nm",
            "separation_max_nm",
            "xi_min_ev",
            "xi_max_ev",
            "matsubara_tail_rel_tol",
            "quad_rel_tol",
            "kk_rel_tol",
        )
        for name in positive:
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be > 0")
        for name, choices in _CHOICES.items():
            if getattr(self, name) not in choices:
                raise ConfigError(f"{name} must be one of {choices}")
        if self.separation_points < 1 or self.xi_points < 2:
            raise ConfigError("grid point counts too small")
        if not self.separation_min_nm < self.separation_max_nm:
            raise ConfigError("separation_min_nm must be below separation_max_nm")
        if self.separation_min_nm < 60.0 or self.separation_max_nm > 2000.0:
            raise ConfigError("separation grid must lie within [60, 2000] nm")
        if not self.xi_min_ev < self.xi_max_ev:
            raise ConfigError("xi_min_ev must be below xi_max_ev")
        if not 0.0 < self.matsubara_tail_rel_tol <= 1e-2:
            raise ConfigError("matsubara_tail_rel_tol must be in (0, 1e-2]")
        for name in ("ito_table_csv", "roughness_ito_csv", "roughness_au_csv"):
            value = getattr(self, name)
            if value != "builtin" and not Path(value).exists():
                raise ConfigError(f"{name} file not found: {value}")
        if self.noise_floor_pn < 0.0:
            raise ConfigError("noise_floor_pn must be >= 0")
        return self


_BOOL_WORDS = {"on": True, "off": False, "true": True, "false": False}


def _coerce(name: str, kind, raw: str):
    if kind is bool:
        try:
            return _BOOL_WORDS[raw.lower()]
        except KeyError:
            raise ConfigError(f"{name}: expected on/off, got {raw!r}") from None
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {kind.__name__}") from None


def parse_config(path) -> RunConfig:
    """Parse and validate a configuration file."""
    spec = {f.name: f.type for f in fields(RunConfig)}
    kinds = {"int": int, "float": float, "str": str, "bool": bool}
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in spec:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = _coerce(key, kinds[spec[key]], value)
    if "schema_version" not in values:
        raise ConfigError(f"{path}: missing schema_version")
    return RunConfig(**values).validate()


def serialize_config(config: RunConfig) -> str:
    """Canonical text form; parsing it back reproduces the same config."""
    lines = []
    for f in fields(RunConfig):
        value = getattr(config, f.name)
        if isinstance(value, bool):
            value = "on" if value else "off"
        elif isinstance(value, float):
            value = f"{value:.10g}"
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
