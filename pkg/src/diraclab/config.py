"""Run configuration: a flat JSON object, validated strictly."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from diraclab.catalog import ModelSpec, Variant, coupling_names

ALL_COUPLINGS = ("a", "b", "B", "alpha1", "alpha2", "beta1", "beta2", "A")
FORMATS = ("json", "csv")


class ConfigError(ValueError):
    pass


def _parse_complex(value, key):
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"{key}: cannot read {value!r} as a number")


def _format_complex(z: complex):
    """Real couplings stay plain numbers; complex ones become Python-style strings."""
    z = complex(z)
    return z.real if z.imag == 0 else repr(z).strip("()")


def _parse_half(value, key) -> int:
    """j given as 1.5 or "3/2"; returns 2j."""
    try:
        j = Fraction(str(value)) if isinstance(value, str) else Fraction(value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{key}: cannot read {value!r}") from exc
    two_j = 2 * j
    if two_j.denominator != 1 or two_j.numerator % 2 != 1 or two_j <= 0:
        raise ConfigError(f"{key}: must be a positive half-integer, got {value!r}")
    return two_j.numerator


def _int(value, key, minimum=0):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{key}: expected an integer >= {minimum}, got {value!r}")
    return value


def _float(value, key, positive=False, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key}: expected a finite number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{key}: must be > 0")
    return float(value)


@dataclass(frozen=True)
class RunConfig:
    model: Variant
    m: float = 1.0
    couplings: dict = field(default_factory=dict)
    n_r_max: int = 3
    ell_max: int = 3
    two_j_max: int = 3
    grid_points: int = 4000
    r_max: float | None = None
    tol: float = 1e-6
    format: str = "json"
    out: str | None = None
    verify: bool = False
    depth: int = 6
    scan_parameter: str | None = None
    scan_start: float | None = None
    scan_stop: float | None = None
    scan_steps: int | None = None
    scan_factor: complex = 1 + 0j

    def spec(self, **override) -> ModelSpec:
        couplings = dict(self.couplings)
        m = self.m
        for k, v in override.items():
            if k == "m":
                m = v
            else:
                couplings[k] = v
        try:
            return ModelSpec.create(self.model, m, **couplings)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def canonical(self) -> dict:
        """The config as plain JSON data, excluding output-only keys."""
        d = {
            "model": self.model.value,
            "m": self.m,
            **{k: _format_complex(v) for k, v in sorted(self.couplings.items())},
            "n_r_max": self.n_r_max,
            "ell_max": self.ell_max,
            "j_max": f"{self.two_j_max}/2",
            "grid_points": self.grid_points,
            "r_max": self.r_max,
            "tol": self.tol,
            "verify": self.verify,
            "depth": self.depth,
        }
        if self.scan_parameter is not None:
            d.update(scan_parameter=self.scan_parameter, scan_start=self.scan_start,
                     scan_stop=self.scan_stop, scan_steps=self.scan_steps,
                     scan_factor=_format_complex(self.scan_factor))
        return d

    def with_overrides(self, **kw) -> RunConfig:
        kw = {k: v for k, v in kw.items() if v is not None}
        if "format" in kw and kw["format"] not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if "tol" in kw:
            kw["tol"] = _float(kw["tol"], "tol", positive=True)
        return replace(self, **kw)


_SIMPLE_KEYS = {"model", "m", "n_r_max", "ell_max", "j_max", "grid_points", "r_max", "tol", "format",
                "out", "verify", "depth", "scan_parameter", "scan_start", "scan_stop", "scan_steps",
                "scan_factor"}


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _SIMPLE_KEYS - set(ALL_COUPLINGS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "model" not in data:
        raise ConfigError("missing required key 'model'")
    try:
        model = Variant(data["model"])
    except ValueError as exc:
        raise ConfigError(f"unknown model {data['model']!r}; choose from {[v.value for v in Variant]}") from exc
    allowed = coupling_names(model)
    stray = [k for k in ALL_COUPLINGS if k in data and k not in allowed]
    if stray:
        raise ConfigError(f"{model.value} does not take couplings {stray}")
    missing = [k for k in allowed if k not in data]
    if missing:
        raise ConfigError(f"{model.value} requires couplings {missing}")
    couplings = {k: _parse_complex(data[k], k) for k in allowed}
    kw = {"model": model, "couplings": couplings}
    if "m" in data:
        kw["m"] = _float(data["m"], "m")
    for key in ("n_r_max", "ell_max", "depth"):
        if key in data:
            kw[key] = _int(data[key], key)
    if "grid_points" in data:
        kw["grid_points"] = _int(data["grid_points"], "grid_points", 100)
    if "j_max" in data:
        kw["two_j_max"] = _parse_half(data["j_max"], "j_max")
    if "r_max" in data:
        kw["r_max"] = _float(data["r_max"], "r_max", positive=True, allow_none=True)
    if "tol" in data:
        kw["tol"] = _float(data["tol"], "tol", positive=True)
    if "format" in data:
        if data["format"] not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        kw["format"] = data["format"]
    if "out" in data:
        if data["out"] is not None and not isinstance(data["out"], str):
            raise ConfigError("out must be a path string")
        kw["out"] = data["out"]
    if "verify" in data:
        if not isinstance(data["verify"], bool):
            raise ConfigError("verify must be true or false")
        kw["verify"] = data["verify"]
    if "scan_parameter" in data:
        name = data["scan_parameter"]
        if name != "m" and name not in allowed:
            raise ConfigError(f"scan_parameter must be 'm' or one of {list(allowed)}")
        kw["scan_parameter"] = name
        for key in ("scan_start", "scan_stop"):
            if key not in data:
                raise ConfigError(f"scan needs {key}")
            kw[key] = _float(data[key], key)
        if "scan_steps" not in data:
            raise ConfigError("scan needs scan_steps")
        kw["scan_steps"] = _int(data["scan_steps"], "scan_steps")
    elif any(k in data for k in ("scan_start", "scan_stop", "scan_steps", "scan_factor")):
        raise ConfigError("scan keys given without scan_parameter")
    if "scan_factor" in data:
        kw["scan_factor"] = _parse_complex(data["scan_factor"], "scan_factor")
    cfg = RunConfig(**kw)
    cfg.spec()  # validates the couplings
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return parse_config(data)
