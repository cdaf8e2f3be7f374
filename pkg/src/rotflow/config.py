"""Pipeline configuration: one YAML file drives build, simulate and analyze.

Sections: ``flow`` (angular velocity, gluing radius, bump list or imported
grid path), ``grid`` (resolution, half width), ``solver`` (CFL or dt,
horizon, cadences, dealiasing, filter, error bound), ``analysis``
(radial step, angles, thresholds) and ``output_dir``.  Defaults are
embedded here and echoed into the run manifest; cross-section consistency
is validated before any computation.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from .composer import FlowSpec, FlowSpecError, ImportedFlow, ImportedMap, spec_from_config
from .gridio import read_grid
from .spectral import SolverConfig, SpectralGrid


class ConfigError(ValueError):
    pass


_DEFAULTS = {
    "flow": {
        "angular_velocity": None,
        "gluing_radius": None,
        "bumps": [],
        "imported_grid": None,
        "imported_order": 5,
    },
    "grid": {
        "resolution": 256,
        "half_width": None,
    },
    "solver": {
        "cfl": 0.5,
        "dt": None,
        "horizon": {},
        "snapshot_every": 0,
        "diagnostics_every": 0,
        "dealias": True,
        "filter_strength": 0.0,
        "rotation_error_bound": 0.01,
    },
    "analysis": {
        "r_max": None,
        "dr": 0.01,
        "n_angles": 256,
        "circle_tolerance": 1e-8,
        "boundary_tolerance": 1e-8,
        "relation_tolerance": 1e-6,
        "gradient_fraction": 1e-6,
        "bins": 256,
    },
    "output_dir": "out",
    "sweep": {
        "parameters": {},
        "stages": ["build", "simulate"],
    },
}


_LEAF_MAPPINGS = {"parameters", "horizon"}


def _merge(base: dict, override: dict, path="") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in out:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(out[key], dict) and isinstance(value, dict) and key not in _LEAF_MAPPINGS:
            out[key] = _merge(out[key], value, path + key + ".")
        else:
            out[key] = copy.deepcopy(value)
    return out


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``key.path=value`` overrides; values are parsed as YAML."""
    data = copy.deepcopy(data)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse override value {raw!r}: {exc}") from exc
        node = data
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {key!r} crosses a non-mapping")
        node[parts[-1]] = value
    return data


@dataclass
class PipelineConfig:
    data: dict
    base_dir: Path

    @property
    def output_dir(self) -> Path:
        out = Path(self.data["output_dir"])
        return out if out.is_absolute() else self.base_dir / out

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.data, sort_keys=True).encode()
        ).hexdigest()

    # -- builders -------------------------------------------------------

    def _resolve(self, path) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.base_dir / path

    def flow(self):
        f = self.data["flow"]
        if f["imported_grid"] is not None:
            values, meta = read_grid(self._resolve(f["imported_grid"]))
            inner = ImportedMap(values, meta.x0, meta.y0, meta.dx, meta.dy,
                                order=int(f["imported_order"]))
            return ImportedFlow(inner, f["angular_velocity"], f["gluing_radius"])
        section = copy.deepcopy(f)
        for bump in section.get("bumps", []):
            if "table" in bump:
                bump["table"] = str(self._resolve(bump["table"]))
        return spec_from_config(section)

    def spectral_grid(self) -> SpectralGrid:
        g = self.data["grid"]
        return SpectralGrid(int(g["resolution"]), float(g["half_width"]))

    def solver(self) -> SolverConfig:
        s = self.data["solver"]
        return SolverConfig(
            cfl=float(s["cfl"]),
            dt=None if s["dt"] is None else float(s["dt"]),
            dealias=bool(s["dealias"]),
            filter_strength=float(s["filter_strength"]),
        )

    def _horizon_syntax(self) -> None:
        s = self.data["solver"]["horizon"]
        unknown = set(s) - {"revolutions", "time"}
        if unknown:
            raise ConfigError(f"unknown solver.horizon keys {sorted(unknown)}")
        if (s.get("revolutions") is not None) == (s.get("time") is not None):
            raise ConfigError("solver.horizon needs exactly one of 'revolutions' or 'time'")

    def horizon(self) -> float:
        self._horizon_syntax()
        s = self.data["solver"]["horizon"]
        if s.get("time") is not None:
            horizon = float(s["time"])
        else:
            omega = float(self.data["flow"]["angular_velocity"])
            if omega == 0.0:
                raise ConfigError("horizon in revolutions requires a nonzero angular velocity")
            horizon = float(s["revolutions"]) * 2.0 * 3.141592653589793 / abs(omega)
        if not (horizon > 0.0 and horizon < float("inf")):
            raise ConfigError("horizon must be positive and finite")
        return horizon

    def analysis_r_max(self) -> float:
        a = self.data["analysis"]
        if a["r_max"] is not None:
            return float(a["r_max"])
        return 1.1 * 2.0 * float(self.data["flow"]["gluing_radius"])

    # -- validation -----------------------------------------------------

    def validate(self) -> None:
        f = self.data["flow"]
        if f["angular_velocity"] is None or f["gluing_radius"] is None:
            raise ConfigError("flow.angular_velocity and flow.gluing_radius are required")
        if f["imported_grid"] is not None and f["bumps"]:
            raise ConfigError("flow: give either bumps or imported_grid, not both")
        g = self.data["grid"]
        if g["half_width"] is None:
            raise ConfigError("grid.half_width is required")
        support = 2.0 * float(f["gluing_radius"])
        if not support < 0.9 * float(g["half_width"]):
            raise ConfigError(
                f"flow support 2R = {support} must satisfy 2R < 0.9 * half_width "
                f"= {0.9 * float(g['half_width'])}"
            )
        if self.data["solver"]["horizon"]:
            self._horizon_syntax()
        if f["imported_grid"] is not None:
            path = self._resolve(f["imported_grid"])
            if not path.exists():
                raise ConfigError(f"imported grid {path} does not exist")
        try:
            self.flow()
        except (FlowSpecError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path, overrides=None, out_dir=None) -> PipelineConfig:
    path = Path(path)
    with open(path) as fh:
        user = yaml.safe_load(fh) or {}
    if not isinstance(user, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    data = _merge(_DEFAULTS, user)
    data = apply_overrides(data, overrides)
    if out_dir is not None:
        data["output_dir"] = str(out_dir)
    cfg = PipelineConfig(data=data, base_dir=path.resolve().parent)
    cfg.validate()
    return cfg


def config_from_dict(data: dict, base_dir, validate=True) -> PipelineConfig:
    cfg = PipelineConfig(data=_merge(_DEFAULTS, data), base_dir=Path(base_dir))
    if validate:
        cfg.validate()
    return cfg
