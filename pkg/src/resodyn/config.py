"""Run configuration: YAML or JSON files parsed into the model types.

Recognised keys (all optional except where a subcommand needs them)::

    system:     dim, hs (row-major [re, im] pairs), g_levels
    bath:       beta, form_factor: {p, decay_a, decay_m, angular_sq_integral}
    coupling:   sigma, lambda
    quadrature: rel_tol, abs_tol, r_max_factor
    dynamics:   rho0 (row-major [re, im] pairs), t_max, points, elements ([[a, b], ...])
    sweep:      parameter, min, max, points, scale (linear | log)
    spinboson:  xi0 (defaults to the bath value)

Missing sections fall back to the shipped defaults (a spin-boson system).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .errors import ConfigError, ResodynError
from .model import (BathParams, CouplingParams, DensityMatrix, FormFactor, QuadratureConfig,
                    SystemSpec)

MODES = ("resonances", "dynamics", "spinboson", "oracle-validate", "sweep")
SWEEP_PARAMETERS = ("sigma", "lambda", "gamma", "beta")
SCALES = ("linear", "log")

_KNOWN = {
    "system": {"dim", "hs", "g_levels"},
    "bath": {"beta", "form_factor"},
    "coupling": {"sigma", "lambda"},
    "quadrature": {"rel_tol", "abs_tol", "r_max_factor"},
    "dynamics": {"rho0", "t_max", "points", "elements"},
    "sweep": {"parameter", "min", "max", "points", "scale"},
    "spinboson": {"xi0"},
}
_FORM_KEYS = {"p", "decay_a", "decay_m", "angular_sq_integral"}


def default_config_text():
    return resources.files("resodyn").joinpath("configs/default.yaml").read_text()


def default_config_dict():
    return yaml.safe_load(default_config_text())


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    min: float
    max: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.points < 2:
            raise ConfigError("sweep.points", f"need at least 2 points, got {self.points}")
        if self.scale not in SCALES:
            raise ConfigError("sweep.scale", f"must be one of {SCALES}, got {self.scale!r}")
        if self.scale == "log" and not (self.min > 0 and self.max > 0):
            raise ConfigError("sweep.min", "log sweeps need positive bounds")

    def values(self):
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.points)
        return np.linspace(self.min, self.max, self.points)

    @classmethod
    def parse(cls, parameter, range_text, scale, points, key="sweep"):
        """From CLI words such as ``gamma 0.01..100 log 200``."""
        try:
            lo, hi = (float(x) for x in str(range_text).split(".."))
        except ValueError:
            raise ConfigError(f"{key}.range", f"expected MIN..MAX, got {range_text!r}") from None
        try:
            n = int(points)
        except ValueError:
            raise ConfigError(f"{key}.points", f"expected an integer, got {points!r}") from None
        return cls(parameter=parameter, min=lo, max=hi, points=n, scale=scale)


@dataclass(frozen=True, eq=False)
class ModelConfig:
    spec: SystemSpec
    form_factor: FormFactor
    bath: BathParams
    coupling: CouplingParams
    quadrature: QuadratureConfig
    rho0: Optional[DensityMatrix] = None
    t_max: Optional[float] = None
    points: int = 30
    elements: Optional[list] = None
    sweep: Optional[SweepSpec] = None
    xi0: Optional[float] = None
    raw: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    mode: str
    input_path: Optional[Path]
    output_path: Optional[Path]
    sweep: Optional[SweepSpec] = None
    threads: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {MODES}, got {self.mode!r}")
        if self.output_path is not None:
            parent = Path(self.output_path).resolve().parent
            if not parent.is_dir():
                raise ConfigError("out", f"directory {parent} does not exist")


def _merge(base, over):
    out = dict(base)
    for k, v in over.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


def load_config_dict(path=None):
    data = default_config_dict()
    if path is None:
        return data
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        user = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (ValueError, yaml.YAMLError) as exc:
        raise ConfigError("config", f"cannot parse {path}: {exc}") from None
    if user is None:
        user = {}
    if not isinstance(user, dict):
        raise ConfigError("config", "top level must be a mapping")
    # an explicit system replaces the default one wholesale, with its rho0
    if "system" in user:
        data.pop("system", None)
        data.get("dynamics", {}).pop("rho0", None)
    return _merge(data, user)


def _get(d, dotted, kind=float, required=True, default=None):
    cur = d
    for part in dotted.split("."):
        if not isinstance(cur, dict) or part not in cur:
            if required:
                raise ConfigError(dotted, "missing")
            return default
        cur = cur[part]
    if cur is None and not required:
        return default
    try:
        if kind is int and (isinstance(cur, bool) or float(cur) != int(cur)):
            raise ValueError
        return kind(cur)
    except (TypeError, ValueError):
        raise ConfigError(dotted, f"expected {kind.__name__}, got {cur!r}") from None


def _pairs(value, n, key):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(key, "expected a list of [re, im] pairs") from None
    if arr.shape != (n * n, 2):
        raise ConfigError(key, f"expected {n * n} [re, im] pairs in row-major order, got shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(n, n)


def _check_unknown(d):
    for sec, val in d.items():
        if sec not in _KNOWN:
            raise ConfigError(sec, "unknown section")
        if not isinstance(val, dict):
            raise ConfigError(sec, "expected a mapping")
        for k in val:
            if k not in _KNOWN[sec]:
                raise ConfigError(f"{sec}.{k}", "unknown key")
    ff = d.get("bath", {}).get("form_factor", {})
    if not isinstance(ff, dict):
        raise ConfigError("bath.form_factor", "expected a mapping")
    for k in ff:
        if k not in _FORM_KEYS:
            raise ConfigError(f"bath.form_factor.{k}", "unknown key")


def _wrap(key, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ConfigError:
        raise
    except ResodynError as exc:
        raise ConfigError(key, str(exc)) from None


def parse_model_config(d: dict[str, Any]) -> ModelConfig:
    _check_unknown(d)
    n = _get(d, "system.dim", int)
    hs = _pairs(_get(d, "system.hs", list), n, "system.hs")
    g = _get(d, "system.g_levels", list)
    if len(g) != n:
        raise ConfigError("system.g_levels", f"expected {n} values, got {len(g)}")
    spec = _wrap("system.hs", SystemSpec, hs=hs, g_levels=g, dim=n)

    beta = _get(d, "bath.beta")
    bath = _wrap("bath.beta", BathParams, beta)
    ffd = {k: _get(d, f"bath.form_factor.{k}", int if k == "decay_m" else float)
           for k in ("p", "decay_a", "decay_m", "angular_sq_integral")}
    for k, v in ffd.items():
        try:
            FormFactor(**{**FormFactor().to_dict(), k: v})
        except ResodynError as exc:
            raise ConfigError(f"bath.form_factor.{k}", str(exc)) from None
    ff = FormFactor(**ffd)
    if not ff.satisfies_uv_decay(beta):
        raise ConfigError("bath.form_factor.decay_a",
                          f"decay_a must exceed beta/2 = {beta / 2} when decay_m = 1")

    sigma = _get(d, "coupling.sigma")
    lam = _get(d, "coupling.lambda")
    cp = _wrap("coupling.sigma" if sigma < 0 else "coupling.lambda", CouplingParams, sigma, lam)

    quad = {k: _get(d, f"quadrature.{k}") for k in ("rel_tol", "abs_tol", "r_max_factor")}
    try:
        qc = QuadratureConfig(**quad)
    except ResodynError as exc:
        bad = "quadrature.r_max_factor" if "r_max" in str(exc) else "quadrature.rel_tol"
        raise ConfigError(bad, str(exc)) from None

    rho0 = None
    if _get(d, "dynamics.rho0", list, required=False) is not None:
        rho = _pairs(d["dynamics"]["rho0"], n, "dynamics.rho0")
        rho0 = _wrap("dynamics.rho0", DensityMatrix, rho)
    t_max = _get(d, "dynamics.t_max", required=False)
    if t_max is not None and not t_max > 0:
        raise ConfigError("dynamics.t_max", "must be positive")
    points = _get(d, "dynamics.points", int, required=False, default=30)
    if points < 2:
        raise ConfigError("dynamics.points", "need at least 2 points")
    elements = _get(d, "dynamics.elements", list, required=False)
    if elements is not None:
        try:
            elements = [(int(a), int(b)) for a, b in elements]
        except (TypeError, ValueError):
            raise ConfigError("dynamics.elements", "expected a list of [a, b] index pairs") from None
        for a, b in elements:
            if not (0 <= a < n and 0 <= b < n):
                raise ConfigError("dynamics.elements", f"index pair ({a}, {b}) out of range for dim {n}")

    sweep = None
    if isinstance(d.get("sweep"), dict) and d["sweep"]:
        param = _get(d, "sweep.parameter", str)
        if param not in SWEEP_PARAMETERS:
            raise ConfigError("sweep.parameter", f"must be one of {SWEEP_PARAMETERS}, got {param!r}")
        sweep = SweepSpec(parameter=param, min=_get(d, "sweep.min"), max=_get(d, "sweep.max"),
                          points=_get(d, "sweep.points", int),
                          scale=_get(d, "sweep.scale", str, required=False, default="linear"))
    xi0 = _get(d, "spinboson.xi0", required=False)
    if xi0 is not None and not xi0 > 0:
        raise ConfigError("spinboson.xi0", "must be positive")
    return ModelConfig(spec=spec, form_factor=ff, bath=bath, coupling=cp, quadrature=qc, rho0=rho0,
                       t_max=t_max, points=points, elements=elements, sweep=sweep, xi0=xi0, raw=d)


def load_model_config(path=None) -> ModelConfig:
    return parse_model_config(load_config_dict(path))
