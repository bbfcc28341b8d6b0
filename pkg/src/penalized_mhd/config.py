"""Run configuration: an INI-style file plus ``key=value`` overrides.

Keys may sit under their section header or above the first header.  Every
key has a default except ``scenario``.  Overrides are applied last and may
be written ``key=value`` or ``section.key=value``.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .coefficients import CoefficientError, Scenario, Tag, penalized_coefficients
from .eos import EosError, EosParams, default_eos
from .geometry import GeometryError, build_grid, classify_regions
from .solver import InitialData, Model, RunConfig
from .solver.stepping import LIMITERS

_TOP = "__top__"

DEFAULT_EPSILONS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple:
    parts = [p for p in text.replace(",", " ").split() if p]
    return tuple(float(p) for p in parts)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text: str):
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


# key -> (section, parser)
SCHEMA = {
    "d": ("geometry", int),
    "L": ("geometry", float),
    "cells": ("geometry", int),
    "R_outer": ("geometry", float),
    "R_inner": ("geometry", float),
    "transition_cells": ("geometry", float),
    "a": ("eos", float),
    "gamma": ("eos", _opt_float),
    "scenario": ("scenario", str),
    "epsilon": ("scenario", float),
    "nu_F": ("scenario", float),
    "lambda_F": ("scenario", float),
    "mu_F": ("scenario", float),
    "mu_int": ("scenario", float),
    "eta_F": ("scenario", float),
    "eta_int": ("scenario", float),
    "mu_ext": ("scenario", float),
    "eta_ext": ("scenario", float),
    "T": ("run", float),
    "cfl": ("run", float),
    "dt_min": ("run", float),
    "dt_max": ("run", float),
    "dt_fixed": ("run", _opt_float),
    "output_every": ("run", int),
    "snapshot_every": ("run", int),
    "snapshot_times": ("run", _floats),
    "limiter": ("run", str),
    "max_steps": ("run", int),
    "write_snapshots": ("run", _bool),
    "cg_tol": ("solver", float),
    "cg_maxit": ("solver", int),
    "initial": ("initial", str),
    "rho_fluid": ("initial", float),
    "rho_solid": ("initial", float),
    "vortex_amplitude": ("initial", float),
    "field_amplitude": ("initial", float),
    "epsilon_list": ("sweep", _floats),
    "workers": ("sweep", int),
    "margin_factor": ("sweep", float),
}

SECTIONS = sorted({s for s, _ in SCHEMA.values()})

# lower-case aliases accepted in files and overrides
_ALIASES = {k.lower(): k for k in SCHEMA}


@dataclass(frozen=True)
class Config:
    """Validated, flat configuration; see ``SCHEMA`` for the section of each key."""

    scenario: str
    d: int = 2
    L: float = 1.0
    cells: int = 128
    R_outer: float = 0.7
    R_inner: float = 0.3
    transition_cells: float = 4.0
    a: float = 1.0
    gamma: float | None = None
    epsilon: float = 1e-2
    nu_F: float = 0.02
    lambda_F: float = 0.0
    mu_F: float = 1.0
    mu_int: float = 2.0
    eta_F: float = 0.02
    eta_int: float = 0.05
    mu_ext: float = 1.0
    eta_ext: float = 0.02
    T: float = 0.5
    cfl: float = 0.4
    dt_min: float = 1e-8
    dt_max: float = 1e-2
    dt_fixed: float | None = None
    output_every: int = 10
    snapshot_every: int = 5
    snapshot_times: tuple = ()
    limiter: str = "none"
    max_steps: int = 1_000_000
    write_snapshots: bool = True
    cg_tol: float = 1e-10
    cg_maxit: int = 2000
    initial: str = "default"
    rho_fluid: float = 1.0
    rho_solid: float = 1.0
    vortex_amplitude: float = 0.3
    field_amplitude: float = 0.5
    epsilon_list: tuple = DEFAULT_EPSILONS
    workers: int = 1
    margin_factor: float = 2.0

    def __post_init__(self):
        if self.gamma is None:
            object.__setattr__(self, "gamma", default_eos(self.d).gamma if self.d in (2, 3) else 1.4)
        self._validate()

    def _validate(self):
        def need(ok, key, msg):
            if not ok:
                raise ConfigError(f"invalid value for '{key}': {msg}")

        try:
            Tag.parse(self.scenario)
        except CoefficientError as exc:
            raise ConfigError(f"invalid value for 'scenario': {exc}") from None
        object.__setattr__(self, "scenario", Tag.parse(self.scenario).value)
        need(self.d in (2, 3), "d", f"dimension must be 2 or 3, got {self.d}")
        need(self.L > 0, "L", f"must be > 0, got {self.L}")
        need(self.cells >= 8 and self.cells % 2 == 0, "cells", f"need an even count >= 8, got {self.cells}")
        need(self.R_outer > 0, "R_outer", f"must be > 0, got {self.R_outer}")
        need(self.R_outer < self.L, "R_outer", f"must be < L = {self.L}, got {self.R_outer}")
        need(0 <= self.R_inner < self.R_outer, "R_inner", f"need 0 <= R_inner < R_outer, got {self.R_inner}")
        need(self.transition_cells > 0, "transition_cells", "must be > 0")
        need(self.gamma > self.d / 2, "gamma", f"gamma > d/2 = {self.d / 2} violated, got {self.gamma}")
        try:
            EosParams(self.a, self.gamma).check_dimension(self.d)
        except EosError as exc:
            key = "a" if "amplitude" in str(exc) else "gamma"
            raise ConfigError(f"invalid value for '{key}': {exc}") from None
        need(0 < self.epsilon <= 1, "epsilon", f"must lie in (0, 1], got {self.epsilon}")
        for key in ("nu_F", "mu_F", "mu_int", "eta_F", "eta_int", "mu_ext", "eta_ext"):
            need(getattr(self, key) > 0, key, f"must be > 0, got {getattr(self, key)}")
        need(self.lambda_F >= 0, "lambda_F", f"must be >= 0, got {self.lambda_F}")
        need(self.T > 0, "T", f"must be > 0, got {self.T}")
        need(0 < self.cfl < 1, "cfl", f"must lie in (0, 1), got {self.cfl}")
        need(0 < self.dt_min <= self.dt_max, "dt_min", "need 0 < dt_min <= dt_max")
        need(self.dt_fixed is None or self.dt_fixed > 0, "dt_fixed", "must be > 0")
        need(self.output_every >= 1, "output_every", "must be >= 1")
        need(self.snapshot_every >= 0, "snapshot_every", "must be >= 0")
        need(all(0 <= s <= self.T for s in self.snapshot_times), "snapshot_times", "must lie in [0, T]")
        need(self.limiter in LIMITERS, "limiter", f"must be one of {LIMITERS}, got {self.limiter!r}")
        need(self.max_steps >= 1, "max_steps", "must be >= 1")
        need(self.cg_tol > 0, "cg_tol", "must be > 0")
        need(self.cg_maxit >= 1, "cg_maxit", "must be >= 1")
        need(self.initial in ("default", "zero", "uniform"), "initial",
             f"must be default, zero or uniform, got {self.initial!r}")
        need(self.rho_fluid > 0, "rho_fluid", "must be > 0")
        need(self.rho_solid > 0, "rho_solid", "must be > 0")
        need(self.vortex_amplitude >= 0, "vortex_amplitude", "must be >= 0")
        need(self.field_amplitude >= 0, "field_amplitude", "must be >= 0")
        eps = self.epsilon_list
        need(len(eps) >= 1 and all(0 < e <= 1 for e in eps), "epsilon_list", "values must lie in (0, 1]")
        need(all(x > y for x, y in zip(eps, eps[1:])), "epsilon_list", "must be strictly decreasing")
        need(self.workers >= 1, "workers", "must be >= 1")
        need(self.margin_factor > 0, "margin_factor", "must be > 0")
        try:
            build_grid(self.d, self.L, self.cells)
        except GeometryError as exc:
            raise ConfigError(f"invalid value for 'cells': {exc}") from None

    # -- builders ---------------------------------------------------------

    def scenario_obj(self) -> Scenario:
        return Scenario(self.scenario, nu_F=self.nu_F, lambda_F=self.lambda_F, mu_F=self.mu_F,
                        mu_int=self.mu_int, eta_F=self.eta_F, eta_int=self.eta_int,
                        mu_ext=self.mu_ext, eta_ext=self.eta_ext)

    def eos(self) -> EosParams:
        return EosParams(self.a, self.gamma)

    def initial_data(self) -> InitialData:
        return InitialData(self.initial, self.rho_fluid, self.rho_solid,
                           self.vortex_amplitude, self.field_amplitude)

    def run_config(self, **changes) -> RunConfig:
        kw = dict(T=self.T, cfl=self.cfl, dt_min=self.dt_min, dt_max=self.dt_max, cg_tol=self.cg_tol,
                  cg_maxit=self.cg_maxit, output_every=self.output_every,
                  snapshot_times=tuple(self.snapshot_times), snapshot_every=self.snapshot_every,
                  limiter=self.limiter, dt_fixed=self.dt_fixed, max_steps=self.max_steps)
        kw.update(changes)
        return RunConfig(**kw)

    def build_model(self, epsilon: float | None = None) -> Model:
        eps = self.epsilon if epsilon is None else epsilon
        grid = build_grid(self.d, self.L, self.cells)
        region = classify_regions(grid, self.R_outer, self.R_inner)
        coeffs = penalized_coefficients(region, self.scenario_obj(), eps, self.transition_cells)
        return Model(grid, region, coeffs, self.eos())

    def replace(self, **changes) -> "Config":
        data = asdict(self)
        data.update(changes)
        return Config(**data)

    def echo(self) -> dict:
        """Effective configuration grouped by section (JSON-serializable)."""
        out = {s: {} for s in SECTIONS}
        for f in fields(self):
            v = getattr(self, f.name)
            out[SCHEMA[f.name][0]][f.name] = list(v) if isinstance(v, tuple) else v
        return out

    def echo_json(self) -> str:
        return json.dumps(self.echo(), sort_keys=True)


def _canonical(key: str) -> str:
    k = key.strip()
    if k in SCHEMA:
        return k
    if k.lower() in _ALIASES:
        return _ALIASES[k.lower()]
    raise ConfigError(f"unknown key '{key}'")


def _parse_value(key: str, text: str):
    parser = SCHEMA[key][1]
    try:
        return parser(text.strip())
    except ValueError:
        kind = getattr(parser, "__name__", "value").lstrip("_")
        raise ConfigError(f"type mismatch for '{key}': cannot read {text.strip()!r} as {kind}") from None


def parse_overrides(overrides) -> dict:
    out = {}
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        section = None
        if "." in key:
            section, key = key.split(".", 1)
        key = _canonical(key)
        if section is not None and section.strip() != SCHEMA[key][0]:
            raise ConfigError(f"key '{key}' belongs to section [{SCHEMA[key][0]}], not [{section}]")
        out[key] = _parse_value(key, value)
    return out


def parse_text(text: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(f"[{_TOP}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    out = {}
    for section in cp.sections():
        if section != _TOP and section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for raw, value in cp.items(section):
            key = _canonical(raw)
            if section != _TOP and SCHEMA[key][0] != section:
                raise ConfigError(f"key '{key}' belongs to section [{SCHEMA[key][0]}], not [{section}]")
            if key in out:
                raise ConfigError(f"key '{key}' given twice")
            out[key] = _parse_value(key, value)
    return out


def load_config(path=None, overrides=()) -> Config:
    """Read ``path`` (may be ``None``), apply ``overrides`` and validate."""
    values = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"config file not found: {p}")
        values.update(parse_text(p.read_text()))
    values.update(parse_overrides(overrides))
    if "scenario" not in values:
        raise ConfigError("missing required key 'scenario'")
    return Config(**values)


def config_from_echo(echo: dict) -> Config:
    flat = {}
    for section in echo.values():
        for k, v in section.items():
            flat[k] = tuple(v) if isinstance(v, list) else v
    return Config(**flat)
