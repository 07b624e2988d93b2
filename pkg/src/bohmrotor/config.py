"""Experiment configuration: defaults, config-file parsing, and overrides.

A config file is INI-style with sections [grid], [model], [initial], [run],
[output]; every key is also overridable on the command line via
``--set section.key=value``.  hbar is parameterized as 2*pi*a/n1 with
integer a so the reference value is exactly representable; an arbitrary
real hbar is accepted through the escape hatch key ``grid.hbar_exact``.
"""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import ConfigurationError
from .grid import GridSpec, InitialStateSpec, ModelParams, make_grid, snap_momentum

# named grid/step profiles; "paper" reproduces the reference resolution
PROFILES = {
    "desk": {"n1": 1024, "n2": 128, "a": 11, "traj_dt": 1e-3},
    "paper": {"n1": 4096, "n2": 512, "a": 43, "traj_dt": 2.5e-6},
}


@dataclass(frozen=True)
class ExperimentConfig:
    # grid
    n1: int = 1024
    n2: int = 128
    a: int = 11                      # hbar = 2*pi*a/n1
    hbar_exact: float | None = None  # overrides a when set
    # model
    k1: float = 2.0
    k2: float = 0.9
    T: float = 1.0
    c_pp: float = 0.2
    # initial state; m1/m2 default to the nearest lattice index of p0
    m1: int | None = None
    m2: int | None = None
    p0: float = np.pi / 2
    q_offset: float = np.pi / 4
    # run
    n_periods: int = 100
    traj_dt: float = 1e-3            # trajectory step, units of T
    reject_threshold: float = 0.1    # convergence filter, units 1/T
    seed: int = 12345
    probe_layout: str = ""           # empty -> preset default
    # output
    out_dir: str = "."
    preset: str = ""

    @property
    def hbar(self) -> float:
        if self.hbar_exact is not None:
            return self.hbar_exact
        return 2.0 * np.pi * self.a / self.n1

    def grid(self) -> GridSpec:
        return make_grid(self.n1, self.n2, self.hbar)

    def params(self, single_rotor: bool = False) -> ModelParams:
        if single_rotor:
            return ModelParams(self.k1, 0.0, self.T, 0.0)
        return ModelParams(self.k1, self.k2, self.T, self.c_pp)

    def initial_spec(self) -> InitialStateSpec:
        g = self.grid()
        m1 = self.m1 if self.m1 is not None else snap_momentum(g, self.p0, axis=1)
        m2 = self.m2 if self.m2 is not None else snap_momentum(g, self.p0, axis=2)
        return InitialStateSpec(m1=m1, m2=m2, q_offset=self.q_offset)

    def validate(self) -> None:
        self.grid()
        self.params()
        self.initial_spec()
        if self.n_periods < 1:
            raise ConfigurationError("run.n_periods must be >= 1")
        if not self.traj_dt > 0:
            raise ConfigurationError("run.traj_dt must be positive")
        if not self.reject_threshold > 0:
            raise ConfigurationError("run.reject_threshold must be positive")

    def items(self) -> list[tuple[str, object]]:
        # out_dir is deliberately excluded: outputs must not depend on
        # where they are written
        sect = _SECTION_OF
        return sorted((f"{sect[f.name]}.{f.name}", getattr(self, f.name))
                      for f in fields(self) if f.name != "out_dir")

    def hash(self) -> str:
        blob = ";".join(f"{k}={v!r}" for k, v in self.items())
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_SECTION_OF = {
    "n1": "grid", "n2": "grid", "a": "grid", "hbar_exact": "grid",
    "k1": "model", "k2": "model", "T": "model", "c_pp": "model",
    "m1": "initial", "m2": "initial", "p0": "initial", "q_offset": "initial",
    "n_periods": "run", "traj_dt": "run", "reject_threshold": "run",
    "seed": "run", "probe_layout": "run",
    "out_dir": "output", "preset": "output",
}

_INT_KEYS = {"n1", "n2", "a", "m1", "m2", "n_periods", "seed"}
_FLOAT_KEYS = {"hbar_exact", "k1", "k2", "T", "c_pp", "p0", "q_offset",
               "traj_dt", "reject_threshold"}


def _coerce(name: str, raw: str):
    raw = raw.strip()
    try:
        if name in _INT_KEYS:
            return int(raw)
        if name in _FLOAT_KEYS:
            return float(raw)
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {name}: {raw!r}") from exc
    return raw


def _apply(cfg: ExperimentConfig, dotted: dict[str, str]) -> ExperimentConfig:
    # profile expands first so explicit keys can still override it
    profile = dotted.pop("run.profile", None)
    if profile is not None:
        profile = profile.strip()
        if profile not in PROFILES:
            raise ConfigurationError(
                f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
        cfg = replace(cfg, **PROFILES[profile])
    updates = {}
    for key, raw in dotted.items():
        if "." not in key:
            raise ConfigurationError(f"override {key!r} must be section.key=value")
        section, name = key.split(".", 1)
        if _SECTION_OF.get(name) != section:
            raise ConfigurationError(f"unknown config key {key!r}")
        updates[name] = _coerce(name, raw)
    return replace(cfg, **updates)


def load_config(path: str | None = None,
                overrides: list[str] | None = None) -> ExperimentConfig:
    """Defaults, then the config file, then --set overrides, in that order."""
    cfg = ExperimentConfig()
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigurationError(f"cannot read config file {path}")
        dotted = {f"{sect}.{key}": val
                  for sect in parser.sections()
                  for key, val in parser.items(sect)}
        cfg = _apply(cfg, dotted)
    if overrides:
        dotted = {}
        for item in overrides:
            if "=" not in item:
                raise ConfigurationError(f"override {item!r} must be key=value")
            key, val = item.split("=", 1)
            dotted[key.strip()] = val
        cfg = _apply(cfg, dotted)
    return cfg
