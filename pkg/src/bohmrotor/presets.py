"""Experiment presets and CSV emission.

Each preset runs one reproduction experiment end to end and writes
plot-ready CSV files.  Every file starts with a ``#``-prefixed metadata
block (config hash and parameter echo) followed by a header row.  All
numeric output uses 17 significant digits, locale-independent, so a fixed
(config, seed) pair produces byte-identical files.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bohm import (ProbeSet, ProbeStatus, Segment, TrajectorySchedule,
                   advance_probes, run_with_convergence)
from .config import ExperimentConfig
from .errors import ConfigurationError
from .evolve import step_period
from .grid import (TWO_PI, Representation, WaveField, init_momentum_eigenstate,
                   transform)
from .classical import ClassicalEnsemble, ensemble_moments, step_ensemble
from .observables import bohm_momentum_distribution, momentum_marginal, momentum_moment


# ---------------------------------------------------------------------------
# probe seeding

@dataclass(frozen=True)
class UniformLine:
    """count probes equally spaced along q1 on the surface q2 = q2_value."""
    q2_value: float
    count: int


@dataclass(frozen=True)
class UniformGrid:
    """rows surfaces q2 = 2*pi*i/rows, each carrying cols probes along q1."""
    rows: int
    cols: int


@dataclass(frozen=True)
class BornSample:
    """count probes drawn from |Phi|^2 (inverse CDF over cells + jitter)."""
    count: int


def parse_layout(text: str):
    """Parse 'line:<q2>:<count>', 'grid:<rows>:<cols>', or 'born:<count>'."""
    parts = text.split(":")
    try:
        if parts[0] == "line" and len(parts) == 3:
            return UniformLine(float(parts[1]), int(parts[2]))
        if parts[0] == "grid" and len(parts) == 3:
            return UniformGrid(int(parts[1]), int(parts[2]))
        if parts[0] == "born" and len(parts) == 2:
            return BornSample(int(parts[1]))
    except ValueError as exc:
        raise ConfigurationError(f"bad probe layout {text!r}") from exc
    raise ConfigurationError(f"bad probe layout {text!r}")


def seed_probes(layout, field: WaveField, seed: int) -> ProbeSet:
    """Deterministic probe seeding; only born_sample consumes randomness."""
    if isinstance(layout, UniformLine):
        if layout.count <= 0:
            raise ConfigurationError("probe count must be positive")
        q1 = TWO_PI * np.arange(layout.count) / layout.count
        q2 = np.full(layout.count, layout.q2_value)
        return ProbeSet.from_positions(q1, q2)
    if isinstance(layout, UniformGrid):
        if layout.rows <= 0 or layout.cols <= 0:
            raise ConfigurationError("probe counts must be positive")
        q2r = TWO_PI * np.arange(layout.rows) / layout.rows
        q1c = TWO_PI * np.arange(layout.cols) / layout.cols
        q1, q2 = np.meshgrid(q1c, q2r, indexing="ij")
        return ProbeSet.from_positions(q1.ravel(), q2.ravel())
    if isinstance(layout, BornSample):
        if layout.count <= 0:
            raise ConfigurationError("probe count must be positive")
        pos = transform(field, Representation.POSITION)
        g = pos.grid
        w = np.abs(pos.amplitudes.ravel()) ** 2
        cdf = np.cumsum(w)
        cdf /= cdf[-1]
        rng = np.random.default_rng(seed)
        # stratified inverse-CDF draws: one uniform per equal-probability
        # stratum keeps the empirical cell counts close to |Phi|^2
        u = (np.arange(layout.count) + rng.random(layout.count)) / layout.count
        cells = np.searchsorted(cdf, u, side="left")
        i, j = np.unravel_index(cells, (g.n1, g.n2))
        q1 = (i + rng.random(layout.count)) * g.dq1
        q2 = (j + rng.random(layout.count)) * g.dq2
        return ProbeSet.from_positions(q1, q2)
    raise ConfigurationError(f"unknown probe layout {layout!r}")


# ---------------------------------------------------------------------------
# CSV plumbing

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _write_csv(path: Path, columns: list[str], rows, cfg: ExperimentConfig,
               extra_meta: list[tuple[str, object]] | None = None) -> Path:
    lines = ["# bohmrotor output", f"# config_hash = {cfg.hash()}"]
    lines += [f"# {key} = {val}" for key, val in cfg.items()]
    for key, val in extra_meta or []:
        lines.append(f"# {key} = {_fmt(val)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# shared pieces

def _initial_field(cfg: ExperimentConfig) -> WaveField:
    return init_momentum_eigenstate(cfg.grid(), cfg.initial_spec())


def _evolve_to(field: WaveField, params, n: int, collect: dict | None = None) -> WaveField:
    """Advance n kick periods; optionally store post-kick states by index."""
    if collect is not None and 0 in collect:
        collect[0] = field
    for i in range(n):
        field = step_period(field, params)
        if collect is not None and (i + 1) in collect:
            collect[i + 1] = field
    return field


def _model_runs(cfg: ExperimentConfig):
    return (("No", cfg.params(single_rotor=True)),
            ("P-P", cfg.params()))


def _probe_rows(tag: str, pset: ProbeSet, t: float):
    for i in range(len(pset)):
        yield (int(pset.ids[i]), tag, t, pset.q1[i], pset.q2[i],
               ProbeStatus(pset.status[i]).name.lower())


def _advance_with_snapshots(pset, field, params, splits: int, dt: float):
    """Advance one period in `splits` chunks, yielding (tau, probe set)."""
    T = params.T
    for j in range(splits):
        pset = advance_probes(pset, field, params, j * T / splits,
                              (j + 1) * T / splits, dt)
        yield (j + 1) * T / splits, pset


# ---------------------------------------------------------------------------
# presets

def _preset_fig1(cfg: ExperimentConfig, out: Path) -> list[Path]:
    rows = []
    for tag, params in _model_runs(cfg):
        field = _initial_field(cfg)
        rows.append((0, momentum_moment(field), tag))
        for n in range(1, cfg.n_periods + 1):
            field = step_period(field, params)
            rows.append((n, momentum_moment(field), tag))
    return [_write_csv(out / "q_moment.csv", ["n", "Q", "model_tag"], rows, cfg)]


def _preset_fig2(cfg: ExperimentConfig, out: Path) -> list[Path]:
    field = _evolve_to(_initial_field(cfg), cfg.params(single_rotor=True),
                       cfg.n_periods)
    hist = momentum_marginal(field)
    rows = list(zip(hist.centers(), hist.masses))
    return [_write_csv(out / "marginal.csv", ["p1", "mass"], rows, cfg,
                       [("n", cfg.n_periods), ("model_tag", "No")])]


def _preset_fig7(cfg: ExperimentConfig, out: Path) -> list[Path]:
    field = _evolve_to(_initial_field(cfg), cfg.params(), cfg.n_periods)
    hist = bohm_momentum_distribution(field)
    rows = list(zip(hist.centers(), hist.masses))
    return [_write_csv(out / "fq.csv", ["p1", "mass"], rows, cfg,
                       [("n", cfg.n_periods), ("model_tag", "P-P"),
                        ("excluded_mass", hist.excluded)])]


def _trajectory_preset(cfg: ExperimentConfig, out: Path, params,
                       groups) -> list[Path]:
    """Common body of figs 3 and 4: probes over [T, 2T], sampled at 0.1T."""
    field_t1 = _evolve_to(_initial_field(cfg), params, 1)
    dt = cfg.traj_dt * cfg.T
    rows = []
    for tag, layout in groups:
        pset = seed_probes(layout, field_t1, cfg.seed)
        pset.time = cfg.T
        rows.extend(_probe_rows(tag, pset, cfg.T))
        for tau, pset in _advance_with_snapshots(pset, field_t1, params, 10, dt):
            rows.extend(_probe_rows(tag, pset, cfg.T + tau))
    cols = ["probe_id", "group", "t", "q1", "q2", "status"]
    return [_write_csv(out / "trajectories.csv", cols, rows, cfg)]


def _preset_fig3a(cfg: ExperimentConfig, out: Path) -> list[Path]:
    layout = parse_layout(cfg.probe_layout) if cfg.probe_layout \
        else UniformLine(0.0, 20)
    return _trajectory_preset(cfg, out, cfg.params(single_rotor=True),
                              [("a", layout)])


def _preset_fig3bc(cfg: ExperimentConfig, out: Path) -> list[Path]:
    count = parse_layout(cfg.probe_layout).count if cfg.probe_layout else 20
    return _trajectory_preset(cfg, out, cfg.params(),
                              [("b", UniformLine(np.pi, count)),
                               ("c", UniformLine(0.0, count))])


def _preset_fig4(cfg: ExperimentConfig, out: Path) -> list[Path]:
    count = parse_layout(cfg.probe_layout).count if cfg.probe_layout else 500
    return _trajectory_preset(cfg, out, cfg.params(),
                              [("b", UniformLine(np.pi, count)),
                               ("c", UniformLine(0.0, count))])


def _preset_fig5(cfg: ExperimentConfig, out: Path) -> list[Path]:
    params = cfg.params()
    T = params.T
    collect = {29: None, 30: None}
    n_evolve = max(collect)
    _evolve_to(_initial_field(cfg), params, n_evolve, collect)
    layout = parse_layout(cfg.probe_layout) if cfg.probe_layout \
        else UniformGrid(20, 25)
    pset = seed_probes(layout, collect[30], cfg.seed)
    pset.time = 30 * T
    schedule = TrajectorySchedule(
        params, {29: collect[29], 30: collect[30]},
        (Segment(29, forward=False), Segment(30, forward=True)))
    result = run_with_convergence(pset, schedule, cfg.traj_dt * T,
                                  cfg.reject_threshold / T)
    q29 = result.history[0]
    q30 = result.history[1]
    q31 = result.history[2]
    v29_1 = (q30[1] - q29[1]) / T
    v30_1 = (q31[1] - q30[1]) / T
    f30_1 = (v30_1 - v29_1) / T
    rows = []
    for i in range(len(result)):
        status = ProbeStatus(result.status[i])
        rows.append((int(result.ids[i]), q30[1][i], q30[2][i],
                     v29_1[i], v30_1[i], f30_1[i],
                     status == ProbeStatus.ACTIVE, status.name.lower()))
    cols = ["probe_id", "q1_seed", "q2_seed", "v1_29", "v1_30", "f1_30",
            "converged", "status"]
    return [_write_csv(out / "force.csv", cols, rows, cfg)]


def _preset_fig6(cfg: ExperimentConfig, out: Path) -> list[Path]:
    params = cfg.params()
    T = params.T
    field = _evolve_to(_initial_field(cfg), params, 1)
    layout = parse_layout(cfg.probe_layout) if cfg.probe_layout \
        else UniformGrid(10, 500)
    pset = seed_probes(layout, field, cfg.seed)
    pset.time = T
    rows = list(_probe_rows("all", pset, T))
    for n in (2, 3):
        pset = advance_probes(pset, field, params, 0.0, T, cfg.traj_dt * T)
        rows.extend(_probe_rows("all", pset, n * T))
        field = step_period(field, params)
    cols = ["probe_id", "group", "t", "q1", "q2", "status"]
    return [_write_csv(out / "positions.csv", cols, rows, cfg)]


def _preset_classical(cfg: ExperimentConfig, out: Path) -> list[Path]:
    rows = []
    count = 1000
    for tag, params in _model_runs(cfg):
        rng = np.random.default_rng(cfg.seed)
        q1 = rng.random(count) * TWO_PI
        q2 = rng.random(count) * TWO_PI
        p1 = np.full(count, cfg.p0)
        p2 = np.full(count, cfg.p0 if tag == "P-P" else 0.0)
        ens = ClassicalEnsemble.from_arrays(q1, p1, q2, p2)
        mean, var = ensemble_moments(ens)
        rows.append((0, mean, var, tag))
        for n in range(1, cfg.n_periods + 1):
            ens = step_ensemble(ens, params)
            mean, var = ensemble_moments(ens)
            rows.append((n, mean, var, tag))
    cols = ["n", "mean_p1", "var_p1", "model_tag"]
    return [_write_csv(out / "classical.csv", cols, rows, cfg)]


PRESETS = {
    "fig1": _preset_fig1,
    "fig2": _preset_fig2,
    "fig3a": _preset_fig3a,
    "fig3bc": _preset_fig3bc,
    "fig4": _preset_fig4,
    "fig5": _preset_fig5,
    "fig6": _preset_fig6,
    "fig7": _preset_fig7,
    "classical": _preset_classical,
}


def run_preset(name: str, cfg: ExperimentConfig) -> list[Path]:
    """Run one experiment preset; returns the paths written."""
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    cfg.validate()
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(f"cannot create output directory {out}") from exc
    return PRESETS[name](cfg, out)
