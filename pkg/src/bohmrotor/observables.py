"""Measured quantities: momentum dispersion, marginals, the Bohm momentum
distribution, and per-trajectory averaged velocity / effective kick strength.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bohm import ProbeSet, ProbeStatus, phase_gradient
from .grid import Representation, WaveField, transform


@dataclass(frozen=True)
class MomentSeries:
    """Momentum dispersion Q per kick index, n strictly increasing."""

    entries: tuple  # of (n, Q)


@dataclass(frozen=True)
class Histogram1D:
    bin_edges: np.ndarray
    masses: np.ndarray
    total: float
    excluded: float = 0.0  # node-flagged or out-of-range mass, never redistributed

    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def momentum_moment(field: WaveField) -> float:
    """Momentum dispersion Q = <(p1 - <p1>)^2> of the field."""
    mom = transform(field, Representation.MOMENTUM)
    w = np.abs(mom.amplitudes) ** 2
    p1 = field.grid.p1[:, None]
    total = w.sum()
    mu = float((w * p1).sum() / total)
    return float((w * (p1 - mu) ** 2).sum() / total)


def _lattice_edges(grid) -> np.ndarray:
    n = grid.n1
    return grid.hbar * (np.arange(-n // 2, n // 2 + 1) - 0.5)


def momentum_marginal(field: WaveField) -> Histogram1D:
    """Momentum distribution over p1, mass per lattice value hbar*m1."""
    mom = transform(field, Representation.MOMENTUM)
    w = np.abs(mom.amplitudes) ** 2
    per_m1 = w.sum(axis=1)
    order = np.argsort(field.grid.m1, kind="stable")
    masses = per_m1[order]
    return Histogram1D(_lattice_edges(field.grid), masses, float(masses.sum()))


def bohm_momentum_distribution(field: WaveField,
                               bin_edges: np.ndarray | None = None) -> Histogram1D:
    """Distribution of the bare phase gradient dS/dq1 weighted by |Phi|^2.

    Uses the phase gradient, not the velocity: the coupling cross term does
    not enter.  Node-flagged cells and values outside the bin range are
    accumulated into `excluded`, never redistributed.
    """
    pos = transform(field, Representation.POSITION)
    s1, _, valid = phase_gradient(pos)
    w = np.abs(pos.amplitudes) ** 2
    if bin_edges is None:
        bin_edges = _lattice_edges(field.grid)
    bin_edges = np.asarray(bin_edges, float)
    masses, _ = np.histogram(s1[valid], bins=bin_edges, weights=w[valid])
    total_w = float(w.sum())
    excluded = total_w - float(masses.sum())
    return Histogram1D(bin_edges, masses, total_w, excluded)


def localization_fit(hist: Histogram1D, drop_frac: float = 0.05,
                     block: int = 16):
    """Fit ln(mass) vs |p1| on a momentum marginal; returns (slope, r_squared).

    Per-mode masses of a localized state fluctuate by O(1) factors around the
    exponential envelope, so the fit runs on block-averaged masses.  The
    outermost `drop_frac` of lattice points on each side is excluded before
    blocking, and empty blocks are skipped.
    """
    masses = np.asarray(hist.masses, float)
    p = hist.centers()
    n = masses.size
    drop = int(round(drop_frac * n))
    if drop:
        masses, p = masses[drop:-drop], p[drop:-drop]
    nb = masses.size // block
    masses = masses[:nb * block].reshape(nb, block).mean(axis=1)
    pabs = np.abs(p[:nb * block]).reshape(nb, block).mean(axis=1)
    keep = masses > 0.0
    x, y = pabs[keep], np.log(masses[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot
    return float(slope), float(r2)


@dataclass(frozen=True)
class TrajectoryRecord:
    """Unwrapped positions of one probe at consecutive kick indices."""

    probe_id: int
    ns: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    T: float = 1.0
    active: bool = True


def records_from_probeset(pset: ProbeSet, T: float) -> list[TrajectoryRecord]:
    """Build per-probe records from a ProbeSet history sampled at kick times."""
    if not pset.history:
        raise ValueError("probe set carries no history")
    times = np.array([t for t, _, _ in pset.history])
    ns = np.round(times / T).astype(int)
    q1 = np.stack([q for _, q, _ in pset.history])
    q2 = np.stack([q for _, _, q in pset.history])
    out = []
    for i in range(len(pset)):
        out.append(TrajectoryRecord(
            probe_id=int(pset.ids[i]), ns=ns, q1=q1[:, i], q2=q2[:, i], T=T,
            active=pset.status[i] == ProbeStatus.ACTIVE))
    return out


def _sample_index(record: TrajectoryRecord, n: int) -> int:
    hits = np.flatnonzero(record.ns == n)
    if hits.size == 0:
        raise ValueError(f"record {record.probe_id} has no sample at kick {n}")
    return int(hits[0])


def averaged_velocity(record: TrajectoryRecord, n: int, axis: int = 1) -> float:
    """V_i(n) = (q_{i,n+1} - q_{i,n}) / T from unwrapped positions."""
    if not record.active:
        raise ValueError(f"probe {record.probe_id} is not active (frozen or rejected)")
    q = record.q1 if axis == 1 else record.q2
    ia, ib = _sample_index(record, n), _sample_index(record, n + 1)
    return float((q[ib] - q[ia]) / record.T)


def effective_kick(record: TrajectoryRecord, n: int, axis: int = 1) -> float:
    """F_i(n) = (V_i(n) - V_i(n-1)) / T, the second position difference."""
    return (averaged_velocity(record, n, axis)
            - averaged_velocity(record, n - 1, axis)) / record.T
