"""De Broglie-Bohm machinery.

Phase-gradient (Bohm momentum) fields, velocity fields including the
momentum-coupling cross term, the quantum potential, off-grid velocity
evaluation, and probe-trajectory integration with a dual-step convergence
filter.

Node handling: grid cells with |Phi|^2 below EPS_NODE times the grid maximum
are flagged invalid.  A probe whose interpolation stencil touches a flagged
cell freezes with NodeContact status instead of receiving a capped velocity.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFieldError, ScheduleError
from .grid import (TWO_PI, GridSpec, ModelParams, Representation, WaveField,
                   transform)

# relative |Phi|^2 threshold below which a cell counts as a node
EPS_NODE = 1e-12


# ---------------------------------------------------------------------------
# velocity and quantum-potential fields

def _spectral_fields(grid: GridSpec, mom_amps: np.ndarray):
    """Position amplitudes and their spectral q-derivatives from momentum
    amplitudes (FFT storage order)."""
    root = np.sqrt(grid.size())
    m1 = grid.m1[:, None]
    m2 = grid.m2[None, :]
    pos = np.fft.ifft2(mom_amps) * root
    d1 = np.fft.ifft2(1j * m1 * mom_amps) * root
    d2 = np.fft.ifft2(1j * m2 * mom_amps) * root
    return pos, d1, d2


def _gradients(grid: GridSpec, mom_amps: np.ndarray):
    pos, d1, d2 = _spectral_fields(grid, mom_amps)
    dens = np.abs(pos) ** 2
    peak = dens.max()
    if peak == 0.0:
        raise DegenerateFieldError("wave field is identically zero")
    valid = dens >= EPS_NODE * peak
    safe = np.where(valid, dens, 1.0)
    s1 = grid.hbar * np.imag(np.conj(pos) * d1) / safe
    s2 = grid.hbar * np.imag(np.conj(pos) * d2) / safe
    s1[~valid] = 0.0
    s2[~valid] = 0.0
    return s1, s2, valid


def phase_gradient(field: WaveField):
    """Bohm momentum grids (dS/dq1, dS/dq2) and the node-validity mask.

    Computed as hbar * Im[Phi^* dPhi/dq_i] / |Phi|^2 with spectral
    derivatives; entries at node-flagged cells are zeroed and masked.
    """
    mom = transform(field, Representation.MOMENTUM)
    return _gradients(field.grid, mom.amplitudes)


def velocity_field(field: WaveField, params: ModelParams):
    """Velocity grids (v1, v2) = (S1 + c_pp S2, S2 + c_pp S1) plus mask."""
    s1, s2, valid = phase_gradient(field)
    return s1 + params.c_pp * s2, s2 + params.c_pp * s1, valid


@dataclass(frozen=True)
class QuantumPotentialField:
    """Quantum potential on the grid; node-adjacent entries are masked."""

    values: np.ndarray
    valid: np.ndarray


def quantum_potential(field: WaveField, params: ModelParams) -> QuantumPotentialField:
    """-(hbar^2 / 2R)(R_q1q1 + R_q2q2 + 2 c_pp R_q1q2) with R = |Phi|.

    Derivatives of R are spectral.  Identically zero for any plane wave.
    """
    pos = transform(field, Representation.POSITION)
    g = pos.grid
    r = np.abs(pos.amplitudes)
    peak = r.max()
    if peak == 0.0:
        raise DegenerateFieldError("wave field is identically zero")
    valid = r ** 2 >= EPS_NODE * peak ** 2
    m1 = g.m1[:, None]
    m2 = g.m2[None, :]
    rk = np.fft.fft2(r)
    r11 = np.real(np.fft.ifft2(-(m1 ** 2) * rk))
    r22 = np.real(np.fft.ifft2(-(m2 ** 2) * rk))
    r12 = np.real(np.fft.ifft2(-(m1 * m2) * rk))
    safe = np.where(valid, r, 1.0)
    vq = -0.5 * g.hbar ** 2 * (r11 + r22 + 2.0 * params.c_pp * r12) / safe
    vq[~valid] = 0.0
    return QuantumPotentialField(values=vq, valid=valid)


# ---------------------------------------------------------------------------
# off-grid evaluation

@dataclass(frozen=True)
class VelocitySample:
    v1: float
    v2: float
    valid: bool


@dataclass(frozen=True)
class FieldContext:
    """Precomputed velocity grids of one field snapshot, ready to interpolate."""

    grid: GridSpec
    v1: np.ndarray
    v2: np.ndarray
    valid: np.ndarray
    time: float = 0.0


def velocity_context(field: WaveField, params: ModelParams) -> FieldContext:
    v1, v2, valid = velocity_field(field, params)
    return FieldContext(field.grid, v1, v2, valid, field.time)


def _interp(ctx: FieldContext, q1: np.ndarray, q2: np.ndarray):
    """Bilinear interpolation with periodic wraparound; a sample is invalid
    if any stencil corner is node-flagged."""
    g = ctx.grid
    x = np.mod(q1, TWO_PI) / g.dq1
    y = np.mod(q2, TWO_PI) / g.dq2
    i0 = np.floor(x).astype(np.intp) % g.n1
    j0 = np.floor(y).astype(np.intp) % g.n2
    i1 = (i0 + 1) % g.n1
    j1 = (j0 + 1) % g.n2
    fx = x - np.floor(x)
    fy = y - np.floor(y)
    w00 = (1.0 - fx) * (1.0 - fy)
    w10 = fx * (1.0 - fy)
    w01 = (1.0 - fx) * fy
    w11 = fx * fy
    v1 = (w00 * ctx.v1[i0, j0] + w10 * ctx.v1[i1, j0]
          + w01 * ctx.v1[i0, j1] + w11 * ctx.v1[i1, j1])
    v2 = (w00 * ctx.v2[i0, j0] + w10 * ctx.v2[i1, j0]
          + w01 * ctx.v2[i0, j1] + w11 * ctx.v2[i1, j1])
    ok = (ctx.valid[i0, j0] & ctx.valid[i1, j0]
          & ctx.valid[i0, j1] & ctx.valid[i1, j1])
    return v1, v2, ok


def eval_velocity(ctx: FieldContext, q1: float, q2: float) -> VelocitySample:
    """Bilinearly interpolated velocity at one point (periodic wraparound)."""
    v1, v2, ok = _interp(ctx, np.asarray([q1], float), np.asarray([q2], float))
    return VelocitySample(float(v1[0]), float(v2[0]), bool(ok[0]))


def eval_velocity_fourier(field: WaveField, params: ModelParams,
                          q1: float, q2: float) -> VelocitySample:
    """Exact band-limited velocity by direct Fourier summation.

    Validation oracle for the bilinear path; not meant for the hot loop.
    """
    g = field.grid
    mom = transform(field, Representation.MOMENTUM)
    e1 = np.exp(1j * g.m1 * (q1 % TWO_PI))
    e2 = np.exp(1j * g.m2 * (q2 % TWO_PI))
    root = np.sqrt(g.size())
    phi = e1 @ mom.amplitudes @ e2 / root
    dphi1 = (1j * g.m1 * e1) @ mom.amplitudes @ e2 / root
    dphi2 = e1 @ mom.amplitudes @ (1j * g.m2 * e2) / root
    dens = abs(phi) ** 2
    peak = np.max(np.abs(mom.amplitudes)) ** 2  # conservative scale
    if dens < EPS_NODE * peak:
        return VelocitySample(0.0, 0.0, False)
    s1 = g.hbar * np.imag(np.conj(phi) * dphi1) / dens
    s2 = g.hbar * np.imag(np.conj(phi) * dphi2) / dens
    return VelocitySample(float(s1 + params.c_pp * s2),
                          float(s2 + params.c_pp * s1), True)


# ---------------------------------------------------------------------------
# probes

class ProbeStatus(enum.IntEnum):
    ACTIVE = 0
    REJECTED = 1
    NODE_CONTACT = 2


@dataclass(frozen=True)
class Probe:
    id: int
    q1: float
    q2: float
    status: ProbeStatus


@dataclass
class ProbeSet:
    """Bohmian probe particles with unwrapped coordinates.

    All probes share one timestamp.  `history`, when enabled, holds
    (time, q1 array, q2 array) samples at strictly increasing times.
    """

    q1: np.ndarray
    q2: np.ndarray
    status: np.ndarray
    ids: np.ndarray
    time: float = 0.0
    history: list | None = None

    @classmethod
    def from_positions(cls, q1, q2, time: float = 0.0,
                       record_history: bool = False) -> "ProbeSet":
        q1 = np.asarray(q1, float).copy()
        q2 = np.asarray(q2, float).copy()
        if q1.shape != q2.shape or q1.ndim != 1:
            raise ValueError("q1 and q2 must be 1-d arrays of equal length")
        n = q1.size
        hist = [(time, q1.copy(), q2.copy())] if record_history else None
        return cls(q1, q2, np.zeros(n, dtype=np.int8),
                   np.arange(n), time, hist)

    def __len__(self) -> int:
        return self.q1.size

    def probes(self):
        for i in range(len(self)):
            yield Probe(int(self.ids[i]), float(self.q1[i]),
                        float(self.q2[i]), ProbeStatus(self.status[i]))

    def copy(self) -> "ProbeSet":
        return ProbeSet(self.q1.copy(), self.q2.copy(), self.status.copy(),
                        self.ids.copy(), self.time,
                        None if self.history is None else list(self.history))


class _ContextCache:
    """Velocity contexts at RK stage times, shared across all probes.

    Stage times are indexed by half-steps j (tau = t0 + j*dt/2) so that the
    endpoint of one step is reused as the start of the next.  The free-flight
    angle grid and derivative multipliers are precomputed once.
    """

    def __init__(self, post_kick: WaveField, params: ModelParams,
                 half_step: float | None = None):
        mom = transform(post_kick, Representation.MOMENTUM)
        g = post_kick.grid
        self._grid = g
        self._amps = mom.amplitudes
        self._params = params
        m1 = g.m1[:, None].astype(float)
        m2 = g.m2[None, :].astype(float)
        self._angle = 0.5 * g.hbar * (m1 ** 2 + m2 ** 2
                                      + 2.0 * params.c_pp * m1 * m2)
        self._im1 = 1j * m1
        self._im2 = 1j * m2
        self._cache: dict = {}
        # consecutive half-step stage times advance by a fixed unit-modulus
        # factor; multiplying beats re-exponentiating the whole angle grid
        self._stepper = (np.exp(-1j * np.mod(self._angle * half_step, TWO_PI))
                         if half_step is not None else None)
        self._last: tuple | None = None

    def _free_amps(self, key, tau: float) -> np.ndarray:
        if (self._stepper is not None and isinstance(key, int)
                and self._last is not None and key == self._last[0] + 1):
            amps = self._last[1] * self._stepper
        else:
            amps = self._amps * np.exp(-1j * np.mod(self._angle * tau, TWO_PI))
        if isinstance(key, int):
            self._last = (key, amps)
        return amps

    def at(self, key, tau: float) -> FieldContext:
        ctx = self._cache.get(key)
        if ctx is None:
            tau = min(max(tau, 0.0), self._params.T)
            g = self._grid
            amps = self._free_amps(key, tau)
            pos = np.fft.ifft2(amps)
            d1 = np.fft.ifft2(self._im1 * amps)
            d2 = np.fft.ifft2(self._im2 * amps)
            # the 1/sqrt(N) normalization cancels in the S_i ratio
            dens = pos.real ** 2 + pos.imag ** 2
            valid = dens >= EPS_NODE * dens.max()
            safe = np.where(valid, dens, 1.0)
            s1 = g.hbar * (pos.real * d1.imag - pos.imag * d1.real) / safe
            s2 = g.hbar * (pos.real * d2.imag - pos.imag * d2.real) / safe
            s1[~valid] = 0.0
            s2[~valid] = 0.0
            c = self._params.c_pp
            ctx = FieldContext(g, s1 + c * s2, s2 + c * s1, valid, tau)
            if len(self._cache) > 4:
                self._cache.clear()
            self._cache[key] = ctx
        return ctx


def advance_probes(probes: ProbeSet, post_kick: WaveField, params: ModelParams,
                   t0: float, t1: float, dt: float) -> ProbeSet:
    """RK4 advection of probes through one inter-kick interval.

    t0, t1 are times relative to the post-kick state (both in [0, T]); dt
    carries the sign of t1 - t0.  Velocity grids are computed once per
    distinct stage time and shared across all probes.  Probes touching a
    node-flagged stencil freeze with NodeContact status.
    """
    T = params.T
    span = t1 - t0
    if span == 0.0:
        return probes.copy()
    if not (0.0 <= t0 <= T and 0.0 <= t1 <= T):
        raise ScheduleError(
            f"interval [{t0}, {t1}] must lie within one inter-kick span [0, {T}]")
    if dt == 0.0 or np.sign(dt) != np.sign(span):
        raise ScheduleError(f"dt = {dt} does not match direction of [{t0}, {t1}]")

    cache = _ContextCache(post_kick, params, half_step=dt / 2.0)
    out = probes.copy()
    q1, q2, status = out.q1, out.q2, out.status

    ratio = span / dt
    n_full = int(np.floor(ratio + 1e-9))
    rem = span - n_full * dt

    def tau_of(j: int) -> float:
        return t0 + j * (dt / 2.0)

    steps = [(2 * k, dt) for k in range(n_full)]
    if abs(rem) > abs(dt) * 1e-9:
        steps.append(("rem", rem))

    for start, h in steps:
        idx = np.flatnonzero(status == ProbeStatus.ACTIVE)
        if idx.size == 0:
            break
        if start == "rem":
            ta = t0 + n_full * dt
            ka, kb, kc = ("rem", 0), ("rem", 1), ("rem", 2)
            tb, tc = ta + h / 2.0, ta + h
        else:
            ka, kb, kc = start, start + 1, start + 2
            ta, tb, tc = tau_of(ka), tau_of(kb), tau_of(kc)
        ca, cb, cc = cache.at(ka, ta), cache.at(kb, tb), cache.at(kc, tc)
        x, y = q1[idx], q2[idx]
        a1, a2, oka = _interp(ca, x, y)
        b1, b2, okb = _interp(cb, x + 0.5 * h * a1, y + 0.5 * h * a2)
        c1, c2, okc = _interp(cb, x + 0.5 * h * b1, y + 0.5 * h * b2)
        d1, d2, okd = _interp(cc, x + h * c1, y + h * c2)
        ok = oka & okb & okc & okd
        status[idx[~ok]] = ProbeStatus.NODE_CONTACT
        good = idx[ok]
        q1[good] = x[ok] + (h / 6.0) * (a1 + 2 * b1 + 2 * c1 + d1)[ok]
        q2[good] = y[ok] + (h / 6.0) * (a2 + 2 * b2 + 2 * c2 + d2)[ok]

    out.time = probes.time + span
    if out.history is not None:
        out.history.append((out.time, q1.copy(), q2.copy()))
    return out


# ---------------------------------------------------------------------------
# kick-period itineraries and the dual-step convergence filter

@dataclass(frozen=True)
class Segment:
    """One kick period of trajectory integration.

    `period` selects the post-kick field at t = period*T + 0; `forward`
    chooses tau running 0 -> T or T -> 0.
    """

    period: int
    forward: bool = True


@dataclass
class TrajectorySchedule:
    """Itinerary over whole kick periods, with the fields needed to run it.

    Backward segments trace the seeded probes into the past; forward
    segments trace them into the future.  Both chains start from the
    seeding positions.
    """

    params: ModelParams
    fields: dict
    segments: tuple

    def seed_period(self) -> int:
        fwd = [s.period for s in self.segments if s.forward]
        bwd = [s.period for s in self.segments if not s.forward]
        if fwd:
            return min(fwd)
        if bwd:
            return max(bwd) + 1
        raise ScheduleError("schedule has no segments")


def _run_itinerary(probes: ProbeSet, schedule: TrajectorySchedule, dt: float):
    """Run the itinerary; returns (boundary positions keyed by kick index,
    combined status array)."""
    params = schedule.params
    T = params.T
    seed_n = schedule.seed_period()
    boundaries = {seed_n: (probes.q1.copy(), probes.q2.copy())}
    status = probes.status.copy()

    bwd = sorted((s for s in schedule.segments if not s.forward),
                 key=lambda s: -s.period)
    fwd = sorted((s for s in schedule.segments if s.forward),
                 key=lambda s: s.period)
    if bwd and bwd[0].period != seed_n - 1:
        raise ScheduleError("backward segments must start at the seed period - 1")
    if fwd and fwd[0].period != seed_n:
        raise ScheduleError("forward segments must start at the seed period")

    cur = probes.copy()
    for s in bwd:
        cur = advance_probes(cur, schedule.fields[s.period], params, T, 0.0, -abs(dt))
        boundaries[s.period] = (cur.q1.copy(), cur.q2.copy())
        status = np.maximum(status, cur.status)
    cur = probes.copy()
    for s in fwd:
        cur = advance_probes(cur, schedule.fields[s.period], params, 0.0, T, abs(dt))
        boundaries[s.period + 1] = (cur.q1.copy(), cur.q2.copy())
        status = np.maximum(status, cur.status)
    return boundaries, status


def _boundary_velocities(boundaries: dict, T: float) -> dict:
    """Per-period averaged velocities (q_{n+1} - q_n)/T from boundary maps."""
    vels = {}
    for n in sorted(boundaries):
        if n + 1 in boundaries:
            q1a, q2a = boundaries[n]
            q1b, q2b = boundaries[n + 1]
            vels[n] = ((q1b - q1a) / T, (q2b - q2a) / T)
    return vels


def run_with_convergence(probes: ProbeSet, schedule: TrajectorySchedule,
                         dt: float, threshold: float) -> ProbeSet:
    """Dual-step trajectory run with a per-period velocity agreement filter.

    The itinerary is run twice, with steps dt and dt/2.  A probe whose
    per-period averaged velocities differ by more than `threshold` (units
    1/T, max over periods and components) between the two runs is marked
    Rejected.  Surviving probes carry the dt/2 result; the returned set's
    history holds the dt/2 boundary positions in chronological order.
    """
    T = schedule.params.T
    b_coarse, st_coarse = _run_itinerary(probes, schedule, dt)
    b_fine, st_fine = _run_itinerary(probes, schedule, dt / 2.0)

    v_coarse = _boundary_velocities(b_coarse, T)
    v_fine = _boundary_velocities(b_fine, T)
    dev = np.zeros(len(probes))
    for n in v_fine:
        for axis in (0, 1):
            dev = np.maximum(dev, np.abs(v_coarse[n][axis] - v_fine[n][axis]))

    status = np.maximum(st_coarse, st_fine).astype(np.int8)
    active = status == ProbeStatus.ACTIVE
    status[active & (dev > threshold)] = ProbeStatus.REJECTED

    last = max(b_fine)
    q1, q2 = b_fine[last]
    history = [(n * T + probes.time - schedule.seed_period() * T,
                b_fine[n][0].copy(), b_fine[n][1].copy())
               for n in sorted(b_fine)]
    return ProbeSet(q1.copy(), q2.copy(), status, probes.ids.copy(),
                    probes.time + (last - schedule.seed_period()) * T, history)
