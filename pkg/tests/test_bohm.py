import numpy as np
import pytest

from bohmrotor.bohm import (ProbeSet, ProbeStatus, Segment, TrajectorySchedule,
                            advance_probes, eval_velocity,
                            eval_velocity_fourier, phase_gradient,
                            quantum_potential, run_with_convergence,
                            velocity_context, velocity_field)
from bohmrotor.errors import ScheduleError
from bohmrotor.evolve import step_period
from bohmrotor.grid import (InitialStateSpec, ModelParams, Representation,
                            WaveField, init_momentum_eigenstate, make_grid)
from conftest import smooth_field

PARAMS = ModelParams(2.0, 0.9, 1.0, 0.2)


# ---------------------------------------------------------------------------
# field-level quantities

def test_phase_gradient_of_plane_wave_is_exact():
    g = make_grid(64, 32, 0.3)
    f = init_momentum_eigenstate(g, InitialStateSpec(7, -5))
    s1, s2, valid = phase_gradient(f)
    assert valid.all()
    assert np.abs(s1 - g.hbar * 7).max() < 1e-10
    assert np.abs(s2 - g.hbar * (-5)).max() < 1e-10


def test_velocity_field_applies_momentum_coupling():
    g = make_grid(32, 32, 0.5)
    f = init_momentum_eigenstate(g, InitialStateSpec(3, 1))
    v1, v2, valid = velocity_field(f, PARAMS)
    c = PARAMS.c_pp
    assert np.abs(v1 - g.hbar * (3 + c * 1)).max() < 1e-10
    assert np.abs(v2 - g.hbar * (1 + c * 3)).max() < 1e-10


def _fd_phase_gradient(g, f):
    """Finite-difference oracle: unwrap the phase along each axis and take
    central differences (interior points only)."""
    ang = np.angle(f.amplitudes)
    a1 = np.unwrap(ang, axis=0)
    a2 = np.unwrap(ang, axis=1)
    s1 = g.hbar * (a1[2:, :] - a1[:-2, :]) / (2 * g.dq1)
    s2 = g.hbar * (a2[:, 2:] - a2[:, :-2]) / (2 * g.dq2)
    return s1[:, 1:-1], s2[1:-1, :]


def test_phase_gradient_matches_finite_differences():
    errs = {}
    for n in (128, 256):
        g, f = smooth_field(n, n, 0.5, seed=3)
        s1, s2, valid = phase_gradient(f)
        assert valid.all()
        fd1, fd2 = _fd_phase_gradient(g, f)
        e1 = np.abs(s1[1:-1, 1:-1] - fd1).max()
        e2 = np.abs(s2[1:-1, 1:-1] - fd2).max()
        errs[n] = max(e1, e2)
    assert errs[128] < 2e-4
    # second-order convergence: quartering the cell should quarter the error
    assert errs[256] < 0.35 * errs[128]


def test_quantum_potential_vanishes_for_plane_wave():
    g = make_grid(64, 32, 0.3)
    f = init_momentum_eigenstate(g, InitialStateSpec(5, 2))
    vq = quantum_potential(f, PARAMS)
    assert vq.valid.all()
    assert np.abs(vq.values).max() < 1e-10


def _fd_quantum_potential(g, f, params):
    r = np.abs(f.amplitudes)
    d1, d2 = g.dq1, g.dq2
    r11 = (np.roll(r, -1, 0) - 2 * r + np.roll(r, 1, 0)) / d1 ** 2
    r22 = (np.roll(r, -1, 1) - 2 * r + np.roll(r, 1, 1)) / d2 ** 2
    r12 = (np.roll(np.roll(r, -1, 0), -1, 1) - np.roll(np.roll(r, -1, 0), 1, 1)
           - np.roll(np.roll(r, 1, 0), -1, 1)
           + np.roll(np.roll(r, 1, 0), 1, 1)) / (4 * d1 * d2)
    return -0.5 * g.hbar ** 2 * (r11 + r22 + 2 * params.c_pp * r12) / r


def test_quantum_potential_matches_finite_differences():
    errs = {}
    for n in (64, 128):
        g, f = smooth_field(n, n, 0.5, seed=3)
        vq = quantum_potential(f, PARAMS)
        fd = _fd_quantum_potential(g, f, PARAMS)
        errs[n] = np.abs(vq.values - fd).max() / np.abs(vq.values).max()
    assert errs[128] < 1e-3
    assert errs[128] < 0.35 * errs[64]


def test_node_cells_are_masked():
    # cos(q1) profile has an exact nodal line between grid columns; push it
    # onto the grid by adding modes +1 and -1 with equal weight
    g = make_grid(64, 8, 0.5)
    amps = np.cos(g.q1)[:, None] * np.ones((1, 8), complex)
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    f = WaveField(g, amps, Representation.POSITION)
    s1, s2, valid = phase_gradient(f)
    assert not valid.all()
    assert np.all(s1[~valid] == 0.0)


# ---------------------------------------------------------------------------
# off-grid evaluation

def test_eval_velocity_matches_grid_values_at_nodes():
    g, f = smooth_field(64, 64, 0.5, seed=3)
    v1, v2, _ = velocity_field(f, PARAMS)
    ctx = velocity_context(f, PARAMS)
    for i, j in ((0, 0), (17, 40), (63, 1)):
        s = eval_velocity(ctx, g.q1[i], g.q2[j])
        assert s.valid
        assert s.v1 == pytest.approx(v1[i, j], abs=1e-12)
        assert s.v2 == pytest.approx(v2[i, j], abs=1e-12)


def test_eval_velocity_against_fourier_oracle():
    rng = np.random.default_rng(7)
    errs = {}
    for n in (64, 128):
        g, f = smooth_field(n, n, 0.5, seed=3)
        ctx = velocity_context(f, PARAMS)
        worst = 0.0
        for _ in range(50):
            q1, q2 = rng.uniform(0, 2 * np.pi, 2)
            a = eval_velocity(ctx, q1, q2)
            b = eval_velocity_fourier(f, PARAMS, q1, q2)
            assert a.valid and b.valid
            worst = max(worst, abs(a.v1 - b.v1), abs(a.v2 - b.v2))
        errs[n] = worst
    assert errs[64] < 1e-3
    assert errs[128] < 2.5e-4
    assert errs[128] < 0.5 * errs[64]


def test_eval_velocity_periodic_wraparound():
    g, f = smooth_field(32, 32, 0.5, seed=5)
    ctx = velocity_context(f, PARAMS)
    a = eval_velocity(ctx, 1.2, 0.4)
    b = eval_velocity(ctx, 1.2 + 2 * np.pi, 0.4 - 4 * np.pi)
    assert a.v1 == pytest.approx(b.v1, abs=1e-14)
    assert a.v2 == pytest.approx(b.v2, abs=1e-14)


def test_eval_velocity_invalid_near_node():
    g = make_grid(64, 8, 0.5)
    amps = np.cos(g.q1)[:, None] * np.ones((1, 8), complex)
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    f = WaveField(g, amps, Representation.POSITION)
    ctx = velocity_context(f, PARAMS)
    s = eval_velocity(ctx, np.pi / 2, 0.0)
    assert not s.valid


# ---------------------------------------------------------------------------
# probe sets and advection

def test_probeset_construction_and_iteration():
    ps = ProbeSet.from_positions([0.1, 0.2], [0.3, 0.4], record_history=True)
    assert len(ps) == 2
    probes = list(ps.probes())
    assert probes[0].id == 0 and probes[1].id == 1
    assert all(p.status == ProbeStatus.ACTIVE for p in probes)
    assert len(ps.history) == 1
    with pytest.raises(ValueError):
        ProbeSet.from_positions([0.1], [0.2, 0.3])


def test_advance_probes_plane_wave_is_linear_drift():
    g = make_grid(64, 32, 0.3)
    f = init_momentum_eigenstate(g, InitialStateSpec(6, -2))
    q1 = np.array([0.5, 2.0, 4.0])
    q2 = np.array([1.0, 3.0, 5.0])
    ps = ProbeSet.from_positions(q1, q2)
    out = advance_probes(ps, f, PARAMS, 0.0, 1.0, 1e-2)
    c = PARAMS.c_pp
    v1 = g.hbar * (6 + c * (-2))
    v2 = g.hbar * (-2 + c * 6)
    assert np.abs(out.q1 - (q1 + v1)).max() < 1e-12
    assert np.abs(out.q2 - (q2 + v2)).max() < 1e-12
    assert out.time == pytest.approx(1.0)


def test_advance_probes_backward_returns_to_start():
    g, f = smooth_field(64, 64, 0.5, seed=3)
    q1 = np.linspace(0.3, 5.9, 8)
    q2 = np.linspace(0.1, 6.1, 8)
    ps = ProbeSet.from_positions(q1, q2)
    fwd = advance_probes(ps, f, PARAMS, 0.0, 1.0, 1e-3)
    back = advance_probes(fwd, f, PARAMS, 1.0, 0.0, -1e-3)
    assert (back.status == ProbeStatus.ACTIVE).all()
    assert np.abs(back.q1 - q1).max() < 1e-8
    assert np.abs(back.q2 - q2).max() < 1e-8


def test_advance_probes_partial_interval_composition():
    g, f = smooth_field(64, 64, 0.5, seed=4)
    ps = ProbeSet.from_positions([1.0, 2.5], [0.7, 4.2])
    whole = advance_probes(ps, f, PARAMS, 0.0, 0.9, 1e-3)
    halves = advance_probes(advance_probes(ps, f, PARAMS, 0.0, 0.45, 1e-3),
                            f, PARAMS, 0.45, 0.9, 1e-3)
    assert np.abs(whole.q1 - halves.q1).max() < 1e-10
    assert np.abs(whole.q2 - halves.q2).max() < 1e-10


def test_advance_probes_rejects_bad_schedules():
    g, f = smooth_field(32, 32, 0.5)
    ps = ProbeSet.from_positions([1.0], [1.0])
    with pytest.raises(ScheduleError):
        advance_probes(ps, f, PARAMS, 0.0, 1.5, 1e-2)
    with pytest.raises(ScheduleError):
        advance_probes(ps, f, PARAMS, -0.1, 0.5, 1e-2)
    with pytest.raises(ScheduleError):
        advance_probes(ps, f, PARAMS, 0.0, 1.0, -1e-2)
    with pytest.raises(ScheduleError):
        advance_probes(ps, f, PARAMS, 1.0, 0.0, 1e-2)


def test_probe_freezes_on_node_contact():
    g = make_grid(64, 8, 0.5)
    amps = np.cos(g.q1)[:, None] * np.ones((1, 8), complex)
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    f = WaveField(g, amps, Representation.POSITION)
    ps = ProbeSet.from_positions([np.pi / 2, 0.1], [0.0, 0.0])
    out = advance_probes(ps, f, PARAMS, 0.0, 0.2, 1e-2)
    assert out.status[0] == ProbeStatus.NODE_CONTACT
    # a frozen probe keeps its seed position
    assert out.q1[0] == pytest.approx(np.pi / 2)
    assert out.status[1] == ProbeStatus.ACTIVE


def test_advance_probes_history_recording():
    g, f = smooth_field(32, 32, 0.5)
    ps = ProbeSet.from_positions([1.0], [2.0], record_history=True)
    out = advance_probes(ps, f, PARAMS, 0.0, 0.5, 1e-2)
    assert len(out.history) == 2
    t0, _, _ = out.history[0]
    t1, _, _ = out.history[1]
    assert (t0, t1) == (0.0, 0.5)


# ---------------------------------------------------------------------------
# itineraries and convergence filter

def test_schedule_seed_period():
    sched = TrajectorySchedule(PARAMS, {}, (Segment(4, False), Segment(5, True),
                                            Segment(6, True)))
    assert sched.seed_period() == 5
    only_bwd = TrajectorySchedule(PARAMS, {}, (Segment(3, False),))
    assert only_bwd.seed_period() == 4
    with pytest.raises(ScheduleError):
        TrajectorySchedule(PARAMS, {}, ()).seed_period()


def test_run_with_convergence_keeps_smooth_probes():
    g = make_grid(128, 64, 2 * np.pi * 5 / 128)
    f0 = init_momentum_eigenstate(g, InitialStateSpec(2, 1, np.pi / 4))
    params = ModelParams(0.8, 0.5, 1.0, 0.2)
    post = {0: step_period(f0, params)}
    post[1] = step_period(post[0], params)
    sched = TrajectorySchedule(params, post, (Segment(0, False), Segment(1, True)))
    assert sched.seed_period() == 1
    ps = ProbeSet.from_positions(np.linspace(0.5, 5.5, 6),
                                 np.linspace(0.2, 6.0, 6), time=1.0)
    out = run_with_convergence(ps, sched, 1e-2, 0.1)
    assert (out.status == ProbeStatus.ACTIVE).all()
    # history spans kick indices 0, 1, 2 at times 0, T, 2T
    times = [h[0] for h in out.history]
    assert times == pytest.approx([0.0, 1.0, 2.0])
    # the middle entry is the seeding position
    assert np.abs(out.history[1][1] - ps.q1).max() < 1e-14
    assert out.time == pytest.approx(2.0)


def test_run_with_convergence_rejects_under_tight_threshold():
    g = make_grid(128, 64, 2 * np.pi * 5 / 128)
    f0 = init_momentum_eigenstate(g, InitialStateSpec(2, 1, np.pi / 4))
    params = ModelParams(2.5, 1.5, 1.0, 0.2)
    post = {0: step_period(f0, params)}
    sched = TrajectorySchedule(params, post, (Segment(0, True),))
    ps = ProbeSet.from_positions(np.linspace(0.1, 6.2, 40),
                                 np.full(40, 1.3), time=0.0)
    # a huge step plus a zero tolerance must reject every surviving probe
    out = run_with_convergence(ps, sched, 0.5, 0.0)
    active = out.status == ProbeStatus.ACTIVE
    assert not active.any()


def test_convergence_filter_agrees_with_direct_advance():
    g = make_grid(128, 64, 2 * np.pi * 5 / 128)
    f0 = init_momentum_eigenstate(g, InitialStateSpec(2, 1, np.pi / 4))
    params = ModelParams(0.8, 0.5, 1.0, 0.2)
    post = {0: step_period(f0, params)}
    sched = TrajectorySchedule(params, post, (Segment(0, True),))
    ps = ProbeSet.from_positions([1.0, 3.0], [2.0, 4.0], time=0.0)
    out = run_with_convergence(ps, sched, 1e-2, 0.1)
    direct = advance_probes(ps, post[0], params, 0.0, 1.0, 5e-3)
    assert np.abs(out.q1 - direct.q1).max() < 1e-14
    assert np.abs(out.q2 - direct.q2).max() < 1e-14
