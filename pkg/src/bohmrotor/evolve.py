"""Split-operator propagation of the coupled kicked rotors.

The propagator over one kick period factorizes exactly into a free flight,
diagonal in the momentum representation, followed by an instantaneous kick,
diagonal in the position representation.  The kick is applied at the end of
each period: a state sampled at t = n*T + 0 is post-kick.
"""
from __future__ import annotations

import numpy as np

from .errors import OutOfBandError
from .grid import TWO_PI, ModelParams, Representation, WaveField, transform


def apply_kick(field: WaveField, params: ModelParams) -> WaveField:
    """Pointwise phase exp[-(i/hbar)(k1 cos q1 + k2 cos q2)]; |Phi| unchanged."""
    pos = transform(field, Representation.POSITION)
    g = pos.grid
    angle = (params.k1 * np.cos(g.q1)[:, None]
             + params.k2 * np.cos(g.q2)[None, :]) / g.hbar
    amps = pos.amplitudes * np.exp(-1j * np.mod(angle, TWO_PI))
    return WaveField(g, amps, Representation.POSITION, pos.time)


def _free_factor(field: WaveField, params: ModelParams, dt: float) -> np.ndarray:
    g = field.grid
    m1 = g.m1[:, None].astype(float)
    m2 = g.m2[None, :].astype(float)
    # p_i = hbar m_i, so the exponent (p1^2 + p2^2 + 2 c p1 p2) dt / (2 hbar)
    # reduces to hbar (m1^2 + m2^2 + 2 c m1 m2) dt / 2; reduce mod 2pi to
    # limit argument growth for large m^2.
    angle = 0.5 * g.hbar * (m1 ** 2 + m2 ** 2 + 2.0 * params.c_pp * m1 * m2) * dt
    return np.exp(-1j * np.mod(angle, TWO_PI))


def apply_free(field: WaveField, params: ModelParams, dt: float) -> WaveField:
    """Free flight over dt (may be negative); diagonal in momentum."""
    mom = transform(field, Representation.MOMENTUM)
    amps = mom.amplitudes * _free_factor(mom, params, dt)
    return WaveField(mom.grid, amps, Representation.MOMENTUM, mom.time + dt)


def step_period(field: WaveField, params: ModelParams) -> WaveField:
    """One full period: free flight over T then the kick; time advances by T."""
    return apply_kick(apply_free(field, params, params.T), params)


def field_at(post_kick: WaveField, params: ModelParams, tau: float) -> WaveField:
    """Intra-period state U1(tau) applied to a post-kick state.

    tau must lie in [0, T]; tau = T is the pre-next-kick limit.  The result
    is returned in the position representation.
    """
    if not 0.0 <= tau <= params.T:
        raise OutOfBandError(f"tau = {tau} outside [0, {params.T}]")
    return transform(apply_free(post_kick, params, tau), Representation.POSITION)
