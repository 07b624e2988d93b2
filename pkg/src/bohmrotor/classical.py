"""Classical oracle: the standard map and its momentum-coupled extension.

Coordinates are kept unwrapped (winding included); reduction mod 2pi happens
only inside the sine.  The coupled map advances both rotors simultaneously
from time-n values; kicks use the updated angles.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import TWO_PI, ModelParams


@dataclass(frozen=True)
class ClassicalState:
    q1: float
    p1: float
    q2: float = 0.0
    p2: float = 0.0


@dataclass
class ClassicalEnsemble:
    """Vectorized (q, p) ensemble sharing one step counter."""

    q1: np.ndarray
    p1: np.ndarray
    q2: np.ndarray
    p2: np.ndarray
    step: int = 0

    @classmethod
    def from_arrays(cls, q1, p1, q2=None, p2=None) -> "ClassicalEnsemble":
        q1 = np.asarray(q1, float).copy()
        p1 = np.asarray(p1, float).copy()
        q2 = np.zeros_like(q1) if q2 is None else np.asarray(q2, float).copy()
        p2 = np.zeros_like(p1) if p2 is None else np.asarray(p2, float).copy()
        return cls(q1, p1, q2, p2)

    def __len__(self) -> int:
        return self.q1.size


def std_map_step(state: ClassicalState, k: float, T: float) -> ClassicalState:
    """One application of the standard map q' = q + T p, p' = p + k sin q'."""
    q1 = state.q1 + T * state.p1
    p1 = state.p1 + k * np.sin(np.mod(q1, TWO_PI))
    return ClassicalState(q1, p1, state.q2, state.p2)


def coupled_map_step(state: ClassicalState, params: ModelParams) -> ClassicalState:
    """One step of the momentum-coupled two-rotor map.

    q_i' = q_i + T p_i + c_pp p_j, p_i' = p_i + k_i sin(q_i').
    """
    q1 = state.q1 + params.T * state.p1 + params.c_pp * state.p2
    q2 = state.q2 + params.T * state.p2 + params.c_pp * state.p1
    p1 = state.p1 + params.k1 * np.sin(np.mod(q1, TWO_PI))
    p2 = state.p2 + params.k2 * np.sin(np.mod(q2, TWO_PI))
    return ClassicalState(q1, p1, q2, p2)


def coupled_map_inverse(state: ClassicalState, params: ModelParams) -> ClassicalState:
    """Algebraic inverse of coupled_map_step (the map is symplectic)."""
    p1 = state.p1 - params.k1 * np.sin(np.mod(state.q1, TWO_PI))
    p2 = state.p2 - params.k2 * np.sin(np.mod(state.q2, TWO_PI))
    q1 = state.q1 - params.T * p1 - params.c_pp * p2
    q2 = state.q2 - params.T * p2 - params.c_pp * p1
    return ClassicalState(q1, p1, q2, p2)


def step_ensemble(ens: ClassicalEnsemble, params: ModelParams) -> ClassicalEnsemble:
    """Apply the coupled map to every ensemble member."""
    q1 = ens.q1 + params.T * ens.p1 + params.c_pp * ens.p2
    q2 = ens.q2 + params.T * ens.p2 + params.c_pp * ens.p1
    p1 = ens.p1 + params.k1 * np.sin(np.mod(q1, TWO_PI))
    p2 = ens.p2 + params.k2 * np.sin(np.mod(q2, TWO_PI))
    return ClassicalEnsemble(q1, p1, q2, p2, ens.step + 1)


def ensemble_moments(ens: ClassicalEnsemble):
    """Sample mean and variance of p1."""
    if len(ens) == 0:
        raise ValueError("empty ensemble")
    mean = float(np.mean(ens.p1))
    var = float(np.mean((ens.p1 - mean) ** 2))
    return mean, var
