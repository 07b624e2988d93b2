"""Discretization of the configuration torus and the wave-field container.

The configuration space is the 2-torus [0, 2pi) x [0, 2pi).  Periodicity
quantizes the momenta on the lattice p_i = hbar * m_i with integer
m_i in [-n_i/2, n_i/2).  Position and momentum representations are related
by a unitary discrete Fourier transform with the convention that the
position basis function for index m is exp(+i m q).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateFieldError, OutOfBandError

TWO_PI = 2.0 * np.pi


class Representation(enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _momentum_indices(n: int) -> np.ndarray:
    """Integer momentum indices in FFT storage order: 0..n/2-1, -n/2..-1."""
    m = np.arange(n)
    m[m >= n // 2] -= n
    return m


@dataclass(frozen=True)
class GridSpec:
    """Periodic n1 x n2 discretization of the torus plus the action unit hbar."""

    n1: int
    n2: int
    hbar: float

    def __post_init__(self):
        for n in (self.n1, self.n2):
            if n < 2 or not _is_power_of_two(n):
                raise ConfigurationError(
                    f"grid sizes must be powers of two >= 2, got {self.n1} x {self.n2}")
        if not self.hbar > 0:
            raise ConfigurationError(f"hbar must be positive, got {self.hbar}")

    @property
    def dq1(self) -> float:
        return TWO_PI / self.n1

    @property
    def dq2(self) -> float:
        return TWO_PI / self.n2

    @property
    def q1(self) -> np.ndarray:
        return self.dq1 * np.arange(self.n1)

    @property
    def q2(self) -> np.ndarray:
        return self.dq2 * np.arange(self.n2)

    @property
    def m1(self) -> np.ndarray:
        """Momentum indices along axis 1, FFT storage order."""
        return _momentum_indices(self.n1)

    @property
    def m2(self) -> np.ndarray:
        return _momentum_indices(self.n2)

    @property
    def p1(self) -> np.ndarray:
        """Momentum lattice hbar * m along axis 1, FFT storage order."""
        return self.hbar * self.m1

    @property
    def p2(self) -> np.ndarray:
        return self.hbar * self.m2

    def size(self) -> int:
        return self.n1 * self.n2


def make_grid(n1: int, n2: int, hbar: float) -> GridSpec:
    """Build a GridSpec, validating grid sizes and hbar."""
    return GridSpec(n1=n1, n2=n2, hbar=hbar)


def snap_momentum(grid: GridSpec, p: float, axis: int = 1) -> int:
    """Nearest lattice index m to p/hbar on the given axis; ties round to even.

    Raises OutOfBandError if p (or the snapped index) falls outside the
    representable band [-hbar*n/2, hbar*n/2).
    """
    n = grid.n1 if axis == 1 else grid.n2
    half = grid.hbar * n / 2
    if not -half <= p < half:
        raise OutOfBandError(
            f"momentum {p} outside representable band [-{half}, {half})")
    m = round(p / grid.hbar)
    if not -n // 2 <= m < n // 2:
        raise OutOfBandError(f"snapped index {m} outside [-{n // 2}, {n // 2})")
    return int(m)


@dataclass(frozen=True)
class ModelParams:
    """Kick strengths, kick period, and momentum-coupling constant."""

    k1: float
    k2: float
    T: float
    c_pp: float

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigurationError(f"kick period T must be positive, got {self.T}")
        if not abs(self.c_pp) < 1:
            raise ConfigurationError(
                f"|c_pp| must be < 1 for a positive-definite kinetic form, got {self.c_pp}")


@dataclass(frozen=True)
class InitialStateSpec:
    """Momentum indices and phase anchor of the initial plane-wave state."""

    m1: int
    m2: int
    q_offset: float = np.pi / 4


@dataclass(frozen=True)
class WaveField:
    """Immutable complex amplitude grid with a representation tag.

    The discrete norm sum |amplitude|^2 is the unit of probability; all
    observables are weights on grid cells.
    """

    grid: GridSpec
    amplitudes: np.ndarray = field(repr=False)
    representation: Representation
    time: float = 0.0

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.grid.n1, self.grid.n2):
            raise ConfigurationError(
                f"amplitude shape {amps.shape} does not match grid "
                f"({self.grid.n1}, {self.grid.n2})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        """Discrete norm sum |amplitude|^2."""
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def transform(field: WaveField, target: Representation) -> WaveField:
    """Unitary change of representation (discrete Fourier transform pair)."""
    if field.representation is target:
        return field
    root = np.sqrt(field.grid.size())
    if target is Representation.MOMENTUM:
        amps = np.fft.fft2(field.amplitudes) / root
    else:
        amps = np.fft.ifft2(field.amplitudes) * root
    return WaveField(field.grid, amps, target, field.time)


def init_momentum_eigenstate(grid: GridSpec, spec: InitialStateSpec) -> WaveField:
    """Unit-norm plane wave exp[i(m1 (q1 - off) + m2 (q2 - off))] / sqrt(n1 n2).

    In the momentum representation all mass sits at (m1, m2).
    """
    for m, n in ((spec.m1, grid.n1), (spec.m2, grid.n2)):
        if not abs(m) < n // 2:
            raise OutOfBandError(f"momentum index {m} outside |m| < {n // 2}")
    phase = (spec.m1 * (grid.q1 - spec.q_offset)[:, None]
             + spec.m2 * (grid.q2 - spec.q_offset)[None, :])
    amps = np.exp(1j * phase) / np.sqrt(grid.size())
    return WaveField(grid, amps, Representation.POSITION, 0.0)


def momentum_amplitude(field: WaveField, m1: int, m2: int) -> complex:
    """Momentum-representation amplitude at integer indices (m1, m2)."""
    mom = transform(field, Representation.MOMENTUM)
    return complex(mom.amplitudes[m1 % field.grid.n1, m2 % field.grid.n2])


def position_density(field: WaveField) -> np.ndarray:
    """|Phi|^2 on the position grid (discrete cell weights)."""
    pos = transform(field, Representation.POSITION)
    dens = np.abs(pos.amplitudes) ** 2
    if not np.any(dens > 0):
        raise DegenerateFieldError("wave field is identically zero")
    return dens
