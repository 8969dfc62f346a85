"""Uniform 1D grid plus the pointwise operator data every propagator consumes.

Everything here is plain array evaluation: sample positions and conjugate
momenta, absorber profile gamma(x), binding potentials, the pair interaction
matrix, and the vector potential of the laser pulse. All quantities use
hbar = m = 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft


@dataclass(frozen=True)
class Grid1D:
    """Uniform symmetric grid on [-L, L) with FFT-ordered momenta."""

    n: int
    h: float
    x: np.ndarray = field(repr=False)
    k: np.ndarray = field(repr=False)

    @property
    def L(self) -> float:
        return -float(self.x[0])


@dataclass(frozen=True)
class CapSpec:
    """Quadratic absorber turned on at |x| = x0: gamma = gamma0*(|x|-x0)^2."""

    gamma0: float
    x0: float


@dataclass(frozen=True)
class PulseSpec:
    """sin^2-envelope vector potential with an integer number of cycles."""

    E0: float
    omega: float
    n_cycles: int

    @property
    def t_end(self) -> float:
        return 2.0 * np.pi * self.n_cycles / self.omega


@dataclass(frozen=True)
class PotentialSpec:
    kind: str  # gaussian-well | soft-coulomb | none
    V0: float = 0.0
    width: float = 1.0


@dataclass(frozen=True)
class InteractionSpec:
    W0: float
    s: float


def build_grid(L: float, n: int) -> Grid1D:
    """Grid with x_i = -L + i*h, h = 2L/n, and momenta 2*pi*m/(n*h)."""
    if n % 2 != 0 or n < 8:
        raise ValueError(f"point count must be even and >= 8, got {n}")
    if L <= 0:
        raise ValueError(f"half-extent must be positive, got {L}")
    h = 2.0 * L / n
    x = -L + h * np.arange(n)
    k = 2.0 * np.pi * sfft.fftfreq(n, d=h)
    return Grid1D(n=n, h=h, x=x, k=k)


def cap_values(grid: Grid1D, cap: CapSpec) -> np.ndarray:
    """Absorber profile gamma(x_i); zero strictly inside |x| < x0."""
    if cap.x0 >= grid.L:
        raise ValueError(f"absorber onset x0={cap.x0} leaves no interior (L={grid.L})")
    if cap.gamma0 < 0:
        raise ValueError(f"absorber strength must be >= 0, got {cap.gamma0}")
    r = np.abs(grid.x) - cap.x0
    return cap.gamma0 * np.square(np.maximum(r, 0.0))


def potential_values(grid: Grid1D, pot: PotentialSpec) -> np.ndarray:
    """Binding potential V(x_i), attractive sign convention."""
    if pot.kind == "none":
        return np.zeros(grid.n)
    if pot.width <= 0:
        raise ValueError(f"potential width must be positive, got {pot.width}")
    if pot.kind == "gaussian-well":
        return -pot.V0 * np.exp(-grid.x**2 / (2.0 * pot.width**2))
    if pot.kind == "soft-coulomb":
        return -pot.V0 / np.sqrt(grid.x**2 + pot.width**2)
    raise ValueError(f"unknown potential kind {pot.kind!r}")


def interaction_matrix(grid: Grid1D, w: InteractionSpec) -> np.ndarray:
    """Soft-core pair repulsion W0/sqrt((x_i-x_j)^2 + s^2) as a dense matrix."""
    if w.s <= 0:
        raise ValueError(f"interaction smoothing must be positive, got {w.s}")
    dx = grid.x[:, None] - grid.x[None, :]
    return w.W0 / np.sqrt(dx**2 + w.s**2)


def vector_potential(pulse: PulseSpec, t) -> np.ndarray | float:
    """A(t) = (E0/omega) sin^2(pi t/t_end) sin(omega t) inside [0, t_end], else 0."""
    t = np.asarray(t, dtype=float)
    T = pulse.t_end
    env = np.sin(np.pi * np.clip(t, 0.0, T) / T) ** 2
    a = (pulse.E0 / pulse.omega) * env * np.sin(pulse.omega * t)
    a = np.where((t >= 0.0) & (t <= T), a, 0.0)
    return a if a.ndim else float(a)
