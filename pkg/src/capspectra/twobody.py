"""Two-particle wave function as an n x n matrix and its Strang-split
propagation, plus initial-state builders (scattering packet, imaginary-time
ground states).

One-particle factors act by left/right multiplication, the pair interaction
by elementwise multiplication. Each factor is exactly unitary for gamma = 0,
so norm decay is always physical absorption, never integrator drift.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grids import Grid1D, CapSpec, PulseSpec, vector_potential


@dataclass
class TwoBodyState:
    psi: np.ndarray  # complex (n, n), exchange symmetric
    t: float


@dataclass(frozen=True)
class WavePacketSpec:
    """Minimum-uncertainty Gaussian projectile; position width 1/(2 sigma_p)."""

    x_c: float
    p_c: float
    sigma_p: float

    @property
    def sigma_x(self) -> float:
        return 1.0 / (2.0 * self.sigma_p)


class SplitFactors:
    """Precomputed second-order split factors for step size tau.

    Factor order for one step t -> t+tau:
        exp(-i tau W/2) (elementwise)
        exp(-i tau (V - i gamma)/2) on both indices
        momentum space: exp(-i tau (k^2/2 + A(t+tau/2) k)) on both axes
        exp(-i tau (V - i gamma)/2)
        exp(-i tau W/2)
    The same diagonal factors serve the one-particle propagator (left
    multiplication) used by the density-matrix stepper.
    """

    def __init__(self, grid: Grid1D, V: np.ndarray, gamma: np.ndarray,
                 W: np.ndarray | None, tau: float,
                 pulse: PulseSpec | None = None):
        self.grid = grid
        self.tau = tau
        self.k = grid.k
        self.z = V - 1j * gamma  # complex local potential of h_eff
        self.d_half = np.exp(-0.5j * tau * self.z)
        self.kin_static = np.exp(-0.5j * tau * grid.k**2)
        self.w_half = None if W is None else np.exp(-0.5j * tau * W)
        self.pulse = pulse

    def vector_potential_at(self, t: float) -> float:
        if self.pulse is None:
            return 0.0
        return float(vector_potential(self.pulse, t))

    def kinetic_factor(self, t_mid: float) -> np.ndarray:
        a = self.vector_potential_at(t_mid)
        if a == 0.0:
            return self.kin_static
        return self.kin_static * np.exp(-1j * self.tau * a * self.k)

    def step_twobody(self, psi: np.ndarray, t: float) -> np.ndarray:
        """One Strang step of the two-particle matrix from time t."""
        kf = self.kinetic_factor(t + 0.5 * self.tau)
        if self.w_half is not None:
            psi = self.w_half * psi
        psi = self.d_half[:, None] * psi * self.d_half[None, :]
        psi = sfft.fft2(psi, overwrite_x=True)
        psi *= kf[:, None]
        psi *= kf[None, :]
        psi = sfft.ifft2(psi, overwrite_x=True)
        psi = self.d_half[:, None] * psi * self.d_half[None, :]
        if self.w_half is not None:
            psi = self.w_half * psi
        return psi

    def apply_u(self, m: np.ndarray, t: float) -> np.ndarray:
        """Left-multiply by the one-particle step operator U(t -> t+tau)."""
        kf = self.kinetic_factor(t + 0.5 * self.tau)
        out = self.d_half[:, None] * m
        out = sfft.ifft(kf[:, None] * sfft.fft(out, axis=0, overwrite_x=True),
                        axis=0, overwrite_x=True)
        out *= self.d_half[:, None]
        return out

    def apply_heff(self, m: np.ndarray, t: float) -> np.ndarray:
        """Left-multiply by h_eff(t) = k^2/2 + A(t) k + V - i gamma."""
        diag_k = 0.5 * self.k**2 + self.vector_potential_at(t) * self.k
        out = sfft.ifft(diag_k[:, None] * sfft.fft(m, axis=0), axis=0)
        out += self.z[:, None] * m
        return out


def norm2(psi: np.ndarray, h: float) -> float:
    """Squared norm h^2 sum |psi|^2 of a two-particle matrix."""
    return float(h * h * np.vdot(psi, psi).real)


def step_split_operator(state: TwoBodyState, ops: SplitFactors) -> TwoBodyState:
    return TwoBodyState(psi=ops.step_twobody(state.psi, state.t),
                        t=state.t + ops.tau)


def gaussian_packet(grid: Grid1D, packet: WavePacketSpec) -> np.ndarray:
    chi = np.exp(-((grid.x - packet.x_c) ** 2) / (4.0 * packet.sigma_x**2)
                 + 1j * packet.p_c * grid.x)
    chi /= np.sqrt(grid.h * np.vdot(chi, chi).real)
    return chi


def init_scattering_state(grid: Grid1D, packet: WavePacketSpec,
                          ground: np.ndarray, ground_energy: float,
                          cap: CapSpec | None = None) -> TwoBodyState:
    """Symmetrized (projectile packet) x (bound target) product, unit norm.

    ground must be the box-normalized bound state of the target potential.
    Rejects packets that start with more than 1% of their norm inside the
    absorber region.
    """
    if ground_energy >= 0.0:
        raise ValueError(f"target state is not bound (energy {ground_energy})")
    chi = gaussian_packet(grid, packet)
    if cap is not None:
        inside = np.abs(grid.x) >= cap.x0
        overlap = grid.h * float(np.sum(np.abs(chi[inside]) ** 2))
        if overlap > 0.01:
            raise ValueError(f"packet starts with {overlap:.3%} of its norm in "
                             f"the absorber region (limit 1%)")
    m = np.outer(chi, ground.astype(complex))
    psi = 0.5 * (m + m.T)
    psi /= np.sqrt(norm2(psi, grid.h))
    return TwoBodyState(psi=psi, t=0.0)


def energy_expectation(grid: Grid1D, psi: np.ndarray, V: np.ndarray,
                       W: np.ndarray | None) -> float:
    """<H> for the field-free two-particle Hamiltonian (no absorber)."""
    k2 = 0.5 * grid.k**2
    hpsi = sfft.ifft(k2[:, None] * sfft.fft(psi, axis=0), axis=0)
    hpsi += sfft.ifft(k2[None, :] * sfft.fft(psi, axis=1), axis=1)
    vv = V[:, None] + V[None, :]
    hpsi += vv * psi
    if W is not None:
        hpsi += W * psi
    return float(grid.h**2 * np.vdot(psi, hpsi).real)


def _energy_onebody(grid: Grid1D, psi: np.ndarray, V: np.ndarray) -> float:
    hpsi = sfft.ifft(0.5 * grid.k**2 * sfft.fft(psi)) + V * psi
    return float(grid.h * np.vdot(psi, hpsi).real)


def relax_imaginary_time(grid: Grid1D, V: np.ndarray, W: np.ndarray | None = None,
                         tau_im: float = 0.1, tol: float = 1e-10,
                         max_iter: int = 200_000,
                         init: np.ndarray | None = None,
                         check_every: int = 10) -> tuple[np.ndarray, float]:
    """Ground state by diffusion with per-step renormalization.

    Returns the box-normalized state (vector for W=None, else exchange-
    symmetric matrix) and its energy. The stop rule is energy stationarity
    between successive checks; non-convergence raises with the last energy.
    """
    if tau_im <= 0:
        raise ValueError("imaginary-time step must be positive")
    two_body = W is not None
    d_half = np.exp(-0.5 * tau_im * V)
    kin = np.exp(-0.5 * tau_im * grid.k**2)
    if two_body:
        w_half = np.exp(-0.5 * tau_im * W)
        psi = np.outer(*2 * [np.exp(-grid.x**2 / 2.0)]).astype(complex) \
            if init is None else init.astype(complex)
    else:
        psi = np.exp(-grid.x**2 / 2.0).astype(complex) if init is None \
            else init.astype(complex)

    def renorm(p):
        if two_body:
            return p / np.sqrt(norm2(p, grid.h))
        return p / np.sqrt(grid.h * np.vdot(p, p).real)

    psi = renorm(psi)
    e_prev = np.inf
    for it in range(1, max_iter + 1):
        if two_body:
            psi = w_half * psi
            psi = d_half[:, None] * psi * d_half[None, :]
            psi = sfft.fft2(psi, overwrite_x=True)
            psi *= kin[:, None]
            psi *= kin[None, :]
            psi = sfft.ifft2(psi, overwrite_x=True)
            psi = d_half[:, None] * psi * d_half[None, :]
            psi = w_half * psi
        else:
            psi = d_half * sfft.ifft(kin * sfft.fft(d_half * psi))
        psi = renorm(psi)
        if it % check_every == 0:
            e = energy_expectation(grid, psi, V, W) if two_body \
                else _energy_onebody(grid, psi, V)
            if abs(e - e_prev) < tol:
                return psi, e
            e_prev = e
    raise RuntimeError(f"imaginary-time relaxation did not converge in "
                       f"{max_iter} steps; last energy {e_prev:.10f}")
