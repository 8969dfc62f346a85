"""One-particle density matrix fed by two-particle absorption, plus the
vacuum-probability bookkeeping that closes the trace ledger.

rho1 obeys i rho' = h_eff rho - rho h_eff^dag + i S with the source
S = 4h Psi D Psi^dag (D = diag(gamma)). The stepper is second order: a
midpoint one-particle propagator applied as a congruence, a trapezoidal
source term, and an explicit cross-term correction. No dense exponential is
ever formed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .twobody import SplitFactors


@dataclass
class OneBodyDensity:
    rho: np.ndarray  # complex (n, n), Hermitian
    t: float


@dataclass(frozen=True)
class TraceLedger:
    """One sample of the global probability balance."""

    t: float
    norm2_psi: float
    trace_rho1: float
    p0: float

    @property
    def residual(self) -> float:
        return 1.0 - (self.norm2_psi + self.trace_rho1 + self.p0)


def source_matrix(psi: np.ndarray, gamma: np.ndarray, h: float,
                  cap_idx: np.ndarray | None = None) -> np.ndarray:
    """S = 4h Psi diag(gamma) Psi^dag, restricted to the absorber columns.

    Hermitian positive semi-definite by construction; exactly zero when psi
    has no support where gamma > 0.
    """
    if cap_idx is None:
        cap_idx = np.flatnonzero(gamma > 0.0)
    if cap_idx.size == 0:
        return np.zeros((psi.shape[0], psi.shape[0]), dtype=complex)
    b = psi[:, cap_idx]
    return (4.0 * h) * ((b * gamma[cap_idx]) @ b.conj().T)


def congruence(ops: SplitFactors, rho: np.ndarray, t: float) -> np.ndarray:
    """U rho U^dag using only left applications of U."""
    x = ops.apply_u(rho, t)
    z = ops.apply_u(x.conj().T, t)
    return z.conj().T


def step_rho1(rho: np.ndarray, ops: SplitFactors, t: float,
              s_now: np.ndarray, s_next: np.ndarray) -> np.ndarray:
    """Advance rho1 by tau with sources sampled at both step ends.

    rho(t+tau) = U rho U^dag + (tau/2)(S_now + S_next)
                 - i (tau^2/2)(h_eff(t) S_now - (h_eff(t) S_now)^dag)
    where U uses the midpoint Hamiltonian. The cross term keeps the source
    injection second order; it is Hermitian by construction, so rho stays
    Hermitian to rounding.
    """
    tau = ops.tau
    out = congruence(ops, rho, t)
    out += (0.5 * tau) * (s_now + s_next)
    hs = ops.apply_heff(s_now, t)
    out -= (0.5j * tau * tau) * (hs - hs.conj().T)
    return out


def cap_flux(rho: np.ndarray, gamma: np.ndarray, h: float) -> float:
    """Instantaneous vacuum-feeding rate 2 h sum_i gamma_i rho_ii."""
    return float(2.0 * h * np.dot(gamma, rho.diagonal().real))


def update_p0(p0: float, rate_prev: float, rate_now: float,
              tau: float) -> float:
    """Trapezoidal accumulation of the vacuum probability."""
    return p0 + 0.5 * tau * (rate_prev + rate_now)


def trace_of(rho: np.ndarray, h: float) -> float:
    return float(h * rho.diagonal().real.sum())
