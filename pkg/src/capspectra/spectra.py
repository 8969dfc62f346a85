"""Accumulation of the time-integrated density matrices and their projection
onto box-normalized continuum states, plus run diagnostics.

Only the absorber rows of the running sums are ever needed by the projection
formulas, so the accumulators store phi[cap, :] and R[cap, :] and every
matrix product is restricted accordingly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigenbasis import EigenBasis
from .grids import Grid1D


class SpectralAccumulator:
    """Running sums phi += h*w*Psi Psi^dag and R += w*rho on absorber rows."""

    def __init__(self, n: int, cap_idx: np.ndarray, h: float):
        self.h = h
        self.cap_idx = np.asarray(cap_idx, dtype=np.intp)
        self.phi_cap = np.zeros((self.cap_idx.size, n), dtype=complex)
        self.r_cap = np.zeros((self.cap_idx.size, n), dtype=complex)

    def add_psi(self, psi: np.ndarray, weight: float) -> None:
        b = psi[self.cap_idx, :]
        self.phi_cap += (self.h * weight) * (b @ psi.conj().T)

    def add_rho(self, rho: np.ndarray, weight: float) -> None:
        self.r_cap += weight * rho[self.cap_idx, :]


def accumulate(acc: SpectralAccumulator, weight: float,
               psi: np.ndarray | None = None,
               rho: np.ndarray | None = None) -> SpectralAccumulator:
    """Add one (possibly strided) sample; weight is tau times the stride."""
    if psi is not None:
        acc.add_psi(psi, weight)
    if rho is not None:
        acc.add_rho(rho, weight)
    return acc


def _project(mat_cap: np.ndarray, cap_idx: np.ndarray, gamma: np.ndarray,
             states: np.ndarray) -> np.ndarray:
    """Re <phi_k| D M |phi_k> for every state column, M given by absorber rows."""
    pv = mat_cap @ states
    x = np.einsum("ik,i,ik->k", states[cap_idx, :].conj(), gamma[cap_idx], pv)
    return x.real


def _family_density(basis: EigenBasis, weights: np.ndarray,
                    raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Convert per-state raw projections to a density on the merged grid."""
    pos = weights > 0.0
    eps_merged = np.sort(basis.energies[pos], kind="stable")
    total = np.zeros_like(eps_merged)
    for p in (1, -1):
        fam = pos & (basis.parity == p)
        if not np.any(fam):
            continue
        e = basis.energies[fam]
        d = raw[fam] * weights[fam]
        total += np.interp(eps_merged, e, d)
    return eps_merged, total


def spectrum_first(acc: SpectralAccumulator, gamma: np.ndarray,
                   basis: EigenBasis, weights: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray]:
    """First-absorption density dP2/de on the merged positive-energy grid.

    Per state: raw = 2 h^2 phi^T (D Phi + Phi D) phi = 4 h^2 Re(phi^T D Phi phi),
    then scaled by the density-of-states weight of its parity family.
    """
    if not np.any(weights > 0.0):
        raise ValueError("no positive-energy continuum states to project on")
    pos = weights > 0.0
    raw = np.zeros_like(basis.energies)
    raw[pos] = 4.0 * acc.h**2 * _project(acc.phi_cap, acc.cap_idx, gamma,
                                         basis.states[:, pos])
    return _family_density(basis, weights, raw)


def spectrum_second(acc: SpectralAccumulator, gamma: np.ndarray,
                    basis: EigenBasis, weights: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Second-absorption density dP1/de; half the first-absorption prefactor."""
    if not np.any(weights > 0.0):
        raise ValueError("no positive-energy continuum states to project on")
    pos = weights > 0.0
    raw = np.zeros_like(basis.energies)
    raw[pos] = 2.0 * acc.h**2 * _project(acc.r_cap, acc.cap_idx, gamma,
                                         basis.states[:, pos])
    return _family_density(basis, weights, raw)


def negative_content(eps: np.ndarray, density: np.ndarray) -> float:
    """Magnitude of the integral over the negative part of the density."""
    return float(-np.trapezoid(np.minimum(density, 0.0), eps))


def total_probability(eps: np.ndarray, density: np.ndarray) -> float:
    return float(np.trapezoid(density, eps))


class ExtentTracker:
    """Running maximum, over sampled times, of the squared-norm mass beyond
    every grid radius a; the extent diagnostic is the smallest a whose
    running maximum stays below 1%."""

    def __init__(self, grid: Grid1D):
        order = np.argsort(np.abs(grid.x), kind="stable")
        self.order = order
        r = np.abs(grid.x)[order]
        # last sorted index of each distinct radius (x and -x collapse)
        self.uniq_radii, last = np.unique(r[::-1], return_index=True)
        self.uniq_last = r.size - 1 - last
        self.max_beyond = np.zeros(self.uniq_radii.size)
        self.h2 = grid.h * grid.h

    def update(self, psi: np.ndarray) -> None:
        q = np.abs(psi[np.ix_(self.order, self.order)]) ** 2
        inc = q.cumsum(axis=1).diagonal().copy()  # sum_{j<=m} q[m, j]
        cols = q.cumsum(axis=0)
        inc[1:] += cols.diagonal(offset=1)  # sum_{i<m} q[i, m]
        inside = np.cumsum(inc)
        beyond = self.h2 * (inside[-1] - inside[self.uniq_last])
        np.maximum(self.max_beyond, beyond, out=self.max_beyond)

    def extent(self, threshold: float = 0.01) -> float:
        ok = np.flatnonzero(self.max_beyond < threshold)
        return float(self.uniq_radii[ok[0]])


def duration_from_norms(times: np.ndarray, norms: np.ndarray, t_max: float,
                        threshold: float = 0.01) -> tuple[float, bool]:
    """First sampled time the two-particle norm fell below the threshold.

    Returns (duration, reached); duration = t_max with reached=False when the
    norm never dropped below.
    """
    below = np.flatnonzero(np.asarray(norms) < threshold)
    if below.size == 0:
        return float(t_max), False
    return float(np.asarray(times)[below[0]]), True
