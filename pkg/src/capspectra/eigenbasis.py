"""Dense field-free one-particle Hamiltonian, its eigenbasis, and the
density-of-states weights used to turn discrete projections into spectra.

The kinetic matrix is the dense form of the FFT second derivative so that
projections live in exactly the same discretization as the propagator. For
reflection-symmetric potentials the eigenproblem is solved per parity block;
plain eigh would mix the numerically degenerate even/odd pairs high in the
continuum, which corrupts the per-family interpolation weights.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from .grids import Grid1D, PotentialSpec, potential_values

PARITY_TOL = 0.99


@dataclass
class EigenBasis:
    """Full spectrum of h0 with box-normalized states and parity labels.

    states[:, j] is the j-th eigenvector, normalized so h*||phi||^2 = 1;
    parity[j] is +1 (even) or -1 (odd); flagged[j] marks states whose
    reflection expectation fell below the classification threshold (only
    possible on asymmetric potentials).
    """

    energies: np.ndarray
    states: np.ndarray = field(repr=False)
    parity: np.ndarray = field(repr=False)
    flagged: np.ndarray = field(repr=False)
    h: float

    @property
    def bound_count(self) -> int:
        return int(np.sum(self.energies < 0.0))


def reflection_permutation(n: int) -> np.ndarray:
    """Index map realizing x -> -x on the periodic grid: i -> (n - i) mod n."""
    return (-np.arange(n)) % n


def build_h0_dense(grid: Grid1D, pot: PotentialSpec) -> np.ndarray:
    """h0 = T + diag(V) with T the dense spectral kinetic matrix."""
    eye = np.eye(grid.n)
    T = sfft.ifft(0.5 * grid.k[:, None] ** 2 * sfft.fft(eye, axis=0), axis=0).real
    h0 = T + np.diag(potential_values(grid, pot))
    return 0.5 * (h0 + h0.T)


def _pair_basis(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal even/odd combination matrices for the reflection symmetry."""
    half = n // 2
    n_even = half + 1  # pairs plus the two fixed points i=0, i=n/2
    n_odd = half - 1
    Be = np.zeros((n, n_even))
    Bo = np.zeros((n, n_odd))
    Be[0, 0] = 1.0
    Be[half, 1] = 1.0
    r = 1.0 / np.sqrt(2.0)
    for m, i in enumerate(range(1, half)):
        Be[i, 2 + m] = r
        Be[n - i, 2 + m] = r
        Bo[i, m] = r
        Bo[n - i, m] = -r
    return Be, Bo


def eigendecompose(h0: np.ndarray, grid: Grid1D) -> EigenBasis:
    """Full diagonalization with parity labels and box normalization.

    Parity is assigned by the sign of <phi|R phi>; for reflection-symmetric h0
    the states are built inside exact symmetry blocks so that value is +-1 to
    machine precision and nothing is ever flagged.
    """
    n = grid.n
    asym = np.max(np.abs(h0 - h0.T))
    if asym > 1e-10 * max(1.0, np.max(np.abs(h0))):
        raise ValueError(f"h0 must be symmetric, asymmetry {asym:.3e}")

    perm = reflection_permutation(n)
    reflect_sym = np.max(np.abs(h0 - h0[np.ix_(perm, perm)]))
    scale = max(1.0, float(np.max(np.abs(h0))))

    if reflect_sym <= 1e-12 * scale:
        Be, Bo = _pair_basis(n)
        we, ve = np.linalg.eigh(Be.T @ h0 @ Be)
        wo, vo = np.linalg.eigh(Bo.T @ h0 @ Bo)
        energies = np.concatenate([we, wo])
        vecs = np.concatenate([Be @ ve, Bo @ vo], axis=1)
        parity = np.concatenate([np.ones(we.size, dtype=np.int8),
                                 -np.ones(wo.size, dtype=np.int8)])
        order = np.argsort(energies, kind="stable")
        energies, vecs, parity = energies[order], vecs[:, order], parity[order]
        flagged = np.zeros(n, dtype=bool)
    else:
        energies, vecs = np.linalg.eigh(h0)
        r = np.einsum("ij,ij->j", vecs[perm, :], vecs)  # <phi|R phi>, real vectors
        parity = np.where(r >= 0.0, 1, -1).astype(np.int8)
        flagged = np.abs(r) < PARITY_TOL

    # deterministic sign convention: first nonzero component (above a floor) positive
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        idx = np.argmax(np.abs(col) > 1e-8)
        if col[idx] < 0:
            vecs[:, j] = -col

    states = vecs / np.sqrt(grid.h)  # h * ||phi||^2 = 1
    return EigenBasis(energies=energies, states=states, parity=parity,
                      flagged=flagged, h=grid.h)


def continuum_weights(basis: EigenBasis) -> np.ndarray:
    """Density-of-states weights per parity family, positive energies only.

    Within one family ordered by energy, interior states get the central
    difference w = 2/(e_{k+1} - e_{k-1}), the family ends one-sided
    differences. Bound and zero-energy states get weight 0.
    """
    w = np.zeros_like(basis.energies)
    for p in (1, -1):
        idx = np.where((basis.parity == p) & (basis.energies > 0.0))[0]
        if idx.size < 3:
            raise ValueError(f"need >= 3 positive-energy states for parity {p:+d}, "
                             f"got {idx.size}")
        e = basis.energies[idx]
        gaps = np.diff(e)
        if np.min(gaps) < 1e-12:
            raise ValueError("degenerate energy spacing inside one parity family")
        fam = np.empty(idx.size)
        fam[1:-1] = 2.0 / (e[2:] - e[:-2])
        fam[0] = 1.0 / gaps[0]
        fam[-1] = 1.0 / gaps[-1]
        w[idx] = fam
    return w


def basis_cache_key(grid: Grid1D, pot: PotentialSpec) -> str:
    blob = f"grid:{grid.n}:{grid.h:.17g}|pot:{pot.kind}:{pot.V0:.17g}:{pot.width:.17g}"
    return hashlib.sha256(blob.encode()).hexdigest()[:24]


def load_or_build(grid: Grid1D, pot: PotentialSpec,
                  cache_dir: str | Path | None = None) -> EigenBasis:
    """Diagonalize h0, or reuse a cached decomposition for this grid+potential."""
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"eigen_{basis_cache_key(grid, pot)}.npz"
        if path.exists():
            z = np.load(path)
            return EigenBasis(energies=z["energies"], states=z["states"],
                              parity=z["parity"], flagged=z["flagged"],
                              h=float(z["h"]))
    basis = eigendecompose(build_h0_dense(grid, pot), grid)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez(path, energies=basis.energies, states=basis.states,
                 parity=basis.parity, flagged=basis.flagged, h=basis.h)
    return basis
