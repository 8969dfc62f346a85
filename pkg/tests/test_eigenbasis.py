import numpy as np
import pytest

from capspectra.eigenbasis import (EigenBasis, build_h0_dense,
                                   continuum_weights, eigendecompose,
                                   load_or_build)
from capspectra.grids import PotentialSpec, build_grid
from capspectra.twobody import WavePacketSpec, gaussian_packet


def test_free_particle_spectrum_matches_periodic_box():
    grid = build_grid(L=8.0, n=64)
    h0 = build_h0_dense(grid, PotentialSpec("none", V0=0.0, width=1.0))
    basis = eigendecompose(h0, grid)
    expect = np.sort(0.5 * grid.k**2)
    assert np.allclose(basis.energies, expect, atol=1e-10)


def test_gaussian_well_bound_energies(well_basis):
    assert well_basis.energies[0] == pytest.approx(-3.141, abs=5e-3)
    assert well_basis.bound_count >= 2
    assert well_basis.parity[0] == 1   # no node
    assert well_basis.parity[1] == -1  # one node
    assert not well_basis.flagged.any()


def test_soft_coulomb_ground_energy(cache_dir):
    grid = build_grid(L=64.0, n=512)
    pot = PotentialSpec("soft-coulomb", V0=0.5, width=0.5)
    basis = load_or_build(grid, pot, cache_dir=cache_dir)
    assert basis.energies[0] == pytest.approx(-0.500, abs=5e-3)
    # cache round-trip gives the identical decomposition
    again = load_or_build(grid, pot, cache_dir=cache_dir)
    assert np.array_equal(again.energies, basis.energies)
    assert np.array_equal(again.states, basis.states)


def test_orthonormality_and_completeness(well_basis):
    phi = well_basis.states
    h = well_basis.h
    gram = h * phi.T @ phi
    assert np.max(np.abs(gram - np.eye(phi.shape[1]))) < 1e-8
    ident = h * phi @ phi.T
    assert np.max(np.abs(ident - np.eye(phi.shape[0]))) < 1e-8


def test_reconstruction_identity(well_grid, well_basis):
    psi = gaussian_packet(well_grid, WavePacketSpec(x_c=-5.0, p_c=1.5,
                                                    sigma_p=0.3))
    coeff = well_basis.h * well_basis.states.T @ psi
    norm = well_basis.h * float(np.vdot(psi, psi).real)
    assert abs(float(np.sum(np.abs(coeff) ** 2)) - norm) < 1e-10


def test_energies_ascending_and_parity_alternates_high_up(well_basis):
    e = well_basis.energies
    assert np.all(np.diff(e) > -1e-12)
    # high in the continuum even and odd states interleave
    top = well_basis.parity[len(e) // 2:]
    flips = np.mean(top[1:] != top[:-1])
    assert flips > 0.9


def test_asymmetric_potential_flags_mixed_states():
    grid = build_grid(L=8.0, n=32)
    h0 = build_h0_dense(grid, PotentialSpec("none", V0=0.0, width=1.0))
    tilt = np.diag(0.3 * grid.x)  # breaks reflection symmetry
    basis = eigendecompose(h0 + tilt, grid)
    assert basis.flagged.any()


def test_eigendecompose_rejects_asymmetric_input():
    grid = build_grid(L=4.0, n=8)
    m = np.arange(64.0).reshape(8, 8)
    with pytest.raises(ValueError):
        eigendecompose(m, grid)


def _fake_basis(energies, parity):
    e = np.asarray(energies, dtype=float)
    p = np.asarray(parity, dtype=np.int8)
    return EigenBasis(energies=e, states=np.eye(e.size),
                      parity=p, flagged=np.zeros(e.size, bool), h=1.0)


def test_weights_uniform_family():
    d = 0.25
    e = np.concatenate([[-1.0], d * np.arange(1, 7), d * np.arange(1, 7) + 0.1])
    par = np.array([1] + [1] * 6 + [-1] * 6)
    basis = _fake_basis(e, par)
    w = continuum_weights(basis)
    assert w[0] == 0.0  # bound state carries no weight
    even = w[1:7]
    assert np.allclose(even[1:-1], 1.0 / d)
    assert even[0] == pytest.approx(1.0 / d)   # one-sided edge
    assert even[-1] == pytest.approx(1.0 / d)


def test_weights_reject_degenerate_and_short_families():
    basis = _fake_basis([0.1, 0.1 + 1e-15, 0.3, 0.5, 0.2, 0.4, 0.6],
                        [1, 1, 1, 1, -1, -1, -1])
    with pytest.raises(ValueError):
        continuum_weights(basis)
    with pytest.raises(ValueError):
        continuum_weights(_fake_basis([0.1, 0.2, 0.3, 0.4, 0.5],
                                      [1, 1, 1, -1, -1]))


def test_weights_quadrature_consistency(well_basis):
    """Discrete sum of a smooth distribution equals the integral of the
    interpolated density built from the same weights."""
    from capspectra.spectra import _family_density

    w = continuum_weights(well_basis)
    pos = well_basis.energies > 0.0
    c = np.exp(-((well_basis.energies - 1.0) ** 2) / (2 * 0.3**2))
    c[~pos] = 0.0
    eps, dens = _family_density(well_basis, w, c)
    integral = np.trapezoid(dens, eps)
    assert integral == pytest.approx(float(np.sum(c[pos])), rel=0.01)
