import numpy as np
import pytest

from capspectra.grids import (CapSpec, InteractionSpec, PotentialSpec,
                              build_grid, cap_values, interaction_matrix,
                              potential_values)
from capspectra.twobody import (SplitFactors, TwoBodyState, WavePacketSpec,
                                energy_expectation, gaussian_packet,
                                init_scattering_state, norm2,
                                relax_imaginary_time, step_split_operator)


def _moments(grid, prob):
    prob = prob / np.sum(prob)
    m1 = float(np.sum(grid.x * prob))
    m2 = float(np.sum(grid.x**2 * prob))
    return m1, m2 - m1 * m1


def test_gaussian_packet_moments():
    grid = build_grid(L=42.0, n=336)
    spec = WavePacketSpec(x_c=-20.0, p_c=2.0, sigma_p=0.1)
    assert spec.sigma_x == pytest.approx(5.0)
    chi = gaussian_packet(grid, spec)
    assert grid.h * np.vdot(chi, chi).real == pytest.approx(1.0)
    # tails clipped at the box edge shift the moments at the 1e-4 level
    xc, var = _moments(grid, np.abs(chi) ** 2)
    assert xc == pytest.approx(-20.0, abs=1e-3)
    assert var == pytest.approx(spec.sigma_x**2, rel=1e-3)
    # mean momentum via the transform
    ck = np.abs(np.fft.fft(chi)) ** 2
    pc = float(np.sum(grid.k * ck) / np.sum(ck))
    assert pc == pytest.approx(2.0, abs=1e-6)


def test_initial_state_norm_symmetry_energy(well_grid, well_pot, well_basis):
    packet = WavePacketSpec(x_c=-20.0, p_c=2.0, sigma_p=0.1)
    state = init_scattering_state(well_grid, packet,
                                  well_basis.states[:, 0],
                                  well_basis.energies[0],
                                  cap=CapSpec(1.0, 35.0))
    assert norm2(state.psi, well_grid.h) == pytest.approx(1.0)
    assert np.array_equal(state.psi, state.psi.T)
    V = potential_values(well_grid, well_pot)
    W = interaction_matrix(well_grid, InteractionSpec(W0=1.0, s=0.1925))
    e = energy_expectation(well_grid, state.psi, V, W)
    # separated packet: bound energy plus drift plus momentum-spread energy
    # plus the slowly decaying interaction tail at separation ~20
    chi = gaussian_packet(well_grid, packet)
    tail = well_grid.h**2 * float(
        np.abs(chi) ** 2 @ W @ np.abs(well_basis.states[:, 0]) ** 2)
    expect = well_basis.energies[0] + 0.5 * 2.0**2 + 0.5 * 0.1**2 + tail
    assert tail == pytest.approx(0.05, abs=0.01)
    assert e == pytest.approx(expect, abs=1e-3)


def test_initial_state_rejections(well_grid, well_basis):
    packet = WavePacketSpec(x_c=-34.0, p_c=2.0, sigma_p=0.1)
    with pytest.raises(ValueError, match="absorber"):
        init_scattering_state(well_grid, packet, well_basis.states[:, 0],
                              well_basis.energies[0], cap=CapSpec(1.0, 35.0))
    with pytest.raises(ValueError, match="bound"):
        init_scattering_state(well_grid,
                              WavePacketSpec(-20.0, 2.0, 0.1),
                              well_basis.states[:, -1],
                              well_basis.energies[-1])


def test_free_dispersion_matches_analytic():
    grid = build_grid(L=42.0, n=336)
    zeros = np.zeros(grid.n)
    ops = SplitFactors(grid, V=zeros, gamma=zeros, W=None, tau=0.05)
    chi = gaussian_packet(grid, WavePacketSpec(x_c=0.0, p_c=0.0, sigma_p=0.5))
    state = TwoBodyState(psi=np.outer(chi, chi), t=0.0)
    for _ in range(100):
        state = step_split_operator(state, ops)
    t = state.t
    sx2 = 1.0 + (t / 2.0) ** 2  # sigma_x = 1 at t = 0
    marg = np.sum(np.abs(state.psi) ** 2, axis=1)
    _, var = _moments(grid, marg)
    assert var == pytest.approx(sx2, rel=1e-6)
    assert norm2(state.psi, grid.h) == pytest.approx(1.0, abs=1e-10)


def test_absorber_free_run_is_unitary(well_grid, well_pot, well_basis):
    """Norm, exchange symmetry, and energy through a full collision."""
    V = potential_values(well_grid, well_pot)
    W = interaction_matrix(well_grid, InteractionSpec(W0=1.0, s=0.1925))
    ops = SplitFactors(well_grid, V=V, gamma=np.zeros(well_grid.n), W=W,
                       tau=0.025)
    state = init_scattering_state(well_grid,
                                  WavePacketSpec(-20.0, 2.0, 0.1),
                                  well_basis.states[:, 0],
                                  well_basis.energies[0])
    e0 = energy_expectation(well_grid, state.psi, V, W)
    for _ in range(1200):  # t = 30, collision is over
        state = step_split_operator(state, ops)
    assert abs(norm2(state.psi, well_grid.h) - 1.0) < 1e-10
    assert np.max(np.abs(state.psi - state.psi.T)) < 1e-13
    e1 = energy_expectation(well_grid, state.psi, V, W)
    # post-collision drift is step-size limited at this tau, not secular
    assert abs(e1 - e0) < 5e-5 * abs(e0)


def test_energy_drift_vanishes_second_order():
    """Post-collision energy drift on a toy collision scales as tau^2 and
    reaches the 1e-6 level; absence of secular heating."""
    grid = build_grid(L=16.0, n=128)
    pot = PotentialSpec("gaussian-well", V0=4.0, width=3.0 / (2.0 * np.sqrt(2.0)))
    V = potential_values(grid, pot)
    from capspectra.eigenbasis import build_h0_dense, eigendecompose
    basis = eigendecompose(build_h0_dense(grid, pot), grid)
    W = interaction_matrix(grid, InteractionSpec(W0=1.0, s=0.5))
    drifts = []
    for tau in (0.0125, 0.00625, 0.003125):
        ops = SplitFactors(grid, V=V, gamma=np.zeros(grid.n), W=W, tau=tau)
        st = init_scattering_state(grid, WavePacketSpec(-8.0, 2.0, 0.5),
                                   basis.states[:, 0], basis.energies[0])
        e0 = energy_expectation(grid, st.psi, V, W)
        for _ in range(int(round(12.0 / tau))):
            st = step_split_operator(st, ops)
        drifts.append(abs(energy_expectation(grid, st.psi, V, W) - e0) / abs(e0))
    assert drifts[0] / drifts[1] == pytest.approx(4.0, abs=0.8)
    assert drifts[1] / drifts[2] == pytest.approx(4.0, abs=0.8)
    assert drifts[2] < 1e-6


def test_norm_decays_monotonically_with_absorber(well_grid, well_pot):
    V = potential_values(well_grid, well_pot)
    gam = cap_values(well_grid, CapSpec(gamma0=0.25, x0=35.0))
    ops = SplitFactors(well_grid, V=V, gamma=gam, W=None, tau=0.05)
    chi = gaussian_packet(well_grid, WavePacketSpec(x_c=30.0, p_c=1.0,
                                                    sigma_p=0.25))
    state = TwoBodyState(psi=np.outer(chi, chi), t=0.0)
    prev = norm2(state.psi, well_grid.h)
    dropped = False
    for _ in range(120):
        state = step_split_operator(state, ops)
        now = norm2(state.psi, well_grid.h)
        assert now <= prev + 1e-12
        dropped = dropped or now < prev - 1e-6
        prev = now
    assert dropped


def _toy_ops(n, tau, with_pulse=False):
    from capspectra.grids import PulseSpec
    grid = build_grid(L=4.0, n=n)
    V = potential_values(grid, PotentialSpec("gaussian-well", 2.0, 1.0))
    gam = cap_values(grid, CapSpec(gamma0=0.5, x0=3.0))
    W = interaction_matrix(grid, InteractionSpec(W0=0.8, s=0.5))
    pulse = PulseSpec(E0=0.2, omega=1.0, n_cycles=2) if with_pulse else None
    return grid, SplitFactors(grid, V=V, gamma=gam, W=W, tau=tau, pulse=pulse)


def _toy_state(grid):
    chi = gaussian_packet(grid, WavePacketSpec(x_c=-1.0, p_c=0.7, sigma_p=0.4))
    m = np.outer(chi, chi)
    return 0.5 * (m + m.T)


def test_single_step_defect_is_third_order():
    """One coarse step against the same dynamics sub-stepped 100x; the
    leftover shrinks ~8x when the step is halved."""
    defects = []
    for tau in (0.08, 0.04):
        grid, ops = _toy_ops(8, tau, with_pulse=True)
        psi0 = _toy_state(grid)
        coarse = ops.step_twobody(psi0.copy(), 0.3)
        _, fine_ops = _toy_ops(8, tau / 100.0, with_pulse=True)
        fine = psi0.copy()
        for i in range(100):
            fine = fine_ops.step_twobody(fine, 0.3 + i * tau / 100.0)
        defects.append(np.max(np.abs(coarse - fine)))
    ratio = defects[0] / defects[1]
    assert 6.0 < ratio < 10.0


def test_global_self_convergence_is_second_order():
    t_end = 2.0
    finals = []
    # keep tau*k_max^2/2 below pi on this grid or phase wrapping at the
    # momentum edge dominates the comparison
    for tau in (0.01, 0.005, 0.0025):
        grid, ops = _toy_ops(64, tau, with_pulse=True)
        state = TwoBodyState(psi=_toy_state(grid), t=0.0)
        for _ in range(int(round(t_end / tau))):
            state = step_split_operator(state, ops)
        finals.append(state.psi)
    e1 = float(np.linalg.norm(finals[0] - finals[1]))
    e2 = float(np.linalg.norm(finals[1] - finals[2]))
    assert e1 / e2 == pytest.approx(4.0, abs=0.5)


def test_relax_harmonic_ground_state():
    grid = build_grid(L=8.0, n=128)
    V = 0.5 * grid.x**2
    psi, e = relax_imaginary_time(grid, V, tau_im=0.05, tol=1e-10)
    psi, e = relax_imaginary_time(grid, V, tau_im=0.01, tol=1e-12, init=psi)
    assert e == pytest.approx(0.5, abs=1e-4)
    assert grid.h * np.vdot(psi, psi).real == pytest.approx(1.0)


def test_relax_two_independent_oscillators():
    grid = build_grid(L=8.0, n=64)
    V = 0.5 * grid.x**2
    W = np.zeros((64, 64))
    off = np.exp(-((grid.x - 1.0) ** 2) / 2.0)  # start away from the answer
    psi, e = relax_imaginary_time(grid, V, W=W, tau_im=0.05, tol=1e-11,
                                  init=np.outer(off, off))
    assert e == pytest.approx(1.0, abs=1e-3)
    assert np.max(np.abs(psi - psi.T)) < 1e-12


def test_relax_reports_nonconvergence():
    grid = build_grid(L=8.0, n=64)
    start = np.exp(-((grid.x - 2.0) ** 2) / 2.0)
    with pytest.raises(RuntimeError, match="energy"):
        relax_imaginary_time(grid, 0.5 * grid.x**2, tau_im=0.001, tol=1e-15,
                             max_iter=30, init=start)
