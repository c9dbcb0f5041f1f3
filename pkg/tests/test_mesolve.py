"""Master-equation integrator tests.

Analytic oracles: exponential decay of a bare cavity mode, and the exact
matrix exponential of the constant-coefficient Liouvillian (computed with
scipy.linalg.expm on the vectorised equation, an entirely separate code
path from the production integrator).
"""

import numpy as np
import pytest
from scipy.linalg import expm as dense_expm

from rbcavity.mesolve import (
    ChannelKind,
    CollapseChannel,
    evolve,
    excitation_balance,
    expectation,
    integrate_channel_flux,
    validate_density_matrix,
)

KAPPA = 2 * np.pi * 1.875e6
GAMMA = 2 * np.pi * 3e6


def cavity_mode():
    a = np.zeros((2, 2), complex)
    a[0, 1] = 1.0
    ch = CollapseChannel(np.sqrt(2 * KAPPA) * a, "cavity decay", ChannelKind.CAVITY_PLUS)
    rho0 = np.diag([0.0, 1.0]).astype(complex)
    return ch, rho0


def liouvillian_matrix(H, channels):
    """Vectorised (row-major) Liouvillian for the expm oracle."""
    n = H.shape[0]
    eye = np.eye(n)
    K = -1j * H - 0.5 * sum(c.operator.conj().T @ c.operator for c in channels)
    L = np.kron(K, eye) + np.kron(eye, K.conj())
    for c in channels:
        L += np.kron(c.operator, c.operator.conj())
    return L


class TestEvolveBasics:
    def test_vacuum_is_stationary(self):
        H = np.diag([0.0, 2 * np.pi * 50e6]).astype(complex)
        ch, _ = cavity_mode()
        rho0 = np.diag([1.0, 0.0]).astype(complex)
        t = np.linspace(0.0, 1e-6, 1001)
        traj = evolve(H, [ch], rho0, t)
        assert np.abs(traj.states - rho0).max() < 1e-10

    def test_single_photon_decay(self):
        ch, rho0 = cavity_mode()
        t = np.arange(0.0, 5.0 / (2 * KAPPA), 1e-9)
        traj = evolve(np.zeros((2, 2), complex), [ch], rho0, t)
        nbar = traj.states[:, 1, 1].real
        assert np.abs(nbar - np.exp(-2 * KAPPA * t)).max() < 1e-6

    def test_photon_number_at_half_life(self):
        ch, rho0 = cavity_mode()
        t_half = 1.0 / (2 * KAPPA)
        t = np.linspace(0.0, t_half, 501)
        traj = evolve(np.zeros((2, 2), complex), [ch], rho0, t)
        n_op = np.diag([0.0, 1.0]).astype(complex)
        assert expectation(traj.final_state(), n_op) == pytest.approx(np.exp(-1.0), abs=1e-8)

    def test_damped_rabi_against_expm_oracle(self):
        # resonantly driven two-level atom with spontaneous decay
        Om = 2 * np.pi * 8e6
        H = 0.5 * Om * np.array([[0, 1], [1, 0]], complex)
        sm = np.zeros((2, 2), complex)
        sm[0, 1] = 1.0
        ch = CollapseChannel(np.sqrt(2 * GAMMA) * sm, "spont", ChannelKind.SPONTANEOUS)
        rho0 = np.diag([1.0, 0.0]).astype(complex)
        t = np.arange(0.0, 500e-9, 1e-9)
        traj = evolve(H, [ch], rho0, t)
        L = liouvillian_matrix(H, [ch])
        for idx in (100, 250, 499):
            ref = (dense_expm(L * t[idx]) @ rho0.reshape(-1)).reshape(2, 2)
            assert np.abs(traj.states[idx] - ref).max() < 1e-9

    def test_rabi_frequency(self):
        # undamped population oscillates at the drive Rabi frequency
        Om = 2 * np.pi * 10e6
        H = 0.5 * Om * np.array([[0, 1], [1, 0]], complex)
        rho0 = np.diag([1.0, 0.0]).astype(complex)
        t = np.arange(0.0, 100e-9, 0.5e-9)
        traj = evolve(H, [], rho0, t)
        pe = traj.states[:, 1, 1].real
        assert pe[np.argmin(np.abs(t - 0.5 / 10e6))] == pytest.approx(1.0, abs=1e-3)
        assert pe[np.argmin(np.abs(t - 1.0 / 10e6))] == pytest.approx(0.0, abs=1e-3)

    def test_non_hermitian_rejected(self):
        H = np.array([[0, 1], [0, 0]], complex)
        rho0 = np.diag([1.0, 0.0]).astype(complex)
        with pytest.raises(ValueError):
            evolve(H, [], rho0, np.linspace(0, 1e-7, 11))

    def test_bad_rho0_rejected(self):
        H = np.zeros((2, 2), complex)
        bad = np.diag([0.7, 0.7]).astype(complex)
        with pytest.raises(ValueError):
            evolve(H, [], bad, np.linspace(0, 1e-7, 11))

    def test_rk45_matches_expm_with_split_hamiltonian(self):
        Om = 2 * np.pi * 12e6
        H1 = 0.5 * np.array([[0, 1], [1, 0]], complex)
        sm = np.zeros((2, 2), complex)
        sm[0, 1] = 1.0
        ch = CollapseChannel(np.sqrt(2 * GAMMA) * sm, "spont", ChannelKind.SPONTANEOUS)

        def env(t):
            return Om * np.sin(np.pi * t / 200e-9) ** 2 if 0 <= t <= 200e-9 else 0.0

        rho0 = np.diag([1.0, 0.0]).astype(complex)
        t = np.arange(0.0, 300e-9, 0.5e-9)
        ham = (np.zeros((2, 2), complex), H1, env)
        tr_e = evolve(ham, [ch], rho0, t)
        tr_r = evolve(ham, [ch], rho0, t, method="rk45", rtol=1e-10, atol=1e-12)
        assert np.abs(tr_e.states - tr_r.states).max() < 2e-5

    def test_callable_hamiltonian_uses_rk45(self):
        Om = 2 * np.pi * 5e6

        def H(t):
            return 0.5 * Om * np.sin(np.pi * t / 100e-9) ** 2 * np.array([[0, 1], [1, 0]], complex)

        rho0 = np.diag([1.0, 0.0]).astype(complex)
        t = np.linspace(0.0, 100e-9, 201)
        traj = evolve(H, [], rho0, t)
        assert abs(np.trace(traj.final_state()).real - 1) < 1e-8


@pytest.fixture(scope="module")
def driven_traj():
    # small driven lambda system with cavity and spontaneous channels
    n = 4  # |g1>, |x>, |g2>, plus a photon flag on |g2>
    H0 = np.zeros((n, n), complex)
    H0[1, 1] = 2 * np.pi * 20e6
    g = 2 * np.pi * 5e6
    H0[1, 2] = H0[2, 1] = g
    H1 = np.zeros((n, n), complex)
    H1[0, 1] = H1[1, 0] = 0.5

    def env(t):
        return 2 * np.pi * 10e6 * np.sin(np.pi * t / 400e-9) ** 2 if t <= 400e-9 else 0.0

    a = np.zeros((n, n), complex)
    a[3, 2] = 1.0  # photon leaks, atom parked in |g2>-like state
    sm = np.zeros((n, n), complex)
    sm[0, 1] = 1.0
    chans = [
        CollapseChannel(np.sqrt(2 * KAPPA) * a, "cavity", ChannelKind.CAVITY_PLUS),
        CollapseChannel(np.sqrt(2 * GAMMA) * sm, "spont", ChannelKind.SPONTANEOUS),
    ]
    rho0 = np.zeros((n, n), complex)
    rho0[0, 0] = 1.0
    t = np.arange(0.0, 900e-9, 1e-9)
    ham = (H0, H1, env)
    return evolve(ham, chans, rho0, t), ham


class TestInvariants:
    def test_trace_preserved(self, driven_traj):
        traj, _ = driven_traj
        traces = np.einsum("tii->t", traj.states)
        assert np.abs(traces - 1.0).max() < 1e-8

    def test_positivity_and_purity(self, driven_traj):
        traj, _ = driven_traj
        for idx in range(0, len(traj.times), 100):
            rho = traj.states[idx]
            eig = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
            assert eig.min() > -1e-8
            purity = np.einsum("ij,ji->", rho, rho).real
            assert purity <= 1 + 1e-10

    def test_excitation_accounting(self, driven_traj):
        traj, ham = driven_traj
        N = np.diag([0.0, 1.0, 1.0, 0.0]).astype(complex)
        # the |g2> state holds one quantum until the photon escapes
        N[2, 2] = 1.0
        N[1, 1] = 1.0
        N[0, 0] = 0.0
        N[3, 3] = 0.0
        injected, accounted = excitation_balance(traj, N, ham)
        assert injected == pytest.approx(accounted, abs=1e-4)

    def test_grid_refinement_convergence(self, driven_traj):
        traj, ham = driven_traj
        rho0 = traj.states[0]
        t2 = np.arange(0.0, 900e-9, 0.5e-9)
        traj2 = evolve(ham, traj.channels, rho0, t2)
        for kind in (ChannelKind.CAVITY_PLUS, ChannelKind.SPONTANEOUS):
            a = integrate_channel_flux(traj, kind)
            b = integrate_channel_flux(traj2, kind)
            assert abs(a - b) / max(abs(b), 1e-12) < 1e-5


class TestFluxIntegrals:
    def test_full_decay_yields_one_photon(self):
        ch, rho0 = cavity_mode()
        t = np.arange(0.0, 11.0 / (2 * KAPPA), 1e-9)
        traj = evolve(np.zeros((2, 2), complex), [ch], rho0, t)
        n = integrate_channel_flux(traj, ChannelKind.CAVITY_PLUS)
        assert n == pytest.approx(1.0, abs=1e-4)

    def test_vacuum_emits_nothing(self):
        ch, _ = cavity_mode()
        rho0 = np.diag([1.0, 0.0]).astype(complex)
        t = np.linspace(0.0, 1e-6, 500)
        traj = evolve(np.zeros((2, 2), complex), [ch], rho0, t)
        assert integrate_channel_flux(traj, ChannelKind.CAVITY_PLUS) == pytest.approx(0.0, abs=1e-12)

    def test_truncated_decay_integral(self):
        ch, rho0 = cavity_mode()
        T = 5.0 / (2 * KAPPA)
        t = np.arange(0.0, T + 1e-12, 0.5e-9)
        traj = evolve(np.zeros((2, 2), complex), [ch], rho0, t)
        n = integrate_channel_flux(traj, ChannelKind.CAVITY_PLUS)
        assert n == pytest.approx(1.0 - np.exp(-2 * KAPPA * t[-1]), abs=2e-5)


class TestExpectation:
    def test_identity_gives_trace(self):
        rho = np.diag([0.25, 0.75]).astype(complex)
        assert expectation(rho, np.eye(2, dtype=complex)) == pytest.approx(1.0)

    def test_projector_on_initial_state(self):
        rho = np.zeros((3, 3), complex)
        rho[1, 1] = 1.0
        proj = np.zeros((3, 3), complex)
        proj[1, 1] = 1.0
        assert expectation(rho, proj) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            expectation(np.eye(2, dtype=complex), np.eye(3, dtype=complex))


class TestValidation:
    def test_accepts_valid(self):
        validate_density_matrix(np.diag([0.4, 0.6]).astype(complex))

    def test_rejects_nonhermitian(self):
        bad = np.array([[0.5, 0.2], [0.0, 0.5]], complex)
        with pytest.raises(ValueError):
            validate_density_matrix(bad)

    def test_rejects_negative(self):
        bad = np.diag([1.2, -0.2]).astype(complex)
        with pytest.raises(ValueError):
            validate_density_matrix(bad)
