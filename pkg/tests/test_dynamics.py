import math

import numpy as np
import pytest

from resodyn.bath import delta_table
from resodyn.dynamics import (DephasingPropagator, PerturbativePropagator, default_time_grid,
                              dephasing_exact, fit_decay_rate, manifold_bound_check,
                              manifold_distance, population_generator_expm, reduced_diag,
                              reduced_offdiag)
from resodyn.errors import SigmaNotZero
from resodyn.model import (CouplingParams, DensityMatrix, SystemSpec, check_a4, random_density_matrix,
                           random_system, spin_boson_spec)
from resodyn.spin_boson import decoherence_rate, gamma_star, rho_t_energy_basis, w_eigenpairs


class TestDephasing:
    def test_t_zero_and_sigma_guard(self, rng, bf_default):
        spec = random_system(rng, 3)
        rho = random_density_matrix(rng, 3)
        out = dephasing_exact(spec, bf_default, CouplingParams(0.0, 0.3), rho, 0.0)
        assert np.array_equal(out.rho, rho.rho)
        with pytest.raises(SigmaNotZero):
            dephasing_exact(spec, bf_default, CouplingParams(0.1, 0.3), rho, 1.0)

    def test_diagonal_invariant_and_modulus_law(self, rng, bf_default):
        spec = random_system(rng, 4)
        rho = random_density_matrix(rng, 4)
        lam, t = 0.4, 3.0
        out = dephasing_exact(spec, bf_default, CouplingParams(0.0, lam), rho, t).rho
        assert np.array_equal(out.diagonal(), rho.rho.diagonal())
        g = spec.g_levels
        gam = bf_default.gamma(t)
        want = np.abs(rho.rho) * np.exp(-lam ** 2 * (g[:, None] - g[None, :]) ** 2 * gam)
        assert np.allclose(np.abs(out), want, rtol=1e-12, atol=0)

    def test_diagonal_state_is_fixed(self, bf_default):
        spec = random_system(np.random.default_rng(3), 3)
        rho = DensityMatrix(np.diag([0.2, 0.5, 0.3]))
        out = dephasing_exact(spec, bf_default, CouplingParams(0.0, 1.0), rho, 7.0)
        assert np.array_equal(out.rho, rho.rho)

    def test_alpha_table(self, bf_default):
        prop = DephasingPropagator(spin_boson_spec(), bf_default, 0.1)
        t = 2.0
        assert prop.alpha(0, 0, t) == 0
        assert prop.alpha(0, 1, t) == pytest.approx(1j * bf_default.gamma(t), rel=1e-15)
        assert prop.alpha(1, 0, t).imag >= 0

    def test_spin_boson_modulus(self, bf_default):
        rho = np.array([[0.5, 0.4], [0.4, 0.5]])
        lam = 0.3
        for t in (0.5, 4.0):
            out = dephasing_exact(spin_boson_spec(), bf_default, CouplingParams(0.0, lam), rho, t).rho
            assert abs(out[0, 1]) == pytest.approx(0.4 * math.exp(-lam ** 2 * bf_default.gamma(t)), rel=1e-13)


class TestPerturbative:
    def test_offdiag_sigma_zero(self, rng, bf_default):
        spec = random_system(rng, 3)
        rho = random_density_matrix(rng, 3)
        cp = CouplingParams(0.0, 0.2)
        d = delta_table(spec, bf_default)
        t = 5.0
        got = reduced_offdiag(spec, bf_default, cp, rho, t, 0, 2)
        assert got == pytest.approx(np.exp(1j * t * 0.04 * d[2, 0]) * rho.rho[0, 2], rel=1e-13)
        zero = np.eye(3) / 3
        assert reduced_offdiag(spec, bf_default, cp, zero, t, 1, 2) == 0

    def test_offdiag_rate_matches_dephasing_slope(self, bf_default):
        spec = SystemSpec(hs=np.eye(2), g_levels=[0.0, 1.0])
        lam = 0.2
        t1 = 50.0
        ts = np.linspace(t1, 10 * t1, 5)
        rho = np.array([[0.5, 0.5], [0.5, 0.5]])
        exact = [dephasing_exact(spec, bf_default, CouplingParams(0.0, lam), rho, t).rho[0, 1] for t in ts]
        rate = fit_decay_rate(ts, exact)
        assert rate == pytest.approx(lam ** 2 * delta_table(spec, bf_default)[1, 0].imag, rel=0.05)

    def test_populations_frozen_at_sigma_zero(self, rng, bf_default):
        spec = random_system(rng, 3)
        rho = random_density_matrix(rng, 3)
        cp = CouplingParams(0.0, 0.1)
        for t in (0.0, 10.0, 1e4):
            p = [reduced_diag(spec, bf_default, cp, rho, t, a) for a in range(3)]
            assert np.allclose(p, rho.populations, atol=1e-14)

    def test_populations_relax_to_uniform(self, rng, bf_default):
        spec = random_system(rng, 3)
        cp = CouplingParams(0.002, 0.1)
        prop = PerturbativePropagator.build(spec, bf_default, cp)
        rho = random_density_matrix(rng, 3)
        slow = 2 * cp.sigma ** 2 / cp.lam ** 2 * prop.tmat.xi[1]
        assert np.allclose(prop.populations(rho, 60 / slow), 1 / 3, atol=1e-12)

    def test_populations_match_matrix_exponential(self, rng, bf_default):
        spec = random_system(rng, 4)
        assert check_a4(spec, bf_default)
        cp = CouplingParams(0.003, 0.1)
        prop = PerturbativePropagator.build(spec, bf_default, cp)
        rho = random_density_matrix(rng, 4)
        for t in np.geomspace(1.0, 1e6, 12):
            want = population_generator_expm(prop.tmat, cp, rho.populations, t)
            assert np.allclose(prop.populations(rho, t), want, atol=1e-10, rtol=0)

    def test_numeric_diag_resonances_close_to_leading(self, rng, bf_default):
        spec = random_system(rng, 3)
        cp = CouplingParams(1e-4, 0.1)
        a = PerturbativePropagator.build(spec, bf_default, cp, "leading")
        b = PerturbativePropagator.build(spec, bf_default, cp, "numeric")
        assert np.allclose(a.eps_diag, b.eps_diag, rtol=1e-3, atol=1e-15)
        with pytest.raises(ValueError):
            PerturbativePropagator.build(spec, bf_default, cp, "other")

    def test_offdiag_rate_fit(self, rng, bf_default):
        spec = random_system(rng, 3)
        cp = CouplingParams(0.002, 0.1)
        prop = PerturbativePropagator.build(spec, bf_default, cp)
        rho = random_density_matrix(rng, 3)
        t1 = 1 / prop.spectrum.value(1, 0).imag
        ts = np.linspace(t1, 10 * t1, 6)
        vals = [prop.offdiag(rho, t, 0, 1) for t in ts]
        assert fit_decay_rate(ts, vals) == pytest.approx(prop.spectrum.value(1, 0).imag, rel=1e-10)

    def test_spin_boson_cross_basis(self, bf_default):
        spec = spin_boson_spec()
        _, u = np.linalg.eigh(spec.hs)
        u = u[:, ::-1]  # energy eigenvectors, + first
        rho_z = np.array([[0.7, 0.2 + 0.1j], [0.2 - 0.1j, 0.3]])
        rho_g = u @ rho_z @ u.conj().T
        lam = 0.1
        for ratio in (0.001, 0.01):
            cp = CouplingParams(ratio * gamma_star(bf_default.xi0) * lam ** 2, lam)
            prop = PerturbativePropagator.build(spec, bf_default, cp, "numeric")
            sol = w_eigenpairs(cp, bf_default.xi0)
            err = 0.0
            for t in np.linspace(0.0, 5 / decoherence_rate(sol), 15):
                a = u.conj().T @ prop.evolve(rho_g, t) @ u
                err = max(err, np.max(np.abs(a - rho_t_energy_basis(sol, rho_z, t))))
            # the two leading-order maps differ at O(sigma / lambda^2)
            assert err < ratio


class TestManifold:
    def test_distance_values(self, rng):
        assert manifold_distance(np.diag([0.3, 0.7])) == 0
        assert manifold_distance(0.5 * np.ones((2, 2))) == pytest.approx(1.0, rel=1e-15)
        rho = random_density_matrix(rng, 4).rho
        phases = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 4)))
        assert manifold_distance(phases @ rho @ phases.conj().T) == pytest.approx(manifold_distance(rho), rel=1e-12)

    def test_bound_holds(self, rng, bf_default):
        spec = random_system(rng, 3)
        rho = random_density_matrix(rng, 3)
        ts = np.linspace(0, 20, 12)
        rep = manifold_bound_check(spec, bf_default, CouplingParams(0.0, 0.3), rho, ts)
        assert rep.ok and rep.max_ratio <= 1.0 and rep.constant == 9

    def test_diagonal_state(self, bf_default):
        rep = manifold_bound_check(spin_boson_spec(), bf_default, CouplingParams(0.0, 0.3),
                                   np.diag([0.4, 0.6]), [0.0, 1.0])
        assert rep.ok and rep.max_ratio == 0.0

    def test_repeated_levels_reduce_to_orbital_stability(self, rng, bf_default):
        spec = SystemSpec(hs=np.eye(3), g_levels=[0.2, 0.2, 0.7])
        assert spec.gamma_g == 0
        rho = random_density_matrix(rng, 3)
        rep = manifold_bound_check(spec, bf_default, CouplingParams(0.0, 0.5), rho, [0.0, 2.0, 8.0])
        assert rep.ok
        assert np.allclose(rep.bound, 9 * manifold_distance(rho))

    def test_sigma_guard(self, bf_default):
        with pytest.raises(SigmaNotZero):
            manifold_bound_check(spin_boson_spec(), bf_default, CouplingParams(0.1, 0.1), np.eye(2) / 2, [1.0])


def test_default_time_grid(rng, bf_default):
    from resodyn.resonances import effective_operator, resonances_numeric

    spec = random_system(rng, 3)
    sp = resonances_numeric(effective_operator(spec, bf_default, CouplingParams(0.002, 0.1)))
    grid = default_time_grid(sp, 30)
    im = sp.eigenvalues.imag
    assert grid[0] == 0 and len(grid) == 30
    assert grid[-1] == pytest.approx(20 / im[im > 1e-12 * np.max(np.abs(sp.eigenvalues))].min())
    assert np.all(np.diff(grid) > 0)
