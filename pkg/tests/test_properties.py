import json

import numpy as np
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from resodyn.bath import delta_table
from resodyn.config import default_config_dict, parse_model_config
from resodyn.dynamics import PerturbativePropagator, dephasing_exact, manifold_distance
from resodyn.model import CouplingParams, SystemSpec, random_density_matrix, random_system
from resodyn.resonances import t_matrix
from resodyn.spin_boson import gamma_star, rho_t_energy_basis, w_eigenpairs

seeds = st.integers(0, 2 ** 32 - 1)
dims = st.integers(2, 5)
levels = st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=6)
times = st.floats(0, 1e3, allow_nan=False)

FAST = settings(max_examples=40, deadline=None)


@FAST
@given(levels)
def test_delta_antisymmetry_and_decay_sign(bf_default, g):
    d = delta_table(SystemSpec(hs=np.eye(len(g)), g_levels=g), bf_default)
    scale = max(1.0, float(np.max(np.abs(d))))
    assert np.max(np.abs(d + d.T.conj())) <= 1e-14 * scale
    assert np.all(d.imag >= 0)
    assert np.all(np.diag(d) == 0)


@FAST
@given(seeds, dims)
def test_t_matrix_psd_with_zero_row_sums(bf_default, seed, n):
    tm = t_matrix(random_system(np.random.default_rng(seed), n), bf_default)
    scale = max(1.0, float(np.max(np.abs(tm.matrix))))
    assert np.max(np.abs(tm.matrix.sum(axis=1))) <= 1e-12 * scale
    assert np.min(np.linalg.eigvalsh(tm.matrix)) >= -1e-12 * scale
    assert np.all(np.diff(tm.xi) >= 0) and tm.xi[0] == 0


@FAST
@given(seeds, dims)
def test_system_spec_round_trip(seed, n):
    spec = random_system(np.random.default_rng(seed), n)
    for dump, load in ((json.dumps, json.loads), (yaml.safe_dump, yaml.safe_load)):
        back = SystemSpec.from_dict(load(dump(spec.to_dict())))
        assert np.array_equal(back.hs, spec.hs) and np.array_equal(back.g_levels, spec.g_levels)


@FAST
@given(st.floats(0, 1, allow_nan=False), st.floats(0.01, 2, allow_nan=False),
       st.floats(0.2, 5, allow_nan=False))
def test_config_round_trip(sigma, lam, beta):
    raw = default_config_dict()
    raw["coupling"] = {"sigma": sigma, "lambda": lam}
    raw["bath"]["beta"] = beta
    raw["bath"]["form_factor"]["decay_a"] = beta
    first = parse_model_config(raw)
    second = parse_model_config(yaml.safe_load(yaml.safe_dump(first.raw)))
    assert first.coupling == second.coupling
    assert first.bath == second.bath and first.form_factor == second.form_factor
    assert np.array_equal(first.spec.hs, second.spec.hs)
    assert np.array_equal(first.rho0.rho, second.rho0.rho)


@FAST
@given(seeds, dims, st.floats(0.01, 2, allow_nan=False), st.floats(0, 50, allow_nan=False))
def test_dephasing_preserves_trace_and_positivity(bf_default, seed, n, lam, t):
    rng = np.random.default_rng(seed)
    spec = random_system(rng, n)
    rho = random_density_matrix(rng, n)
    out = dephasing_exact(spec, bf_default, CouplingParams(0.0, lam), rho, t).rho
    assert abs(np.trace(out) - 1) <= 1e-12
    assert np.min(np.linalg.eigvalsh(out)) >= -1e-12
    assert manifold_distance(out) <= manifold_distance(rho.rho) + 1e-12


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(2, 4), st.floats(1e-4, 1e-2), times)
def test_perturbative_propagator_preserves_trace(bf_default, seed, n, ratio, t):
    rng = np.random.default_rng(seed)
    spec = random_system(rng, n)
    lam = 0.1
    prop = PerturbativePropagator.build(spec, bf_default, CouplingParams(ratio * lam ** 2, lam))
    out = prop.evolve(random_density_matrix(rng, n), t)
    assert abs(np.trace(out) - 1) <= 1e-10
    assert np.max(np.abs(out - out.conj().T)) <= 1e-10


@FAST
@given(st.floats(0.01, 50).filter(lambda r: abs(r - 1) > 1e-3), times, seeds)
def test_spin_boson_trace_and_hermiticity(bf_default, ratio, t, seed):
    lam = 0.1
    cp = CouplingParams(ratio * gamma_star(bf_default.xi0) * lam ** 2, lam)
    sol = w_eigenpairs(cp, bf_default.xi0)
    rho = random_density_matrix(np.random.default_rng(seed), 2)
    out = rho_t_energy_basis(sol, rho, t)
    assert np.trace(out) == 1
    assert np.array_equal(out, out.conj().T)
