"""The cross-check suite behind ``resodyn oracle-validate``."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import bath as bathmod
from .dynamics import PerturbativePropagator, dephasing_exact, population_generator_expm
from .model import CouplingParams, check_a4, spin_boson_spec
from .oracle import (DiscreteBath, TruncatedSystem, discrete_dephasing, eigen_crosscheck,
                     match_spectra, trace_distance, truncated_trajectory)
from .resonances import effective_operator, t_matrix
from .spin_boson import w_eigenvalues, w_matrix


@dataclass
class CheckResult:
    name: str
    max_error: float
    tolerance: float
    passed: bool
    seconds: float
    detail: str = ""


def _check(name, tol, fn):
    t0 = time.perf_counter()
    try:
        err, detail = fn()
        ok = bool(err <= tol)
    except Exception as exc:  # a crashing check is reported, not raised
        err, detail, ok = float("inf"), f"{type(exc).__name__}: {exc}", False
    return CheckResult(name, float(err), tol, ok, time.perf_counter() - t0, detail)


def validate_all(mc, n_modes=2000, fock_cutoff=30):
    """Run every oracle comparison for the configured model; returns a JSON-ready dict."""
    ff, beta, cp, spec = mc.form_factor, mc.bath.beta, mc.coupling, mc.spec
    bf = bathmod.bath_functions(ff, mc.bath, mc.quadrature)
    rho0 = mc.rho0
    if rho0 is None:
        rho0 = np.full((spec.dim, spec.dim), 0.5 / spec.dim) + 0.5 * np.eye(spec.dim) / spec.dim
    checks = []

    def xi0_limit():
        if not ff.infrared_singular:
            return abs(bf.xi0), "xi0 vanishes for p > -1/2"
        ref = bathmod.xi_zero_limit(ff, beta)
        return abs(bf.xi0 - ref) / ref, f"xi0={bf.xi0!r} reference={ref!r}"

    checks.append(_check("xi0_vs_near_origin_limit", 1e-6, xi0_limit))

    disc = DiscreteBath.from_form_factor(ff, beta, n_modes)
    ts = np.linspace(0.0, 10.0 * beta, 21)[1:]
    gs_cont = {}

    def gamma_s():
        g, s = bf.gamma(ts), bf.s(ts)
        gs_cont["g"], gs_cont["s"] = g, s
        scale_g = np.maximum(np.abs(g), 1e-300)
        scale_s = np.maximum(np.abs(s), 1e-300)
        err = max(np.max(np.abs(disc.gamma(ts) - g) / scale_g), np.max(np.abs(disc.s(ts) - s) / scale_s))
        return err, f"{n_modes} modes, t in (0, {10 * beta}]"

    checks.append(_check("gamma_s_continuum_vs_discrete", 1e-3, gamma_s))

    def dephasing():
        zero = cp.replace(sigma=0.0)
        err = 0.0
        for k, t in enumerate(ts):
            gsv = (gs_cont["g"][k], gs_cont["s"][k]) if gs_cont else None
            a = dephasing_exact(spec, bf, zero, rho0, t, gsv).rho
            b = discrete_dephasing(disc, spec, cp.lam, rho0, t).rho
            err = max(err, trace_distance(a, b))
        return err, "trace distance, sigma = 0"

    checks.append(_check("dephasing_exact_vs_discrete", 1e-5, dephasing))

    def fock():
        sb = spin_boson_spec()
        one = DiscreteBath([1.0 / beta], [0.8], beta)
        sysm = TruncatedSystem(sb, one, 0.0, 0.5, fock_cutoff)
        rho = np.array([[0.6, 0.3 - 0.1j], [0.3 + 0.1j, 0.4]])
        times = np.linspace(0.0, 4 * 2 * np.pi * beta, 25)
        traj = truncated_trajectory(sysm, rho, beta, times)
        err = max(trace_distance(st, discrete_dephasing(one, sb, 0.5, rho, t).rho)
                  for st, t in zip(traj.states, times))
        return err, f"one mode, n_max={fock_cutoff}, dim={sysm.dimension}"

    checks.append(_check("truncated_fock_vs_discrete", 1e-6, fock))

    op = effective_operator(spec, bf, cp)

    def fesh_identity():
        d = bathmod.delta_table(spec, bf)
        scale = max(1.0, float(np.max(np.abs(d))))
        return float(np.max(np.abs(op.quadratic - np.diag(d.ravel())))) / scale, ""

    checks.append(_check("quadratic_block_vs_delta_table", 1e-14, fesh_identity))

    def eff_eigs():
        cc = eigen_crosscheck(op.matrix, tol=1.0)
        return cc.max_error / max(1.0, float(np.max(np.abs(cc.primary)))), cc.method

    checks.append(_check("effective_operator_second_eigensolver", 1e-10, eff_eigs))

    def w_closed():
        err = 0.0
        xi0s = [bf.xi0] if bf.xi0 > 0 else [1.0]
        for xi0 in xi0s + [1.0, 10.0]:
            gs = np.pi * xi0 / 4
            for gam in (0.1 * gs, 0.7 * gs, 1.3 * gs, 10 * gs):
                c = CouplingParams(sigma=gam * cp.lam ** 2, lam=cp.lam)
                closed = w_eigenvalues(c, xi0)
                cc = eigen_crosscheck(w_matrix(c, xi0), tol=1.0)
                num = match_spectra(closed, cc.independent)
                err = max(err, float(np.max(np.abs(num - closed))) / float(np.max(np.abs(closed))))
        return err, "closed-form eigenvalues vs characteristic polynomial"

    checks.append(_check("w_closed_form_vs_charpoly", 1e-10, w_closed))

    def populations():
        if cp.sigma == 0 or not check_a4(spec, bf):
            return 0.0, "skipped: needs sigma > 0 and the golden-rule condition"
        prop = PerturbativePropagator(spec, _spectrum_stub(spec), t_matrix(spec, bf), cp)
        p0 = np.real(np.diag(np.asarray(rho0)))
        rate = 2 * cp.sigma ** 2 / cp.lam ** 2 * max(float(np.max(prop.tmat.xi)), 1e-300)
        err = 0.0
        for t in np.linspace(0.0, 5.0 / rate, 30):
            err = max(err, float(np.max(np.abs(prop.populations(rho0, t)
                                               - population_generator_expm(prop.tmat, cp, p0, t)))))
        return err, ""

    checks.append(_check("population_sum_vs_expm", 1e-10, populations))

    return {"passed": all(c.passed for c in checks), "checks": [asdict(c) for c in checks]}


def _spectrum_stub(spec):
    # the population map does not read the off-diagonal resonances
    from .resonances import ResonanceSpectrum

    nn = spec.dim ** 2
    return ResonanceSpectrum(np.zeros(nn, dtype=complex), np.eye(nn, dtype=complex),
                             np.eye(nn, dtype=complex), spec.dim)
