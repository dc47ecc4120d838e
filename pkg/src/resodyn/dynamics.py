"""Reduced dynamics of the N-level system.

Two propagators are provided: the exact sigma = 0 dephasing map, and the
leading-order perturbative map for sigma > 0 built from labelled resonances
and the T matrix.  Matrix indices are in the G eigenbasis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bath import BathFunctions
from .errors import SigmaNotZero, ValidationError
from .model import POSITIVITY_TOL, CouplingParams, DensityMatrix, SystemSpec
from .resonances import ResonanceSpectrum, TMatrix, effective_operator, eps_a_approx, resonances_numeric, t_matrix


def _rho_array(rho0, dim=None):
    rho = np.asarray(rho0.rho if isinstance(rho0, DensityMatrix) else rho0, dtype=complex)
    if dim is not None and rho.shape != (dim, dim):
        raise ValidationError(f"density matrix must be {dim}x{dim}, got {rho.shape}")
    return rho


@dataclass(frozen=True, eq=False)
class DephasingPropagator:
    """Exact sigma = 0 evolution ``rho_t[a, b] = rho0[a, b] exp(i lambda^2 alpha_ab(t))``.

    ``alpha_ab(t) = (g_a^2 - g_b^2) S(t) + i (g_a - g_b)^2 Gamma(t)``.
    """

    spec: SystemSpec
    bf: BathFunctions
    lam: float

    def bath_values(self, t):
        return float(self.bf.gamma(t)), float(self.bf.s(t))

    def alpha_table(self, t, gamma_s=None):
        gam, s = self.bath_values(t) if gamma_s is None else gamma_s
        g = self.spec.g_levels
        return ((g[:, None] ** 2 - g[None, :] ** 2) * s
                + 1j * (g[:, None] - g[None, :]) ** 2 * gam)

    def alpha(self, a, b, t):
        return complex(self.alpha_table(t)[a, b])

    def evolve(self, rho0, t, gamma_s=None) -> np.ndarray:
        if t < 0:
            raise ValueError("t must be >= 0")
        rho = _rho_array(rho0, self.spec.dim)
        return rho * np.exp(1j * self.lam ** 2 * self.alpha_table(t, gamma_s))


def dephasing_exact(spec: SystemSpec, bf: BathFunctions, cp: CouplingParams, rho0, t: float,
                    gamma_s=None) -> DensityMatrix:
    """Exact reduced state at ``sigma = 0``.

    ``gamma_s`` may carry precomputed ``(Gamma(t), S(t))`` to skip the quadrature.
    """
    if cp.sigma != 0:
        raise SigmaNotZero(f"exact dephasing needs sigma = 0, got {cp.sigma}")
    out = DephasingPropagator(spec, bf, cp.lam).evolve(rho0, t, gamma_s)
    low = float(np.min(np.linalg.eigvalsh(out)))
    if low < -POSITIVITY_TOL:
        raise ValidationError(f"dephased state lost positivity (min eigenvalue {low:.3g})")
    return DensityMatrix(out)


@dataclass(frozen=True, eq=False)
class PerturbativePropagator:
    """Leading-order map from resonances: coherences ``e^{i t eps_ba} rho0[a, b]`` and
    populations ``1/N + sum_b D_ab(t) rho0[b, b]``.

    ``diag_resonances`` selects what enters ``D_ab``: ``"leading"`` uses
    ``2i (sigma^2/lambda^2) xi_c`` and ``"numeric"`` the labelled eigenvalues
    ``eps_cc`` of the effective operator.
    """

    spec: SystemSpec
    spectrum: ResonanceSpectrum
    tmat: TMatrix
    cp: CouplingParams
    diag_resonances: str = "leading"
    eps_diag: np.ndarray = field(init=False)

    def __post_init__(self):
        n = self.spec.dim
        if self.diag_resonances == "leading":
            eps = np.array([eps_a_approx(self.tmat, self.cp, c) for c in range(n)])
        elif self.diag_resonances == "numeric":
            eps = np.array([self.spectrum.value(c, c) for c in range(n)])
        else:
            raise ValueError(f"unknown diag_resonances {self.diag_resonances!r}")
        object.__setattr__(self, "eps_diag", eps)

    @classmethod
    def build(cls, spec, bf, cp, diag_resonances="leading"):
        spectrum = resonances_numeric(effective_operator(spec, bf, cp))
        return cls(spec, spectrum, t_matrix(spec, bf), cp, diag_resonances)

    def d_matrix(self, t):
        """``D[a, b] = sum_{c >= 2} e^{i t eps_cc} conj(phi_c[b]) phi_c[a]`` (c = 1 is the uniform vector)."""
        phi = self.tmat.vectors[:, 1:]
        ph = np.exp(1j * t * self.eps_diag[1:])
        return (phi * ph[None, :]) @ phi.conj().T

    def offdiag(self, rho0, t, a, b):
        rho = _rho_array(rho0, self.spec.dim)
        return complex(np.exp(1j * t * self.spectrum.value(b, a)) * rho[a, b])

    def populations(self, rho0, t):
        p0 = _rho_array(rho0, self.spec.dim).diagonal()
        return (1.0 / self.spec.dim + self.d_matrix(t) @ p0).real

    def evolve(self, rho0, t):
        """Full leading-order matrix; not guaranteed to be positive."""
        rho = _rho_array(rho0, self.spec.dim)
        n = self.spec.dim
        eps = self.spectrum.as_matrix()
        out = np.exp(1j * t * eps.T) * rho
        out[np.diag_indices(n)] = self.populations(rho, t)
        return out


def reduced_offdiag(spec, bf, cp, rho0, t, a, b, propagator: PerturbativePropagator | None = None) -> complex:
    if a == b:
        raise ValueError("reduced_offdiag needs a != b")
    prop = propagator or PerturbativePropagator.build(spec, bf, cp)
    return prop.offdiag(rho0, t, a, b)


def reduced_diag(spec, bf, cp, rho0, t, a, propagator: PerturbativePropagator | None = None) -> float:
    prop = propagator or PerturbativePropagator.build(spec, bf, cp)
    return float(prop.populations(rho0, t)[a])


def population_generator_expm(tmat: TMatrix, cp: CouplingParams, p0, t):
    """``exp(-2 t (sigma^2/lambda^2) T) p0`` evaluated by dense matrix exponential."""
    from scipy.linalg import expm

    return expm(-2 * t * cp.sigma ** 2 / cp.lam ** 2 * tmat.matrix) @ np.asarray(p0)


def manifold_distance(rho) -> float:
    """Trace norm of the off-diagonal part: distance to the diagonal states."""
    rho = _rho_array(rho)
    off = rho - np.diag(rho.diagonal())
    return float(np.sum(np.linalg.svd(off, compute_uv=False)))


@dataclass
class ManifoldReport:
    ok: bool
    max_ratio: float
    constant: float
    times: np.ndarray
    distance: np.ndarray
    bound: np.ndarray

    def __bool__(self):
        return self.ok


def manifold_bound_check(spec, bf, cp, rho0, t_grid, constant=None, gamma_values=None,
                         s_values=None) -> ManifoldReport:
    """Check ``dist(rho_t) <= C exp(-lambda^2 gamma_G Gamma(t)) dist(rho0)`` on a grid.

    ``C`` defaults to ``N**2``.  ``max_ratio`` is the largest ``dist / bound``
    over points with a nonzero bound (0 when every bound vanishes).
    Precomputed ``Gamma`` and ``S`` on the grid may be passed to skip quadrature.
    """
    if cp.sigma != 0:
        raise SigmaNotZero("manifold bound is stated for sigma = 0")
    n = spec.dim
    c = float(n * n if constant is None else constant)
    prop = DephasingPropagator(spec, bf, cp.lam)
    ts = np.asarray(t_grid, dtype=float)
    gam = np.asarray(bf.gamma(ts) if gamma_values is None else gamma_values, dtype=float)
    s = np.asarray(bf.s(ts) if s_values is None else s_values, dtype=float)
    d0 = manifold_distance(rho0)
    dist = np.array([manifold_distance(prop.evolve(rho0, t, (g, sv))) for t, g, sv in zip(ts, gam, s)])
    bound = c * np.exp(-cp.lam ** 2 * spec.gamma_g * gam) * d0
    slack = 1e-12 * max(d0, 1e-300)
    ok = bool(np.all(dist <= bound + slack))
    pos = bound > 0
    ratio = float(np.max(dist[pos] / bound[pos])) if pos.any() else 0.0
    return ManifoldReport(ok=ok, max_ratio=ratio, constant=c, times=ts, distance=dist, bound=bound)


def default_time_grid(spectrum: ResonanceSpectrum, points: int = 30, span: float = 20.0):
    """``t = 0`` plus a geometric grid up to ``span / min Im eps`` over resonances with Im eps > 0."""
    im = spectrum.eigenvalues.imag
    scale = max(1e-300, float(np.max(np.abs(spectrum.eigenvalues))))
    pos = im[im > 1e-12 * scale]
    if pos.size == 0:
        raise ValidationError("no decaying resonance to set a time scale")
    t_end = span / float(np.min(pos))
    t_start = min(0.1 / float(np.max(pos)), 1e-3 * t_end)
    return np.concatenate([[0.0], np.geomspace(t_start, t_end, points - 1)])


def fit_decay_rate(ts, values):
    """Least-squares slope of ``-log|values|`` against ``ts``."""
    ts = np.asarray(ts, dtype=float)
    y = -np.log(np.abs(np.asarray(values)))
    slope, _ = np.polyfit(ts, y, 1)
    return float(slope)
