"""Brute-force validators that share no numerical path with the main modules.

* :class:`DiscreteBath` replaces the continuum by finitely many modes, which
  turns Gamma(t) and S(t) into plain sums.
* :class:`TruncatedSystem` propagates system + a few Fock-truncated modes
  exactly, then traces the modes out.
* :func:`eigen_crosscheck` recomputes a spectrum without LAPACK's ``geev``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy import integrate
from scipy.optimize import linear_sum_assignment

from .errors import DimensionCapExceeded, NoConvergence, ValidationError
from .model import DensityMatrix, FormFactor, SystemSpec

DIM_CAP = 4096
MAX_MODES = 3


@dataclass(frozen=True, eq=False)
class DiscreteBath:
    """Finite set of bath modes ``omega_j`` with real couplings ``c_j``.

    ``c_j^2`` is the weight of ``|g|^2 d^3k`` carried by mode j.
    """

    omegas: np.ndarray
    couplings: np.ndarray
    beta: float

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.omegas, dtype=float))
        c = np.atleast_1d(np.asarray(self.couplings, dtype=float))
        if w.shape != c.shape or w.ndim != 1 or w.size == 0:
            raise ValidationError("omegas and couplings must be equal-length 1-d arrays")
        if not np.all(w > 0) or len(np.unique(w)) != len(w):
            raise ValidationError("mode frequencies must be positive and distinct")
        if not np.all(np.isfinite(c)):
            raise ValidationError("couplings must be finite")
        if not self.beta > 0:
            raise ValidationError("beta must be positive")
        object.__setattr__(self, "omegas", w)
        object.__setattr__(self, "couplings", c)

    @property
    def modes(self):
        return list(zip(self.omegas.tolist(), self.couplings.tolist()))

    @classmethod
    def from_form_factor(cls, ff: FormFactor, beta: float, n_modes: int = 2000,
                         r_max: float | None = None, r_min: float | None = None):
        """Log-spaced radial shells on ``[r_min, r_max]`` plus one infrared shell ``[0, r_min]``.

        Each shell becomes a single mode at its geometric midpoint with the
        shell's midpoint-rule weight.  The infrared shell carries its exact
        weight at the frequency that also reproduces its ``int w(r)/r dr``,
        which is what dominates Gamma(t) at small r.
        """
        r_min = 1e-4 / beta if r_min is None else r_min
        if r_max is None:
            from .bath import r_max as _rmax
            from .model import QuadratureConfig

            r_max = _rmax(ff, QuadratureConfig())
        edges = np.geomspace(r_min, r_max, n_modes)
        mids = np.sqrt(edges[:-1] * edges[1:])
        weights = ff.radial_weight(mids) * np.diff(edges)
        s = 2 * ff.p + 2
        ir_weight, _ = integrate.quad(lambda r: float(ff.radial_weight(r)), 0.0, r_min)
        ir_omega = r_min * s / (s + 1.0)
        omegas = np.concatenate([[ir_omega], mids])
        weights = np.concatenate([[ir_weight], weights])
        return cls(omegas=omegas, couplings=np.sqrt(weights), beta=beta)

    def gamma(self, t):
        """``sum_j c_j^2 coth(beta w_j / 2) sin^2(w_j t / 2) / w_j^2``."""
        t = np.asarray(t, dtype=float)
        w, c2 = self.omegas, self.couplings ** 2
        terms = c2 / np.tanh(0.5 * self.beta * w) / w ** 2
        out = np.sin(0.5 * np.multiply.outer(t, w)) ** 2 @ terms
        return out if out.ndim else float(out)

    def s(self, t):
        """``(1/2) sum_j c_j^2 (w_j t - sin w_j t) / w_j^2``."""
        t = np.asarray(t, dtype=float)
        w, c2 = self.omegas, self.couplings ** 2
        x = np.multiply.outer(t, w)
        out = 0.5 * ((x - np.sin(x)) @ (c2 / w ** 2))
        return out if out.ndim else float(out)


def discrete_dephasing(bath: DiscreteBath, spec: SystemSpec, lam: float, rho0, t: float) -> DensityMatrix:
    """Exact sigma = 0 evolution driven by the discrete-bath Gamma and S."""
    rho = np.asarray(rho0.rho if isinstance(rho0, DensityMatrix) else rho0, dtype=complex)
    g = spec.g_levels
    alpha = ((g[:, None] ** 2 - g[None, :] ** 2) * bath.s(t)
             + 1j * (g[:, None] - g[None, :]) ** 2 * bath.gamma(t))
    return DensityMatrix(rho * np.exp(1j * lam ** 2 * alpha))


def _ladder(n_max):
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


@dataclass(frozen=True, eq=False)
class TruncatedSystem:
    """System plus at most three Fock-truncated modes.

    ``H = sigma H_S (x) 1 + sum_j w_j n_j + lambda G (x) sum_j c_j (a_j + a_j^dag)/sqrt(2)``
    with the system factor first in every tensor product.
    """

    spec: SystemSpec
    bath: DiscreteBath
    sigma: float
    lam: float
    fock_cutoff: int

    def __post_init__(self):
        m = len(self.bath.omegas)
        if m > MAX_MODES:
            raise DimensionCapExceeded(f"at most {MAX_MODES} modes, got {m}")
        if self.fock_cutoff < 1:
            raise ValidationError("fock_cutoff must be >= 1")
        if self.dimension > DIM_CAP:
            raise DimensionCapExceeded(f"dimension {self.dimension} exceeds {DIM_CAP}")

    @property
    def n_levels(self):
        return self.spec.dim

    @property
    def n_modes(self):
        return len(self.bath.omegas)

    @property
    def dimension(self):
        return self.spec.dim * (self.fock_cutoff + 1) ** len(self.bath.omegas)

    def _mode_op(self, op, j):
        eye = np.eye(self.fock_cutoff + 1)
        mats = [op if k == j else eye for k in range(self.n_modes)]
        out = mats[0]
        for mtx in mats[1:]:
            out = np.kron(out, mtx)
        return out

    @property
    def hamiltonian(self):
        n = self.spec.dim
        nb = (self.fock_cutoff + 1) ** self.n_modes
        a = _ladder(self.fock_cutoff)
        num = a.T @ a
        field_op = np.zeros((nb, nb))
        free = np.zeros((nb, nb))
        for j, (w, c) in enumerate(zip(self.bath.omegas, self.bath.couplings)):
            free += w * self._mode_op(num, j)
            field_op += c * self._mode_op(a + a.T, j) / math.sqrt(2)
        h = (self.sigma * np.kron(self.spec.hs, np.eye(nb)) + np.kron(np.eye(n), free)
             + self.lam * np.kron(self.spec.g_matrix, field_op))
        return 0.5 * (h + h.conj().T)

    def gibbs_modes(self, beta):
        """Truncated Gibbs state of the free modes (exact, normalised on the kept levels)."""
        levels = np.arange(self.fock_cutoff + 1)
        rho = np.ones(1)
        for w in self.bath.omegas:
            p = np.exp(-beta * w * levels)
            rho = np.kron(rho, p / p.sum())
        return np.diag(rho)

    def truncation_estimate(self, beta):
        """Heuristic bound on the cutoff error: thermal plus displacement weight above n_max/2."""
        half = self.fock_cutoff // 2 + 1
        gmax = float(np.max(np.abs(self.spec.g_levels)))
        est = 0.0
        for w, c in zip(self.bath.omegas, self.bath.couplings):
            est += math.exp(-beta * w * half)
            disp = (self.lam * gmax * c / w) ** 2
            # Poisson tail of a coherent displacement, P(n >= half)
            est += float(1 - sum(math.exp(-disp) * disp ** k / math.factorial(k) for k in range(half)))
        return est


@dataclass
class TruncatedTrajectory:
    times: np.ndarray
    states: list
    energies: np.ndarray
    traces: np.ndarray


def truncated_trajectory(ts: TruncatedSystem, rho0_system, beta: float, times) -> TruncatedTrajectory:
    """Reduced states at several times from a single diagonalisation of H."""
    rho_s = np.asarray(rho0_system.rho if isinstance(rho0_system, DensityMatrix) else rho0_system,
                       dtype=complex)
    if rho_s.shape != (ts.spec.dim, ts.spec.dim):
        raise ValidationError("initial system state has the wrong shape")
    h = ts.hamiltonian
    full0 = np.kron(rho_s, ts.gibbs_modes(beta))
    evals, vecs = np.linalg.eigh(h)
    rho_eig = vecs.conj().T @ full0 @ vecs
    n, nb = ts.spec.dim, (ts.fock_cutoff + 1) ** ts.n_modes
    h_eig = np.diag(evals)
    states, energies, traces = [], [], []
    for t in np.atleast_1d(np.asarray(times, dtype=float)):
        ph = np.exp(-1j * evals * t)
        rt_eig = ph[:, None] * rho_eig * ph.conj()[None, :]
        energies.append(float(np.real(np.sum(h_eig.diagonal() * rt_eig.diagonal()))))
        full = vecs @ rt_eig @ vecs.conj().T
        red = np.einsum("aibi->ab", full.reshape(n, nb, n, nb))
        traces.append(float(np.trace(full).real))
        states.append(0.5 * (red + red.conj().T))
    return TruncatedTrajectory(times=np.atleast_1d(times), states=states,
                               energies=np.array(energies), traces=np.array(traces))


def truncated_evolve(ts: TruncatedSystem, rho0_system, beta: float, t: float) -> DensityMatrix:
    traj = truncated_trajectory(ts, rho0_system, beta, [t])
    return DensityMatrix(traj.states[0])


def trace_distance(rho1, rho2) -> float:
    """``(1/2) ||rho1 - rho2||_1``."""
    diff = np.asarray(rho1, dtype=complex) - np.asarray(rho2, dtype=complex)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


# ---------------------------------------------------------------- eigenvalues

def _faddeev_leverrier(a):
    # characteristic polynomial coefficients, highest degree first
    n = a.shape[0]
    coeffs = [1.0 + 0j]
    m = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * eye
        coeffs.append(-np.trace(a @ m) / k)
    return np.array(coeffs)


def _newton_polish(a, z, iters=60):
    n = a.shape[0]
    eye = np.eye(n)
    scale = max(1.0, float(np.max(np.abs(a))))
    for _ in range(iters):
        try:
            tr = np.trace(np.linalg.inv(z * eye - a))
        except np.linalg.LinAlgError:
            return z
        if not np.isfinite(tr) or tr == 0:
            return z
        step = 1.0 / tr
        z = z - step
        if abs(step) <= 1e-16 * scale:
            break
    return z


def charpoly_eigvals(matrix) -> np.ndarray:
    """Roots of the characteristic polynomial, each refined by Newton on ``det(zI - A)``."""
    a = np.asarray(matrix, dtype=complex)
    scale = float(np.max(np.abs(a))) or 1.0
    roots = np.roots(_faddeev_leverrier(a / scale)) * scale
    if len(roots) < a.shape[0]:
        roots = np.concatenate([roots, np.zeros(a.shape[0] - len(roots))])
    return np.array([_newton_polish(a, z) for z in roots])


def qz_eigvals(matrix) -> np.ndarray:
    """Eigenvalues as the generalized pencil ``(A, I)`` through the QZ algorithm."""
    a = np.asarray(matrix, dtype=complex)
    return sla.eigvals(a, np.eye(a.shape[0]), homogeneous_eigvals=False)


@dataclass
class CrossCheck:
    primary: np.ndarray
    independent: np.ndarray
    max_error: float
    method: str


def match_spectra(x, y):
    """Reorder ``y`` to the minimum-cost matching with ``x``."""
    cost = np.abs(np.asarray(x)[:, None] - np.asarray(y)[None, :])
    _, cols = linear_sum_assignment(cost)
    return np.asarray(y)[cols]


def eigen_crosscheck(matrix, tol: float = 1e-10) -> CrossCheck:
    """Compare ``numpy.linalg.eigvals`` with a second route.

    For ``n <= 8`` the second route is the characteristic polynomial
    (Faddeev-LeVerrier) with Newton refinement; above that the QZ algorithm
    on the pencil ``(A, I)``.  Raises :class:`NoConvergence` if they differ by more than
    ``tol * max(1, max|w|)``.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("matrix must be square")
    n = a.shape[0]
    if n > 256:
        raise DimensionCapExceeded("eigen_crosscheck supports n <= 256")
    primary = np.linalg.eigvals(a)
    if n <= 8:
        other, method = charpoly_eigvals(a), "charpoly"
    else:
        other, method = qz_eigvals(a), "qz"
    other = match_spectra(primary, other)
    err = float(np.max(np.abs(primary - other))) if n else 0.0
    if err > tol * max(1.0, float(np.max(np.abs(primary)))):
        raise NoConvergence(f"eigenvalue routes disagree by {err:.3g} ({method})")
    return CrossCheck(primary=primary, independent=other, max_error=err, method=method)
