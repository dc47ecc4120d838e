"""Closed-form spin-boson analytics: the 4x4 matrix W, its eigenpairs and the
energy-basis reduced dynamics.

The basis of the doubled space is ``(++, +-, -+, --)`` built from the energy
eigenvectors of ``S^z``.  Additive O(lambda^2) remainders of the leading-order
formulas are dropped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ExceptionalPoint, ValidationError
from .model import CouplingParams, DensityMatrix

CRITICAL_TOL = 1e-12

DROPPED_REMAINDERS = ("rho_t entries are leading order: additive O(lambda^2) terms are dropped; "
                      "W omits the O(lambda^2 (sigma + |lambda|)) part of the effective operator")


class Regime(str, enum.Enum):
    OVERLAPPING = "overlapping"
    CRITICAL = "critical"
    ISOLATED = "isolated"


def gamma_star(xi0):
    return np.pi * xi0 / 4.0


def classify(gamma, xi0):
    gs = gamma_star(xi0)
    if abs(gamma - gs) <= CRITICAL_TOL * gs:
        return Regime.CRITICAL
    return Regime.OVERLAPPING if gamma < gs else Regime.ISOLATED


def _check_xi0(xi0):
    if not xi0 > 0 or not np.isfinite(xi0):
        raise ValidationError(f"xi0 must be positive, got {xi0}")


def w_matrix(cp: CouplingParams, xi0: float) -> np.ndarray:
    _check_xi0(xi0)
    k = 0.25j * cp.lam ** 2 * np.pi * xi0
    s = cp.sigma
    return np.array([
        [k, 0, 0, -k],
        [0, s + k, -k, 0],
        [0, -k, -s + k, 0],
        [-k, 0, 0, k],
    ], dtype=complex)


def w_eigenvalues(cp: CouplingParams, xi0: float) -> np.ndarray:
    """``(w1, w2, w3, w4)``; valid at the exceptional point too, where w3 == w4."""
    _check_xi0(xi0)
    q = 0.25 * cp.lam ** 2 * np.pi * xi0
    root = np.sqrt(complex((q - cp.sigma) * (q + cp.sigma)))
    return np.array([0.0, 2j * q, 1j * q + 1j * root, 1j * q - 1j * root], dtype=complex)


def r_parameter(gamma, xi0):
    """``r = (-4 i gamma - sqrt(pi^2 xi0^2 - 16 gamma^2)) / (pi xi0)``, principal branch."""
    _check_xi0(xi0)
    return (-4j * gamma - np.sqrt(complex((np.pi * xi0) ** 2 - 16 * gamma ** 2))) / (np.pi * xi0)


@dataclass(frozen=True, eq=False)
class SpinBosonSolution:
    """Eigen-data of W.

    ``chi[:, j]`` is the right eigenvector for ``w[j]`` and ``chi_star[:, j]`` the
    left one, normalised so ``chi_star[:, j].conj() @ chi[:, j] == 1``.
    """

    xi0: float
    sigma: float
    lam: float
    w: np.ndarray
    r: complex
    chi: np.ndarray
    chi_star: np.ndarray
    regime: Regime

    @property
    def gamma(self):
        return self.sigma / self.lam ** 2

    @property
    def gamma_star(self):
        return gamma_star(self.xi0)


def w_eigenpairs(cp: CouplingParams, xi0: float) -> SpinBosonSolution:
    _check_xi0(xi0)
    gamma = cp.gamma
    regime = classify(gamma, xi0)
    if regime is Regime.CRITICAL:
        raise ExceptionalPoint(f"gamma = gamma_star = {gamma_star(xi0)}: eigenvectors coalesce")
    w = w_eigenvalues(cp, xi0)
    r = complex(r_parameter(gamma, xi0))
    norm = 1 + r * r
    rb = np.conj(r)
    h = 1 / np.sqrt(2)
    chi = np.array([
        [h, h, 0, 0],
        [0, 0, 1 / norm, -r / norm],
        [0, 0, r / norm, 1 / norm],
        [h, -h, 0, 0],
    ], dtype=complex)
    chi_star = np.array([
        [h, h, 0, 0],
        [0, 0, 1, -rb],
        [0, 0, rb, 1],
        [h, -h, 0, 0],
    ], dtype=complex)
    return SpinBosonSolution(xi0=float(xi0), sigma=cp.sigma, lam=cp.lam, w=w, r=r,
                             chi=chi, chi_star=chi_star, regime=regime)


def _as_rho(rho0):
    rho = np.asarray(rho0.rho if isinstance(rho0, DensityMatrix) else rho0, dtype=complex)
    if rho.shape != (2, 2):
        raise ValidationError("spin-boson density matrix must be 2x2")
    return rho


def rho_t_energy_basis(sol: SpinBosonSolution, rho0, t: float) -> np.ndarray:
    """Leading-order reduced density matrix in the energy basis ``(+, -)``.

    Only ``rho0[+,+]`` and ``rho0[+,-]`` are read; the other two entries are
    taken as ``1 - rho0[+,+]`` and ``conj(rho0[+,-])``.  The result is
    Hermitian with unit trace by construction but need not be positive.
    """
    rho = _as_rho(rho0)
    _, w2, w3, w4 = sol.w
    r = sol.r
    pp = rho[0, 0].real
    pm = rho[0, 1]
    mp = np.conj(pm)
    out = np.empty((2, 2), dtype=complex)
    out[0, 0] = 0.5 + 0.5 * np.exp(1j * t * w2) * (2 * pp - 1)
    out[1, 1] = 1 - out[0, 0]
    out[0, 1] = (r / (r * r + 1) * np.exp(1j * t * w3) * (r * pm + mp)
                 + 1 / (r * r + 1) * np.exp(1j * t * w4) * (pm - r * mp))
    out[1, 0] = np.conj(out[0, 1])
    return out


def rho_t_eigen_sum(sol: SpinBosonSolution, rho0, t: float) -> np.ndarray:
    """Generic eigenpair sum for the reduced density matrix.

    ``rho_t[m, n] = sum_j e^{i t w_j} conj(chi*_j[(n, m)]) sum_{k,l} chi_j[(k, l)] rho0[l, k]``.
    Note the transposed index pairs: entry ``(m, n)`` of the state lives on
    ``phi_(n, m)``, which gives the ``e^{-i t H}`` sense of rotation.
    """
    rho = _as_rho(rho0)
    coef = sol.chi.T @ rho.T.ravel()
    out = sol.chi_star.conj() @ (np.exp(1j * t * sol.w) * coef)
    return out.reshape(2, 2).T


def decoherence_rate(sol: SpinBosonSolution) -> float:
    """Slowest decay rate of the energy-basis coherence (Im w4, or Im w3 when isolated)."""
    if sol.regime is Regime.CRITICAL:
        raise ExceptionalPoint("decoherence rate undefined at gamma_star")
    return float(sol.w[3].imag if sol.regime is Regime.OVERLAPPING else sol.w[2].imag)


def sweep_row(gamma, lam, xi0):
    """One row of a gamma sweep; eigenvalues stay defined at the critical point, r is NaN there."""
    cp = CouplingParams(sigma=gamma * lam ** 2, lam=lam)
    w = w_eigenvalues(cp, xi0)
    regime = classify(gamma, xi0)
    r = complex("nan+nanj") if regime is Regime.CRITICAL else complex(r_parameter(gamma, xi0))
    return {"gamma": gamma, "re_w3": w[2].real, "im_w3": w[2].imag, "re_w4": w[3].real,
            "im_w4": w[3].imag, "re_r": r.real, "im_r": r.imag, "regime": regime.value}
