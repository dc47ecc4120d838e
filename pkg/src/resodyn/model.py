"""Domain types shared by every module.

All matrices live in the eigenbasis ``{phi_a}`` of the interaction operator
``G``.  In that basis ``G = diag(g_levels)`` and the conjugation used by the
doubled (Liouville) space is plain entrywise complex conjugation.

Indices are zero-based throughout: the first level is index 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def _hermiticity_defect(m):
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return float(np.max(np.abs(m - m.conj().T))) / scale if m.size else 0.0


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """The N-level system: ``H_S`` and the spectrum of ``G``, both in the G basis."""

    hs: np.ndarray
    g_levels: np.ndarray
    dim: Optional[int] = None

    def __post_init__(self):
        hs = np.asarray(self.hs, dtype=complex)
        g = np.asarray(self.g_levels, dtype=float)
        if hs.ndim != 2 or hs.shape[0] != hs.shape[1]:
            raise ValidationError(f"hs must be square, got shape {hs.shape}")
        n = hs.shape[0]
        dim = n if self.dim is None else int(self.dim)
        if dim != n:
            raise ValidationError(f"dim={dim} does not match hs of size {n}")
        if dim < 2:
            raise ValidationError("dim must be at least 2")
        if g.shape != (dim,):
            raise ValidationError(f"g_levels must have length {dim}, got shape {g.shape}")
        if not np.all(np.isfinite(g)) or not np.all(np.isfinite(hs)):
            raise ValidationError("hs and g_levels must be finite")
        if _hermiticity_defect(hs) > HERMITIAN_TOL:
            raise ValidationError("hs is not Hermitian")
        object.__setattr__(self, "hs", _frozen(hs))
        object.__setattr__(self, "g_levels", _frozen(g))
        object.__setattr__(self, "dim", dim)

    @property
    def g_matrix(self):
        return np.diag(self.g_levels).astype(complex)

    @property
    def gamma_g(self):
        """min over a != b of (g_a - g_b)^2."""
        g = self.g_levels
        diff = (g[:, None] - g[None, :]) ** 2
        return float(np.min(diff[~np.eye(self.dim, dtype=bool)]))

    def to_dict(self):
        return {
            "dim": self.dim,
            "hs": [[float(z.real), float(z.imag)] for z in self.hs.ravel()],
            "g_levels": [float(x) for x in self.g_levels],
        }

    @classmethod
    def from_dict(cls, d):
        dim = int(d["dim"])
        pairs = np.asarray(d["hs"], dtype=float)
        if pairs.shape != (dim * dim, 2):
            raise ValidationError(
                f"hs must hold {dim * dim} [re, im] pairs in row-major order")
        hs = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(dim, dim)
        return cls(hs=hs, g_levels=d["g_levels"], dim=dim)


@dataclass(frozen=True)
class FormFactor:
    """Coupling profile ``g(r, theta) = r**p * exp(-decay_a * r**decay_m) * g1(theta)``.

    ``angular_sq_integral`` is the integral of ``|g1|^2`` over the unit sphere;
    it fixes the angular normalisation convention (``4*pi`` for ``g1 = 1`` and
    the uniform measure).
    """

    p: float = -0.5
    decay_a: float = 1.0
    decay_m: int = 1
    angular_sq_integral: float = 4 * np.pi

    def __post_init__(self):
        if not np.isfinite(self.p) or self.p < -0.5:
            raise ValidationError(f"infrared exponent p must be >= -1/2, got {self.p}")
        if not self.decay_a > 0 or not np.isfinite(self.decay_a):
            raise ValidationError(f"decay_a must be positive, got {self.decay_a}")
        if self.decay_m not in (1, 2):
            raise ValidationError(f"decay_m must be 1 or 2, got {self.decay_m}")
        if not self.angular_sq_integral >= 0 or not np.isfinite(self.angular_sq_integral):
            raise ValidationError("angular_sq_integral must be a finite non-negative number")

    @property
    def infrared_singular(self):
        return self.p == -0.5

    def satisfies_uv_decay(self, beta):
        # exp(c r) r^p exp(-a r^m) is square integrable for some c > beta/2
        # iff m == 2 or a > beta/2.
        return self.decay_m == 2 or self.decay_a > 0.5 * beta

    def radial_weight(self, r):
        """``angular * r**(2p+2) * exp(-2 a r**m)``: the ``|g|^2 d^3k`` density in r."""
        r = np.asarray(r, dtype=float)
        return self.angular_sq_integral * r ** (2 * self.p + 2) * np.exp(
            -2 * self.decay_a * r ** self.decay_m)

    def to_dict(self):
        return {"p": self.p, "decay_a": self.decay_a, "decay_m": self.decay_m,
                "angular_sq_integral": self.angular_sq_integral}


@dataclass(frozen=True)
class BathParams:
    beta: float = 1.0

    def __post_init__(self):
        if not self.beta > 0 or not np.isfinite(self.beta):
            raise ValidationError(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class CouplingParams:
    sigma: float = 0.0
    lam: float = 0.1

    def __post_init__(self):
        if not self.sigma >= 0 or not np.isfinite(self.sigma):
            raise ValidationError(f"sigma must be >= 0, got {self.sigma}")
        if self.lam == 0 or not np.isfinite(self.lam):
            raise ValidationError("lambda must be a nonzero finite number")

    @property
    def gamma(self):
        return self.sigma / self.lam ** 2

    def replace(self, **kw):
        d = {"sigma": self.sigma, "lam": self.lam}
        d.update(kw)
        return CouplingParams(**d)


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    r_max_factor: float = 1.0

    def __post_init__(self):
        if not (0 < self.rel_tol < 1) or not self.abs_tol > 0:
            raise ValidationError("quadrature tolerances must be positive (rel_tol < 1)")
        if not self.r_max_factor >= 1:
            raise ValidationError("r_max_factor must be >= 1")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValidationError("density matrix must be square")
        if _hermiticity_defect(rho) > HERMITIAN_TOL:
            raise ValidationError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > TRACE_TOL:
            raise ValidationError(f"trace is {np.trace(rho)}, expected 1")
        if np.min(np.linalg.eigvalsh(rho)) < -POSITIVITY_TOL:
            raise ValidationError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "rho", _frozen(rho))

    @property
    def dim(self):
        return self.rho.shape[0]

    @property
    def populations(self):
        return self.rho.diagonal().real.copy()

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.rho, dtype=dtype)


@dataclass
class AssumptionReport:
    """Outcome of an assumption check; truthy iff the assumption holds."""

    ok: bool
    violations: list = field(default_factory=list)
    detail: str = ""

    def __bool__(self):
        return self.ok


def check_a3(spec, bath):
    """Non-degeneracy: all non-zero resonance energies are pairwise distinct.

    ``violations`` lists the (a, b) labels whose value is shared with another pair.
    """
    from .bath import delta_table

    d = delta_table(spec, bath)
    scale = float(np.max(np.abs(d)))
    if scale == 0:
        return AssumptionReport(True, [], "all resonance energies vanish")
    tol = 1e-10 * scale
    labels = [(a, b) for a in range(spec.dim) for b in range(spec.dim)
              if abs(d[a, b]) > tol]
    bad = set()
    for i, (a, b) in enumerate(labels):
        for c, e in labels[i + 1:]:
            if abs(d[a, b] - d[c, e]) <= tol:
                bad.update([(a, b), (c, e)])
    bad = sorted(bad)
    return AssumptionReport(not bad, bad, f"{len(bad)} colliding labels" if bad else "")


def check_a4(spec, bath):
    """Fermi golden rule: ``Im delta_ab > 0`` and ``[H_S]_ab != 0`` for all a != b."""
    from .bath import delta_table

    d = delta_table(spec, bath)
    hs = spec.hs
    im_tol = 1e-12 * max(1.0, float(np.max(np.abs(d))))
    hs_tol = 1e-12 * max(1.0, float(np.max(np.abs(hs))))
    bad = []
    for a in range(spec.dim):
        for b in range(spec.dim):
            if a == b:
                continue
            if not d[a, b].imag > im_tol or not abs(hs[a, b]) > hs_tol:
                bad.append((a, b))
    return AssumptionReport(not bad, bad)


def spin_boson_spec():
    """``H_S = S^z`` written in the eigenbasis of ``G = S^x`` (g = +1/2, -1/2)."""
    return SystemSpec(hs=0.5 * np.array([[0, 1], [1, 0]], dtype=complex),
                      g_levels=[0.5, -0.5])


def random_system(rng, dim, g_scale=1.0):
    """Random Hermitian ``H_S`` (GUE-like) and uniformly drawn ``g`` levels."""
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    hs = 0.5 * (x + x.conj().T)
    g = rng.uniform(-g_scale, g_scale, size=dim)
    return SystemSpec(hs=hs, g_levels=g)


def random_density_matrix(rng, dim, rank=None):
    rank = dim if rank is None else rank
    x = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = x @ x.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)
