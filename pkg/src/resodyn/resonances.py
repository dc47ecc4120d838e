"""Resonances of the doubled N^2-dimensional effective operator.

The product basis ``phi_ab = phi_a (x) phi_b`` is ordered row-major: label
``(a, b)`` sits at index ``a * N + b``.  Every N^2 vector or matrix in this
module uses that ordering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .bath import BathFunctions, delta_table
from .errors import DegenerateAtRequestedPoint, DegenerateDenominator, DivisionByZero
from .model import CouplingParams, SystemSpec

COLLISION_TOL = 1e-12
# eigenvalue condition numbers above this flag a (near-)defective matrix; at a
# square-root branch point cond ~ |distance|^-1/2, so 1e6 matches a 1e-12 window
CONDITION_CAP = 1e6
CONTINUATION_STEPS = 64


def basis_labels(dim):
    return [(a, b) for a in range(dim) for b in range(dim)]


def liouvillian_ls(spec: SystemSpec) -> np.ndarray:
    """``L_S = H_S (x) 1 - 1 (x) conj(H_S)``."""
    eye = np.eye(spec.dim)
    return np.kron(spec.hs, eye) - np.kron(eye, spec.hs.conj())


def quadratic_term(spec: SystemSpec, bf: BathFunctions) -> np.ndarray:
    """Coefficient of lambda^2 in the effective operator, from its operator form.

    ``-(alpha G^2 (x) 1 - alpha G (x) G + conj(alpha) G (x) G - conj(alpha) 1 (x) G^2)``
    with ``alpha = <g,|k|^-1 g>/2 - i pi xi0 / 2``.  Built from Kronecker
    products (not from :func:`delta_table`) so the two can be compared.
    """
    alpha = 0.5 * bf.inner_1_over_k - 0.5j * np.pi * bf.xi0
    g = spec.g_matrix
    g2 = g @ g
    eye = np.eye(spec.dim)
    gg = np.kron(g, g.conj())
    return -(alpha * np.kron(g2, eye) - alpha * gg + np.conj(alpha) * gg
             - np.conj(alpha) * np.kron(eye, g2.conj()))


@dataclass(frozen=True, eq=False)
class EffectiveOperator:
    """``sigma L_S + lambda^2 Q`` on the doubled space, kept in its two parts."""

    sigma_part: np.ndarray
    quadratic_part: np.ndarray
    liouvillian: np.ndarray
    quadratic: np.ndarray
    sigma: float
    lam: float
    dim: int

    @property
    def matrix(self):
        return self.sigma_part + self.quadratic_part

    @property
    def basis_labels(self):
        return basis_labels(self.dim)

    def at_sigma(self, sigma):
        return self.liouvillian * sigma + self.quadratic * self.lam ** 2


def effective_operator(spec: SystemSpec, bf: BathFunctions, cp: CouplingParams) -> EffectiveOperator:
    ls = liouvillian_ls(spec)
    q = quadratic_term(spec, bf)
    return EffectiveOperator(sigma_part=cp.sigma * ls, quadratic_part=cp.lam ** 2 * q,
                             liouvillian=ls, quadratic=q, sigma=cp.sigma, lam=cp.lam,
                             dim=spec.dim)


@dataclass(frozen=True, eq=False)
class ResonanceSpectrum:
    """Labelled resonances with biorthogonal eigenvectors.

    ``eigenvalues[a * N + b]`` is the resonance labelled ``(a, b)``.  Column i
    of ``right`` and ``left`` belongs to eigenvalue i and
    ``left[:, i].conj() @ right[:, j] == (i == j)``.  The N resonances born at
    zero carry diagonal labels ``(c, c)`` ordered by increasing imaginary part,
    matching the ascending T-matrix spectrum.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    dim: int

    def value(self, a, b):
        return self.eigenvalues[a * self.dim + b]

    def as_matrix(self):
        return self.eigenvalues.reshape(self.dim, self.dim)

    @property
    def labels(self):
        return basis_labels(self.dim)

    def biorthogonality_defect(self):
        gram = self.left.conj().T @ self.right
        return float(np.max(np.abs(gram - np.eye(len(self.eigenvalues)))))


def biorthogonal_eig(matrix):
    """Eigenvalues with right/left eigenvectors scaled so ``vl_i^H vr_j = delta_ij``.

    Also returns eigenvalue condition numbers ``|vl| |vr| / |vl^H vr|``.
    """
    w, vl, vr = sla.eig(matrix, left=True, right=True)
    overlap = np.einsum("ij,ij->j", vl.conj(), vr)
    cond = np.linalg.norm(vl, axis=0) * np.linalg.norm(vr, axis=0) / np.maximum(np.abs(overlap), 1e-300)
    vr = vr / overlap[None, :]
    return w, vr, vl, cond


def _match(previous, current):
    cost = np.abs(previous[:, None] - current[None, :])
    _, cols = linear_sum_assignment(cost)
    return cols


def _coincident_groups(w, scale):
    n = len(w)
    parent = list(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            if abs(w[i] - w[j]) <= COLLISION_TOL * scale:
                parent[j] = parent[i]
    groups = {}
    for i in range(n):
        groups.setdefault(parent[i], []).append(i)
    return [g for g in groups.values() if len(g) > 1]


def _biorthogonalise_block(vr, vl, idx):
    m = vl[:, idx].conj().T @ vr[:, idx]
    vr[:, idx] = vr[:, idx] @ np.linalg.inv(m)


def resonances_numeric(op: EffectiveOperator, steps: int = CONTINUATION_STEPS) -> ResonanceSpectrum:
    """Dense eigendecomposition with labels continued from sigma = 0.

    Labels follow the sigma = 0 parents ``lambda^2 delta_ab`` along a
    geometric sigma path; at each step eigenvalues are matched to a linear
    prediction by minimum-cost assignment.

    Raises :class:`DegenerateAtRequestedPoint` when an eigenvalue is
    (numerically) defective, or when coinciding eigenvalues descend from
    different parents.  Coincidences inside one family of equal parents (for
    example the zero cluster when ``H_S`` is diagonal) are semisimple and kept.
    """
    n = op.dim
    nn = n * n
    parents = op.lam ** 2 * np.diag(op.quadratic).copy()
    if op.sigma == 0:
        return ResonanceSpectrum(eigenvalues=parents, right=np.eye(nn, dtype=complex),
                                 left=np.eye(nn, dtype=complex), dim=n)

    w, vr, vl, cond = biorthogonal_eig(op.matrix)
    scale = max(1.0, float(np.max(np.abs(w))))
    defective = np.nonzero(cond > CONDITION_CAP)[0]
    if defective.size:
        pairs = [(int(i), int(np.argsort(np.abs(w - w[i]))[1])) for i in defective]
        pairs = sorted({tuple(sorted(p)) for p in pairs})
        raise DegenerateAtRequestedPoint(
            f"defective resonance at sigma={op.sigma}: eigen-indices {pairs}", pairs=pairs)

    path = op.sigma * np.geomspace(1e-6, 1.0, steps)
    prev2, prev = None, parents
    for k, s in enumerate(path):
        ws = w if k == steps - 1 else sla.eigvals(op.at_sigma(s))
        if prev2 is None:
            guess = prev
        else:
            last = path[k - 2] if k > 1 else 0.0
            guess = prev + (prev - prev2) * (s - path[k - 1]) / (path[k - 1] - last)
        order = _match(guess, ws)
        prev2, prev = prev, ws[order]
    order = _match(prev, w)
    label_of = np.empty(nn, dtype=int)
    label_of[order] = np.arange(nn)

    pscale = max(1e-300, float(np.max(np.abs(parents))))
    for grp in _coincident_groups(w, scale):
        labs = label_of[grp]
        if np.ptp(parents[labs].real) + np.ptp(parents[labs].imag) > COLLISION_TOL * pscale:
            pairs = [(basis_labels(n)[labs[0]], basis_labels(n)[x]) for x in labs[1:]]
            raise DegenerateAtRequestedPoint(
                f"resonances collide at sigma={op.sigma}: labels {pairs}", pairs=pairs)
        _biorthogonalise_block(vr, vl, grp)

    # zero-born cluster relabelled by increasing Im
    diag_idx = np.array([a * n + a for a in range(n)])
    cluster = order[diag_idx]
    cluster = cluster[np.argsort(w[cluster].imag, kind="stable")]
    order = order.copy()
    order[diag_idx] = cluster
    return ResonanceSpectrum(eigenvalues=w[order], right=vr[:, order], left=vl[:, order], dim=n)


@dataclass(frozen=True, eq=False)
class TMatrix:
    matrix: np.ndarray
    xi: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self):
        return len(self.xi)


def t_matrix(spec: SystemSpec, bf: BathFunctions) -> TMatrix:
    """Real symmetric population-relaxation matrix and its ascending spectrum.

    Column ``c`` of ``vectors`` is the eigenvector for ``xi[c]``; column 0 is
    the uniform vector ``(1, ..., 1)/sqrt(N)`` with ``xi[0] = 0`` exactly.
    """
    d = delta_table(spec, bf)
    h2 = np.abs(spec.hs) ** 2
    n = spec.dim
    t = np.zeros((n, n))
    hs_tol = 1e-12 * max(1.0, float(np.max(np.abs(spec.hs))))
    for a in range(n):
        for b in range(n):
            if a == b or np.sqrt(h2[a, b]) <= hs_tol:
                continue
            if d[a, b] == 0:
                raise DivisionByZero(f"delta[{a},{b}] = 0 while [H_S][{a},{b}] != 0")
            t[a, b] = -d[a, b].imag / abs(d[a, b]) ** 2 * h2[a, b]
    t = 0.5 * (t + t.T)
    t[np.diag_indices(n)] = -t.sum(axis=1)
    xi, vec = np.linalg.eigh(t)

    scale = max(1.0, float(np.max(np.abs(t))))
    null = np.abs(xi) <= 1e-12 * scale
    if not null.any():
        null[0] = True
    k = int(null.sum())
    xi = xi.copy()
    xi[:k] = 0.0
    # rotate the null space so that its first vector is the uniform one
    ones = np.ones(n) / np.sqrt(n)
    basis = np.column_stack([ones, vec[:, :k]])
    q, _ = np.linalg.qr(basis)
    q = q[:, :k]
    q[:, 0] *= np.sign(q[:, 0].sum())
    vec = np.column_stack([q, vec[:, k:]])
    return TMatrix(matrix=t, xi=xi, vectors=vec)


def eta_ab(spec: SystemSpec, bf: BathFunctions, cp: CouplingParams, a: int, b: int,
           delta: np.ndarray | None = None) -> complex:
    """Second-order expansion of the off-diagonal resonance (a, b) in sigma."""
    if a == b:
        raise ValueError("eta_ab needs a != b; use eps_a_approx for diagonal labels")
    d = delta_table(spec, bf) if delta is None else delta
    hs = spec.hs
    n = spec.dim
    scale = max(1.0, float(np.max(np.abs(d))))
    tol = 1e-12 * scale
    lam2 = cp.lam ** 2
    first = lam2 * d[a, b] + cp.sigma * (hs[a, a] - hs[b, b]).real
    if cp.sigma == 0:
        return complex(first)
    total = 0j
    for c in range(n):
        if c != a and hs[a, c] != 0:
            den = d[c, b] - d[a, b]
            if abs(den) <= tol:
                raise DegenerateDenominator(f"delta[{c},{b}] == delta[{a},{b}]")
            total += abs(hs[a, c]) ** 2 / den
        if c != b and hs[b, c] != 0:
            den = d[a, c] - d[a, b]
            if abs(den) <= tol:
                raise DegenerateDenominator(f"delta[{a},{c}] == delta[{a},{b}]")
            total += abs(hs[b, c]) ** 2 / den
    return complex(first - cp.sigma ** 2 / lam2 * total)


def eps_a_approx(tm: TMatrix, cp: CouplingParams, a: int) -> complex:
    """Leading diagonal resonance ``2i (sigma^2/lambda^2) xi_a``."""
    return 2j * cp.sigma ** 2 / cp.lam ** 2 * tm.xi[a]


def perturbative_table(spec, bf, cp, tm: TMatrix | None = None):
    """All N^2 perturbative resonances in label order (eta off the diagonal)."""
    tm = tm or t_matrix(spec, bf)
    d = delta_table(spec, bf)
    n = spec.dim
    out = np.empty(n * n, dtype=complex)
    for a in range(n):
        for b in range(n):
            out[a * n + b] = eps_a_approx(tm, cp, a) if a == b else eta_ab(spec, bf, cp, a, b, d)
    return out
