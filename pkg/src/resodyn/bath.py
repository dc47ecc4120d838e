"""Bath integrals: coupling moments, the zero-frequency spectral density xi(0),
the decoherence function Gamma(t), the phase function S(t), and the table of
sigma = 0 resonance energies delta_ab.

Radial integrals are done with adaptive Gauss-Kronrod (QUADPACK via
``scipy.integrate.quad``) on panels covering ``[0, R_max]``.  Integrands are
written in forms that stay finite at ``r = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DivergentIntegral, NoConvergence, ValidationError
from .model import BathParams, FormFactor, QuadratureConfig

_SERIES_CUT = 1e-6


def xcoth(x):
    """``x * coth(x)`` with the removable singularity at 0 filled in."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SERIES_CUT
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(small, 1.0 + x * x / 3.0, x / np.tanh(np.where(small, 1.0, x)))
    return out if out.ndim else float(out)


def one_minus_sinc(x):
    """``1 - sin(x)/x``, accurate for small x."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    x2 = x * x
    series = x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = 1.0 - np.sin(x) / np.where(small, 1.0, x)
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)


def r_max(ff: FormFactor, quad: QuadratureConfig) -> float:
    """Radius beyond which ``exp(-2 a R^m) R^(2p+2)`` is below ``abs_tol * 1e-3``."""
    target = quad.abs_tol * 1e-3
    s, a, m = 2 * ff.p + 2, ff.decay_a, ff.decay_m

    def log_env(r):
        return -2 * a * r ** m + s * math.log(r)

    peak = (s / (2 * a * m)) ** (1.0 / m)
    log_target = math.log(target)
    if log_env(peak) <= log_target:
        return peak * quad.r_max_factor
    lo, hi = peak, 2 * peak
    while log_env(hi) > log_target:
        lo, hi = hi, 2 * hi
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if log_env(mid) > log_target:
            lo = mid
        else:
            hi = mid
    return hi * quad.r_max_factor


def _panel_edges(rmax, t):
    if t <= 0:
        return np.array([0.0, rmax])
    n = max(1, int(math.ceil(rmax * t / math.pi)))
    return np.linspace(0.0, rmax, n + 1)


def _integrate_panels(f, edges, quad):
    total = 0.0
    err = 0.0
    epsabs = quad.abs_tol / max(1, len(edges) - 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=quad.rel_tol, limit=200)
        total += val
        err += e
    if err > max(quad.abs_tol, quad.rel_tol * abs(total)) * 10:
        raise NoConvergence(f"quadrature error estimate {err:.3g} exceeds tolerance")
    return total


def inner_1_over_k(ff: FormFactor, quad: QuadratureConfig | None = None) -> float:
    """``<g, |k|^-1 g> = angular * int_0^inf r^(2p+1) exp(-2 a r^m) dr`` by quadrature."""
    quad = quad or QuadratureConfig()
    s = 2 * ff.p + 1
    if s <= -1:
        raise DivergentIntegral(f"integrand r^{s} is not integrable at the origin")
    if ff.angular_sq_integral == 0:
        return 0.0
    a, m = ff.decay_a, ff.decay_m
    rm = r_max(ff, quad)
    f = lambda r: r ** s * math.exp(-2 * a * r ** m)
    edges = np.linspace(0.0, rm, 9)
    return ff.angular_sq_integral * _integrate_panels(f, edges, quad)


def inner_1_over_k_closed(ff: FormFactor) -> float:
    """Gamma-function form of :func:`inner_1_over_k` for the parametric family."""
    s = 2 * ff.p + 1
    if s <= -1:
        raise DivergentIntegral(f"integrand r^{s} is not integrable at the origin")
    m, c = ff.decay_m, 2 * ff.decay_a
    nu = (s + 1) / m
    return ff.angular_sq_integral * special.gamma(nu) / (m * c ** nu)


def _h_near_origin(ff, beta):
    # limit r -> 0 of r^(2p+2) coth(beta r / 2): 2/beta for p = -1/2, else 0
    return 2.0 / beta if ff.infrared_singular else 0.0


def xi_zero_limit(ff: FormFactor, beta: float) -> float:
    """Near-origin analytic reduction of xi(0): ``angular * h(0) / 2``."""
    return 0.5 * ff.angular_sq_integral * _h_near_origin(ff, beta)


def _xi_eps(ff, beta, eps, quad):
    # (1/pi) int coth(beta r/2) |g|^2 eps/(r^2+eps^2) d^3k, with r = eps tan(u)
    p, a, m = ff.p, ff.decay_a, ff.decay_m

    def f(u):
        r = eps * math.tan(u)
        return r ** (2 * p + 1) * (2.0 / beta) * xcoth(0.5 * beta * r) * math.exp(-2 * a * r ** m)

    val, _ = integrate.quad(f, 0.0, 0.5 * math.pi, epsabs=quad.abs_tol,
                            epsrel=quad.rel_tol, limit=400)
    return ff.angular_sq_integral * val / math.pi


def _extrapolate(eps, vals):
    # I(eps) = L + b eps log eps + c eps + d eps^2 + O(eps^3 log eps) for analytic h
    e = np.asarray(eps)
    mat = np.column_stack([np.ones(len(e)), e * np.log(e), e, e * e])
    return float(np.linalg.solve(mat, np.asarray(vals))[0])


def xi_zero(ff: FormFactor, beta: float, quad: QuadratureConfig | None = None,
            eps0: float = 1.0, halvings: int = 12, tol: float = 1e-6,
            return_residual: bool = False):
    """``xi(0)`` as the eps -> 0 limit of a Lorentzian-smeared integral.

    The integral is evaluated for ``eps_k = eps0 * 2**-k`` and the limit is
    taken by Richardson-type elimination of the ``eps log eps``, ``eps`` and
    ``eps**2`` terms.  Zero is returned at once when ``p > -1/2``.
    """
    quad = quad or QuadratureConfig()
    if not ff.infrared_singular or ff.angular_sq_integral == 0:
        return (0.0, 0.0) if return_residual else 0.0
    if halvings < 4:
        raise ValueError("need at least 4 halvings")
    eps = [eps0 * 2.0 ** -k for k in range(halvings + 1)]
    vals = [_xi_eps(ff, beta, e, quad) for e in eps]
    last = _extrapolate(eps[-4:], vals[-4:])
    prev = _extrapolate(eps[-5:-1], vals[-5:-1])
    residual = abs(last - prev)
    if residual > tol * max(abs(last), 1e-300):
        raise NoConvergence(f"xi(0) extrapolation residual {residual:.3g} too large")
    return (last, residual) if return_residual else last


def gamma_fn(ff: FormFactor, beta: float, t, quad: QuadratureConfig | None = None):
    """Decoherence function ``Gamma(t)``; accepts a scalar or an array of times."""
    quad = quad or QuadratureConfig()
    if np.ndim(t):
        return np.array([gamma_fn(ff, beta, float(x), quad) for x in np.ravel(t)]).reshape(np.shape(t))
    t = float(t)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0 or ff.angular_sq_integral == 0:
        return 0.0
    p, a, m = ff.p, ff.decay_a, ff.decay_m
    half_t = 0.5 * t

    def f(r):
        # r^(2p) coth(beta r/2) sin^2(r t/2), rewritten without 0/0 at r = 0
        x = half_t * r
        sinc = math.sin(x) / x if x > 1e-8 else 1.0 - x * x / 6.0
        return (r ** (2 * p + 1) * (2.0 / beta) * xcoth(0.5 * beta * r)
                * math.exp(-2 * a * r ** m) * half_t ** 2 * sinc * sinc)

    rm = r_max(ff, quad)
    val = ff.angular_sq_integral * _integrate_panels(f, _panel_edges(rm, t), quad)
    return max(val, 0.0)


def s_fn(ff: FormFactor, t, quad: QuadratureConfig | None = None):
    """Phase function ``S(t) = (1/2) int |g|^2 (|k| t - sin |k| t)/|k|^2 d^3k``."""
    quad = quad or QuadratureConfig()
    if np.ndim(t):
        return np.array([s_fn(ff, float(x), quad) for x in np.ravel(t)]).reshape(np.shape(t))
    t = float(t)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0 or ff.angular_sq_integral == 0:
        return 0.0
    p, a, m = ff.p, ff.decay_a, ff.decay_m

    def f(r):
        return 0.5 * r ** (2 * p + 1) * t * one_minus_sinc(r * t) * math.exp(-2 * a * r ** m)

    rm = r_max(ff, quad)
    val = ff.angular_sq_integral * _integrate_panels(f, _panel_edges(rm, t), quad)
    return max(val, 0.0)


@dataclass(frozen=True)
class BathFunctions:
    """Cached bath scalars plus evaluators for Gamma(t) and S(t).

    ``gamma_infinity`` is the slope of Gamma(t) at large t, taken from the
    near-origin behaviour of the integrand; it should agree with
    ``pi/2 * xi0`` up to quadrature error.
    """

    inner_1_over_k: float
    xi0: float
    gamma_infinity: float
    form_factor: FormFactor = field(default_factory=FormFactor)
    beta: float = 1.0
    quad_cfg: QuadratureConfig = field(default_factory=QuadratureConfig)
    xi0_residual: float = 0.0

    def gamma(self, t):
        return gamma_fn(self.form_factor, self.beta, t, self.quad_cfg)

    def s(self, t):
        return s_fn(self.form_factor, t, self.quad_cfg)


def bath_functions(ff: FormFactor, bath: BathParams | float,
                   quad: QuadratureConfig | None = None) -> BathFunctions:
    beta = bath.beta if isinstance(bath, BathParams) else float(bath)
    BathParams(beta)
    quad = quad or QuadratureConfig()
    if not ff.satisfies_uv_decay(beta):
        raise ValidationError(
            f"form factor violates the ultraviolet decay condition: need decay_a > beta/2 "
            f"for decay_m = 1 (decay_a={ff.decay_a}, beta={beta})")
    inner = inner_1_over_k(ff, quad)
    closed = inner_1_over_k_closed(ff)
    if abs(inner - closed) > 1e3 * quad.rel_tol * max(abs(closed), 1.0):
        raise NoConvergence(f"<g,|k|^-1 g> quadrature {inner} disagrees with closed form {closed}")
    xi0, res = xi_zero(ff, beta, quad, return_residual=True)
    g_inf = 0.25 * math.pi * ff.angular_sq_integral * _h_near_origin(ff, beta)
    return BathFunctions(inner_1_over_k=inner, xi0=xi0, gamma_infinity=g_inf,
                         form_factor=ff, beta=beta, quad_cfg=quad, xi0_residual=res)


def delta_table(spec, bf: BathFunctions) -> np.ndarray:
    """``D[a, b] = -(g_a^2 - g_b^2) <g,|k|^-1 g>/2 + i pi/2 (g_a - g_b)^2 xi0``."""
    g = spec.g_levels
    sq = g[:, None] ** 2 - g[None, :] ** 2
    diff2 = (g[:, None] - g[None, :]) ** 2
    return -0.5 * sq * bf.inner_1_over_k + 0.5j * math.pi * diff2 * bf.xi0
