"""Densities, Cauchy-transform data and certification of the variational conditions.

All quantities refer to the reduced field Q with W(x) = (d/T) x^{n/d} and
P(z) = (d/T) t z.  Writing c for n r^{2n/d}/T (times |alpha|^{-2n/d}
post-critically), the exterior Cauchy transform at z = f(u) is

    pre   phi_-(f(u)) = -c conj(a)/r - c (1 - conj(a) u) (1 - a/u)^{1 - d/n} / (r u)
    post  phi_-(f(u)) = -c conj(a)/r + c conj(a) (1 - a/u)^{2 - d/n} / r

and d_z E = W'(|z|^2) conj(z) - P'(z) + phi_-(z) vanishes on the boundary.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .conformal import (
    ConformalMap,
    ExteriorGrid,
    eval_f,
    eval_f_prime,
    reduced_map,
    unit_circle_samples,
)
from .errors import QuadratureNonConvergent
from .params import MapParams

TAU_MASS = 1e-10
TAU_VAR = 1e-9
TAU_INT = 1e-10


@dataclass(frozen=True)
class FieldContext:
    params: MapParams
    map: ConformalMap
    c: float

    @classmethod
    def from_params(cls, params: MapParams) -> "FieldContext":
        cmap = reduced_map(params)
        n, d, T = params.spec.n, params.spec.d, params.spec.T
        c = n * params.r ** (2 * n / d) / T
        if cmap.post_form:
            c *= abs(cmap.alpha) ** (-2 * n / d)
        return cls(params, cmap, c)

    @property
    def post(self) -> bool:
        return self.map.post_form

    @property
    def phi_plus(self) -> complex:
        """The constant interior part phi_+ implied by (r, alpha)."""
        return -self.c * np.conj(self.map.alpha) / self.params.r


def density_Q(ctx: FieldContext, z):
    n, d, T = ctx.params.spec.n, ctx.params.spec.d, ctx.params.spec.T
    return n**2 / (math.pi * T * d) * np.abs(z) ** (2 * n / d - 2)


def density_V(ctx: FieldContext, z):
    n, T = ctx.params.spec.n, ctx.params.spec.T
    return n**2 / (math.pi * T) * np.abs(z) ** (2 * n - 2)


def _mass_trapezoid(ctx: FieldContext, m: int) -> float:
    n, d, T = ctx.params.spec.n, ctx.params.spec.d, ctx.params.spec.T
    u = unit_circle_samples(m)
    f = eval_f(ctx.map, u)
    fp = eval_f_prime(ctx.map, u)
    # (1/2 pi i) \oint |f|^{2n/d} f'/f du  with du = i u dtheta
    integrand = np.abs(f) ** (2 * n / d) * u * fp / f
    return float(n / T * np.mean(integrand).real)


def mass_contour_integral(ctx: FieldContext, m: int = 4096, tol: float = TAU_MASS) -> float:
    """Total mass of the measure as a contour integral over |u| = 1.

    Trapezoidal rule at ``m`` nodes; raises QuadratureNonConvergent when the
    result at 2m nodes differs by more than ``tol``.
    """
    if m < 64:
        raise ValueError(f"need m >= 64 nodes, got {m}")
    coarse = _mass_trapezoid(ctx, m)
    fine = _mass_trapezoid(ctx, 2 * m)
    if abs(fine - coarse) > tol:
        raise QuadratureNonConvergent(
            f"mass changed by {abs(fine - coarse):.3e} from m={m} to m={2 * m}"
        )
    return coarse


def phi_minus(ctx: FieldContext, u):
    """Exterior Cauchy transform phi_-(f(u)) in closed form."""
    u = np.asarray(u, dtype=complex)
    a, r, c = ctx.map.alpha, ctx.params.r, ctx.c
    p = ctx.params.spec.d / ctx.params.spec.n
    base = 1 - a / u
    if ctx.post:
        return -c * np.conj(a) / r + c * np.conj(a) * base ** (2 - p) / r
    return -c * np.conj(a) / r - c * (1 - np.conj(a) * u) * base ** (1 - p) / (r * u)


def grad_effective_potential(ctx: FieldContext, u):
    """d_z E at z = f(u) for |u| >= 1."""
    spec = ctx.params.spec
    n, d, T = spec.n, spec.d, spec.T
    u = np.asarray(u, dtype=complex)
    z = eval_f(ctx.map, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = n / T * np.abs(z) ** (2 * n / d - 2) * np.conj(z)
    w = np.where(z == 0, 0.0, w)
    return w - d / T * spec.t + phi_minus(ctx, u)


def grad_bracket_form(ctx: FieldContext, u):
    """The factored gradient c (1 - a/u)/f(u) [ ... ], exact when (r, alpha) solve the problem."""
    n, d = ctx.params.spec.n, ctx.params.spec.d
    u = np.asarray(u, dtype=complex)
    a = ctx.map.alpha
    s = 2 * n / d
    au = np.abs(u)
    lead = au**s * (1 - np.conj(a) / np.conj(u))
    if ctx.post:
        lead = lead * np.abs((1 - np.conj(a) * u) / (u - a)) ** s
    return ctx.c * (1 - a / u) / eval_f(ctx.map, u) * (lead - (1 - np.conj(a) * u))


def gradient_gap(ctx: FieldContext, u):
    """Strict-inequality gap that rules out exterior critical points.

    pre:  |u|^{2n/d-1} - |(1 - conj(a) u)/(u - a)|
    post: | |u (1 - conj(a) u)/(u - a)| - 1 |
    disk: |u|^2 - 1, the bracket itself
    """
    n, d = ctx.params.spec.n, ctx.params.spec.d
    u = np.asarray(u, dtype=complex)
    a = ctx.map.alpha
    if n == d:
        return np.abs(u) ** 2 - 1
    mobius = np.abs((1 - np.conj(a) * u) / (u - a))
    if ctx.post:
        return np.abs(np.abs(u) * mobius - 1)
    return np.abs(u) ** (2 * n / d - 1) - mobius


def _ray_integrand(ctx: FieldContext, u0: complex):
    def integrand(sigma: float) -> float:
        u = sigma * u0
        return 2.0 * float(np.real(grad_effective_potential(ctx, u) * eval_f_prime(ctx.map, u) * u0))

    return integrand


def effective_potential_increment(ctx: FieldContext, u0: complex, s, s_max: float = 8.0):
    """E(f(s u0)) - F by integrating 2 Re(d_z E dz) along sigma -> f(sigma u0), sigma in [1, s].

    ``s`` may be a sorted sequence; the integral is then accumulated piecewise
    and an array is returned.
    """
    scalar = np.ndim(s) == 0
    svals = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(svals < 1) or np.any(svals > s_max) or np.any(np.diff(svals) < 0):
        raise ValueError(f"s must be sorted values in [1, {s_max}]")
    integrand = _ray_integrand(ctx, complex(u0))
    out = np.empty_like(svals)
    total, left = 0.0, 1.0
    for i, right in enumerate(svals):
        if right > left:
            val, _ = quad(integrand, left, right, epsabs=TAU_INT, epsrel=TAU_INT, limit=200)
            total += val
        out[i] = total
        left = right
    return float(out[0]) if scalar else out


def effective_potential_path(ctx: FieldContext, path_u: np.ndarray) -> float:
    """E difference along a polyline in the u-plane (Gauss-Legendre per segment)."""
    x, wts = np.polynomial.legendre.leggauss(40)
    total = 0.0
    for a, b in zip(path_u[:-1], path_u[1:]):
        u = 0.5 * (a + b) + 0.5 * (b - a) * x
        du = 0.5 * (b - a)
        vals = grad_effective_potential(ctx, u) * eval_f_prime(ctx.map, u) * du
        total += 2.0 * float(np.sum(wts * np.real(vals)))
    return total


@dataclass(frozen=True)
class VerifyGrid:
    exterior: ExteriorGrid = field(default_factory=ExteriorGrid)
    n_rays: int = 64
    s_values: tuple = (1.01, 1.1, 2.0, 4.0, 8.0)
    mass_nodes: int = 4096

    def describe(self) -> str:
        return (
            f"gap grid: {self.exterior.describe()}; rays: {self.n_rays} x s in "
            f"{list(self.s_values)}; mass nodes: {self.mass_nodes}"
        )


@dataclass(frozen=True)
class VerificationReport:
    mass: float
    mass_error: float
    min_inequality_margin: float
    min_gradient_margin: float
    max_boundary_gradient: float
    grid_spec: str
    passed: bool

    def as_dict(self) -> dict:
        return {
            "mass": self.mass,
            "mass_error": self.mass_error,
            "min_inequality_margin": self.min_inequality_margin,
            "min_gradient_margin": self.min_gradient_margin,
            "max_boundary_gradient": self.max_boundary_gradient,
            "grid_spec": self.grid_spec,
            "pass": self.passed,
        }


def ray_increments(ctx: FieldContext, n_rays: int, s_values, workers: int = 1) -> np.ndarray:
    """Matrix of E increments, one row per ray direction."""
    phases = np.exp(2j * np.pi * (np.arange(n_rays) + 0.5) / n_rays)
    job = lambda u0: effective_potential_increment(ctx, u0, s_values)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, phases))
    else:
        rows = [job(u0) for u0 in phases]
    return np.array(rows)


def verify(ctx: FieldContext, grid: VerifyGrid | None = None, workers: int = 1) -> VerificationReport:
    """Mass check, no-critical-point gap on an exterior grid and ray-wise E >= F."""
    grid = grid or VerifyGrid()
    try:
        mass = mass_contour_integral(ctx, grid.mass_nodes, tol=math.inf)
    except (FloatingPointError, ZeroDivisionError):
        mass = math.nan
    mass_error = abs(mass - 1)
    gap = float(np.min(gradient_gap(ctx, grid.exterior.points())))
    increments = ray_increments(ctx, grid.n_rays, grid.s_values, workers)
    min_inc = float(np.min(increments))
    boundary = np.max(np.abs(grad_effective_potential(ctx, unit_circle_samples(1024))))
    passed = bool(mass_error <= TAU_MASS and min_inc >= -TAU_VAR and gap > 0)
    return VerificationReport(mass, mass_error, min_inc, gap, float(boundary), grid.describe(), passed)
