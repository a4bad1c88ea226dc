"""Problem definition, regime classification and conformal-map parameters.

The external field is

    V(z) = (|z|^{2n} - t z^d - conj(t) conj(z)^d) / T

and everything here is computed for the reduced field
Q(w) = (d/T)(|w|^{2n/d} - t w - conj(t) conj(w)), whose support is the
image of the exterior of the unit disk under

    f(u) = r u (1 - alpha/u)^{d/n}                      (|t| <= t_cr)
    f(u) = r (u - 1/conj(alpha)) (1 - alpha/u)^{d/n-1}   (|t| >  t_cr)
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .errors import (
    DegenerateCase,
    InadmissibleT,
    InvalidDegrees,
    NonpositiveT,
    NoRootInBracket,
    NotPostCritical,
)

TAU_REG = 1e-10
TAU_ROOT = 1e-12
_EPS = 2.0**-52


class Regime(str, enum.Enum):
    PRE_CRITICAL = "pre-critical"
    CRITICAL = "critical"
    POST_CRITICAL = "post-critical"
    DISK = "disk-special"
    ELLIPSE = "ellipse-special"


class Branch(str, enum.Enum):
    PLUS = "plus"
    UNIQUE = "unique"
    EXPLICIT = "explicit"
    NA = "n/a"


@dataclass(frozen=True)
class ProblemSpec:
    n: int
    d: int
    T: float
    t: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "t", complex(self.t))
        object.__setattr__(self, "T", float(self.T))

    @property
    def abs_t(self) -> float:
        return abs(self.t)

    @property
    def ratio(self) -> float:
        """d/n, the exponent of the pre-critical map."""
        return self.d / self.n

    def with_t(self, t: complex) -> "ProblemSpec":
        return ProblemSpec(self.n, self.d, self.T, t)


@dataclass(frozen=True)
class MapParams:
    spec: ProblemSpec
    regime: Regime
    r: float
    alpha: complex
    t_cr: float
    residual: float
    branch: Branch

    @property
    def abs_alpha(self) -> float:
        return abs(self.alpha)


def validate(spec: ProblemSpec) -> None:
    """Raise a ``ValidationError`` subclass unless ``spec`` is admissible."""
    n, d = spec.n, spec.d
    if int(n) != n or int(d) != d or n < 1 or d < 1:
        raise InvalidDegrees(f"n and d must be positive integers (n={n}, d={d})")
    if d > 2 * n:
        raise InvalidDegrees(f"d must satisfy d <= 2n (n={n}, d={d})")
    if not spec.T > 0 or not math.isfinite(spec.T):
        raise NonpositiveT(f"T must be a positive finite number (T={spec.T})")
    if not cmath.isfinite(spec.t):
        raise InadmissibleT(f"t must be finite (t={spec.t})")
    if d == 2 * n and abs(spec.t) >= 0.5:
        raise InadmissibleT(f"|t| must be < 1/2 when d = 2n (|t|={abs(spec.t)})")


def critical_threshold(spec: ProblemSpec) -> float:
    n, d, T = spec.n, spec.d, spec.T
    if d == 2 * n:
        raise DegenerateCase("t_cr is undefined for d = 2n")
    return (n / d) * (T / (2 * n - d)) ** ((2 * n - d) / (2 * n))


def critical_radius(spec: ProblemSpec) -> float:
    n, d = spec.n, spec.d
    if d == 2 * n:
        raise DegenerateCase("r_cr is undefined for d = 2n")
    return (spec.T / (2 * n - d)) ** (d / (2 * n))


def unperturbed_radius(spec: ProblemSpec) -> float:
    """Conformal radius at t = 0, (T/n)^{d/2n}."""
    return (spec.T / spec.n) ** (spec.d / (2 * spec.n))


def _radius_terms(spec: ProblemSpec, r: float) -> tuple[float, float, float]:
    n, d = spec.n, spec.d
    a = r ** (4 * n / d - 2)
    b = spec.T / n * r ** (2 * n / d - 2)
    c = (n - d) / n * (d / n) ** 2 * spec.abs_t**2
    return a, b, c


def radius_equation(spec: ProblemSpec, r: float) -> float:
    """y(r) = r^{4n/d-2} - (T/n) r^{2n/d-2} + ((n-d)/n)(d/n)^2 |t|^2."""
    a, b, c = _radius_terms(spec, r)
    return a - b + c


def _radius_equation_prime(spec: ProblemSpec, r: float) -> float:
    n, d = spec.n, spec.d
    return (4 * n / d - 2) * r ** (4 * n / d - 3) - spec.T / n * (2 * n / d - 2) * r ** (
        2 * n / d - 3
    )


def scaled_residual(spec: ProblemSpec, r: float) -> float:
    """|y(r)| divided by the largest term magnitude, so tolerances are scale-free."""
    a, b, c = _radius_terms(spec, r)
    scale = max(abs(a), abs(b), abs(c))
    return abs(a - b + c) / scale if scale > 0 else 0.0


def _safeguarded_newton(func, dfunc, lo: float, hi: float, maxiter: int = 200) -> float:
    """Newton iteration that falls back to bisection whenever it leaves [lo, hi]."""
    flo, fhi = func(lo), func(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoRootInBracket(
            f"no sign change on [{lo!r}, {hi!r}]: y(lo)={flo!r}, y(hi)={fhi!r}"
        )
    if flo > 0:
        lo, hi = hi, lo
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = func(x)
        if fx == 0.0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        dfx = dfunc(x)
        step_ok = False
        if dfx != 0.0:
            xn = x - fx / dfx
            step_ok = min(lo, hi) < xn < max(lo, hi)
        if not step_ok:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 2 * math.ulp(x) or abs(hi - lo) <= 4 * math.ulp(max(abs(lo), abs(hi))):
            return xn
        x = xn
    return x


def solve_conformal_radius_pre(spec: ProblemSpec) -> float:
    """Root of y(r) = 0 compatible with |alpha| <= 1, for d != n, 2n.

    For d < n this is the larger root r_+, bracketed by the minimum of the
    t-independent part of y and (T/n)^{d/2n}; for n < d < 2n the unique root
    lies between (T/n)^{d/2n} and r_cr.
    """
    n, d, T = spec.n, spec.d, spec.T
    if d in (n, 2 * n):
        raise DegenerateCase(f"radius equation is degenerate for d = {d}, n = {n}")
    r0 = unperturbed_radius(spec)
    if spec.abs_t == 0.0:
        return r0
    if d < n:
        lo = (T / n * (n - d) / (2 * n - d)) ** (d / (2 * n))
        hi = r0
    else:
        lo = r0
        hi = critical_radius(spec) * (1 + 1e-9)
    # for tiny |t| the root sits within rounding of an endpoint and the sign test is noise
    # (powers with exponent k amplify the rounding of r by k)
    noise = 8 * _EPS * max(1.0, 4 * n / d)
    for end in (lo, hi):
        if scaled_residual(spec, end) <= noise:
            return end
    return _safeguarded_newton(
        lambda r: radius_equation(spec, r),
        lambda r: _radius_equation_prime(spec, r),
        lo,
        hi,
    )


def alpha_from_r_pre(spec: ProblemSpec, r: float) -> complex:
    n, d = spec.n, spec.d
    return -(d / n) * spec.t.conjugate() * r ** (-(2 * n - d) / d)


def post_params(spec: ProblemSpec) -> tuple[float, complex]:
    n, d, T = spec.n, spec.d, spec.T
    if d in (n, 2 * n):
        raise DegenerateCase(f"post-critical formulas are undefined for d = {d}, n = {n}")
    t_cr = critical_threshold(spec)
    # the closed forms stay valid on the critical band, where they meet the pre-critical map
    if not spec.abs_t >= t_cr * (1 - TAU_REG):
        raise NotPostCritical(f"|t| = {spec.abs_t!r} is below t_cr = {t_cr!r}")
    s = (d / n) * spec.abs_t
    base = math.sqrt(T / (2 * n - d))
    r = base * s ** ((d - n) / (2 * n - d))
    phase = -spec.t.conjugate() / spec.abs_t
    alpha = phase * base * s ** (-n / (2 * n - d))
    return r, alpha


def classify(spec: ProblemSpec, t_cr: float, tol: float = TAU_REG) -> Regime:
    gap = spec.abs_t - t_cr
    if abs(gap) <= tol * t_cr:
        return Regime.CRITICAL
    return Regime.PRE_CRITICAL if gap < 0 else Regime.POST_CRITICAL


def solve(spec: ProblemSpec) -> MapParams:
    """Classify the regime and compute (r, alpha) for ``spec``."""
    validate(spec)
    n, d, T, t = spec.n, spec.d, spec.T, spec.t

    if d == n:
        r = math.sqrt(T / n)
        return MapParams(spec, Regime.DISK, r, -t.conjugate() / r, r,
                         scaled_residual(spec, r), Branch.EXPLICIT)
    if d == 2 * n:
        # the squared-variable ellipse map r u (1 + 2 conj(t)/u)^2
        r = T / (n * (1 - 4 * spec.abs_t**2))
        return MapParams(spec, Regime.ELLIPSE, r, -2 * t.conjugate(), 0.5,
                         scaled_residual(spec, r), Branch.EXPLICIT)

    t_cr = critical_threshold(spec)
    regime = classify(spec, t_cr)
    if regime is Regime.CRITICAL:
        r = critical_radius(spec)
        return MapParams(spec, regime, r, -t.conjugate() / spec.abs_t, t_cr,
                         scaled_residual(spec, r), Branch.EXPLICIT)
    if regime is Regime.POST_CRITICAL:
        r, alpha = post_params(spec)
        return MapParams(spec, regime, r, alpha, t_cr, 0.0, Branch.EXPLICIT)

    r = solve_conformal_radius_pre(spec)
    branch = Branch.PLUS if d < n else Branch.UNIQUE
    return MapParams(spec, regime, r, alpha_from_r_pre(spec, r), t_cr,
                     scaled_residual(spec, r), branch)


def mass_pre(spec: ProblemSpec, r: float, alpha: complex) -> float:
    """Closed-form total mass (r^{2n/d}/T)(n + (n-d)|alpha|^2) of the pre-critical map."""
    n, d = spec.n, spec.d
    return r ** (2 * n / d) / spec.T * (n + (n - d) * abs(alpha) ** 2)


def mass_post(spec: ProblemSpec, r: float, alpha: complex) -> float:
    """Closed-form total mass of the post-critical map with the Blaschke zero at 1/conj(alpha)."""
    n, d = spec.n, spec.d
    return n / spec.T * r ** (2 * n / d) * (2 * n - d) / n * abs(alpha) ** (2 - 2 * n / d)


def deformation_post(spec: ProblemSpec, r: float, alpha: complex) -> complex:
    """The value of t reproduced by (r, alpha) through the post-critical deformation condition."""
    n, d = spec.n, spec.d
    return -(n / d) * r ** (2 * n / d - 1) * abs(alpha) ** (-2 * n / d) * alpha.conjugate()


def closed_form_mass(params: MapParams) -> float:
    if params.regime is Regime.POST_CRITICAL:
        return mass_post(params.spec, params.r, params.alpha)
    return mass_pre(params.spec, params.r, params.alpha)
