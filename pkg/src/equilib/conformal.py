"""Exterior uniformizing maps of the reduced support K and the rotated support C.

Reduced maps (support of mu_Q):

    pre   f(u) = r u (1 - alpha/u)^{d/n}
    post  f(u) = r (u - 1/conj(alpha)) (1 - alpha/u)^{d/n - 1}

Rotated maps (support of mu_V), g(u)^d = f(u^d):

    pre   g(u) = r^{1/d} u (1 - alpha/u^d)^{1/n}
    post  g(u) = r^{1/d} u (1 - 1/(conj(alpha) u^d))^{1/d} (1 - alpha/u^d)^{1/n - 1/d},  |u| = 1

The disk (d = n) and ellipse (d = 2n) cases reuse the pre-critical form with
exponent d/n = 1 and 2.  A disk that does not contain the origin
(|alpha| > 1) is rotated through the post form with alpha -> 1/conj(alpha).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import SelfIntersection, UnsupportedEvaluation
from .params import MapParams, Regime

UNIT_CIRCLE_TOL = 1e-12


class MapKind(str, enum.Enum):
    REDUCED_PRE = "reduced-pre"
    REDUCED_POST = "reduced-post"
    ROTATED_PRE = "rotated-pre"
    ROTATED_POST = "rotated-post"
    DISK = "disk"
    ELLIPSE = "ellipse"


REDUCED_KINDS = (MapKind.REDUCED_PRE, MapKind.REDUCED_POST, MapKind.DISK, MapKind.ELLIPSE)
PRE_FORM_KINDS = (MapKind.REDUCED_PRE, MapKind.DISK, MapKind.ELLIPSE)


@dataclass(frozen=True)
class ConformalMap:
    params: MapParams
    kind: MapKind
    alpha: complex

    @property
    def r(self) -> float:
        return self.params.r

    @property
    def n(self) -> int:
        return self.params.spec.n

    @property
    def d(self) -> int:
        return self.params.spec.d

    @property
    def is_rotated(self) -> bool:
        return self.kind in (MapKind.ROTATED_PRE, MapKind.ROTATED_POST)

    @property
    def post_form(self) -> bool:
        """Whether the map carries the Blaschke zero at 1/conj(alpha)."""
        return self.kind in (MapKind.REDUCED_POST, MapKind.ROTATED_POST)


def reduced_map(params: MapParams) -> ConformalMap:
    regime = params.regime
    if regime is Regime.DISK:
        kind = MapKind.DISK
    elif regime is Regime.ELLIPSE:
        kind = MapKind.ELLIPSE
    elif regime is Regime.POST_CRITICAL:
        kind = MapKind.REDUCED_POST
        if not 0 < abs(params.alpha) < 1:
            raise ValueError(f"post-critical map needs 0 < |alpha| < 1, got {abs(params.alpha)!r}")
    else:
        kind = MapKind.REDUCED_PRE
        if abs(params.alpha) > 1 + 1e-12:
            raise ValueError(f"pre-critical map needs |alpha| <= 1, got {abs(params.alpha)!r}")
    return ConformalMap(params, kind, params.alpha)


def rotated_map(params: MapParams) -> ConformalMap:
    alpha = params.alpha
    if params.regime is Regime.POST_CRITICAL:
        return ConformalMap(params, MapKind.ROTATED_POST, alpha)
    if params.regime is Regime.DISK and abs(alpha) > 1:
        # r (u - alpha) == r (u - 1/conj(a)) with a = 1/conj(alpha) inside the unit disk
        return ConformalMap(params, MapKind.ROTATED_POST, 1 / alpha.conjugate())
    return ConformalMap(params, MapKind.ROTATED_PRE, alpha)


def _as_reduced(cmap: ConformalMap) -> ConformalMap:
    if not cmap.is_rotated:
        return cmap
    return reduced_map(cmap.params)


def _principal_power(base: np.ndarray, p: float) -> tuple[np.ndarray, np.ndarray]:
    zero = base == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.power(np.where(zero, 1.0, base), p)
    if p > 0:
        out = np.where(zero, 0.0, out)
    else:
        out = np.where(zero, np.inf, out)
    return out, zero


def eval_f(cmap: ConformalMap, u, return_flag: bool = False):
    """Evaluate the reduced exterior map f at ``u`` (|u| >= 1).

    At the branch point u = alpha of a critical map the limit value 0 is
    returned; ``return_flag=True`` also returns a boolean mask of such hits.
    """
    cmap = _as_reduced(cmap)
    u = np.asarray(u, dtype=complex)
    a, p = cmap.alpha, cmap.d / cmap.n
    base = 1 - a / u
    if cmap.post_form:
        power, hit = _principal_power(base, p - 1)
        value = cmap.r * (u - 1 / np.conj(a)) * power
    else:
        power, hit = _principal_power(base, p)
        value = cmap.r * u * power
    if return_flag:
        return value, hit
    return value


def eval_f_prime(cmap: ConformalMap, u):
    cmap = _as_reduced(cmap)
    u = np.asarray(u, dtype=complex)
    a, p, r = cmap.alpha, cmap.d / cmap.n, cmap.r
    base = 1 - a / u
    if cmap.post_form:
        q = p - 1
        beta = 1 / np.conj(a)
        return r * base ** (q - 1) * (base + q * (u - beta) * a / u**2)
    return r * base ** (p - 1) * (1 + (p - 1) * a / u)


def _tracked_power(base: np.ndarray, p: float) -> np.ndarray:
    """base**p along a path, continuing the argument from the principal value at the start."""
    flat = base.ravel()
    phase = np.unwrap(np.angle(flat))
    out = np.exp(p * (np.log(np.abs(flat)) + 1j * phase))
    return out.reshape(base.shape)


def eval_g_rotated(cmap: ConformalMap, u):
    """Evaluate the rotated map g with g(u)^d = f(u^d).

    Post-critically g is only a boundary parameterization: ``u`` must lie on
    the unit circle, and when ``u`` is an array the multivalued factor
    (1 - 1/(conj(alpha) u^d))^{1/d} is continued along the array order.
    """
    if not cmap.is_rotated:
        cmap = rotated_map(cmap.params)
    u = np.asarray(u, dtype=complex)
    n, d, r, a = cmap.n, cmap.d, cmap.r, cmap.alpha
    ud = u**d
    if cmap.kind is MapKind.ROTATED_PRE:
        power, _ = _principal_power(1 - a / ud, 1 / n)
        return r ** (1 / d) * u * power
    if np.any(np.abs(np.abs(u) - 1) > UNIT_CIRCLE_TOL):
        raise UnsupportedEvaluation("post-critical rotated map is defined on |u| = 1 only")
    blaschke = _tracked_power(1 - 1 / (np.conj(a) * ud), 1 / d)
    rest, _ = _principal_power(1 - a / ud, 1 / n - 1 / d)
    return r ** (1 / d) * u * blaschke * rest


@dataclass(frozen=True)
class BoundaryCurve:
    components: tuple
    samples_per_component: int
    regime: Regime
    kind: MapKind

    @property
    def n_components(self) -> int:
        return len(self.components)

    def all_points(self) -> np.ndarray:
        return np.concatenate([c[:-1] for c in self.components])


def unit_circle_samples(m: int) -> np.ndarray:
    """m points on |u| = 1, offset by half a step so that u = +-1 is never hit."""
    return np.exp(1j * (2 * np.pi * np.arange(m) / m + np.pi / m))


def _orient_ccw(poly: np.ndarray) -> np.ndarray:
    return poly if geometry.signed_area(poly) >= 0 else poly[::-1].copy()


def sample_boundary(cmap: ConformalMap, m: int, check: bool = True) -> BoundaryCurve:
    """Sample the support boundary as closed counterclockwise polylines.

    Post-critical rotated supports are returned as d components of ``m``
    points each, one per arc [2 pi k/d, 2 pi (k+1)/d) of the unit circle.
    """
    if m < 16:
        raise ValueError(f"need m >= 16 samples, got {m}")
    components = []
    if cmap.kind is MapKind.ROTATED_POST:
        d = cmap.d
        for k in range(d):
            theta = 2 * np.pi * (k + (np.arange(m + 1) + 0.5) / m) / d
            g = eval_g_rotated(cmap, np.exp(1j * theta))
            if abs(g[-1] - g[0]) > 1e-8 * np.abs(g).max():
                raise SelfIntersection(
                    f"branch tracking on arc {k} did not close (gap {abs(g[-1] - g[0]):.3e}); increase m"
                )
            components.append(_orient_ccw(geometry.close(g[:-1])))
    else:
        u = unit_circle_samples(m)
        z = eval_g_rotated(cmap, u) if cmap.is_rotated else eval_f(cmap, u)
        components.append(_orient_ccw(geometry.close(z)))
    curve = BoundaryCurve(tuple(components), m, cmap.params.regime, cmap.kind)
    if check:
        assert_simple(curve)
    return curve


def _bbox(poly: np.ndarray) -> tuple[float, float, float, float]:
    return poly.real.min(), poly.real.max(), poly.imag.min(), poly.imag.max()


def assert_simple(curve: BoundaryCurve) -> None:
    """Raise SelfIntersection if any component crosses itself or another component."""
    comps = curve.components
    for k, poly in enumerate(comps):
        hits = geometry.segment_crossings(poly)
        if hits:
            raise SelfIntersection(
                f"component {k} self-intersects at {len(hits)} segment pair(s), first {hits[0]}"
            )
    boxes = [_bbox(c) for c in comps]
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            a, b = boxes[i], boxes[j]
            if a[0] > b[1] or b[0] > a[1] or a[2] > b[3] or b[2] > a[3]:
                continue
            if geometry.polylines_cross(comps[i], comps[j]):
                raise SelfIntersection(f"components {i} and {j} intersect")


@dataclass(frozen=True)
class ExteriorGrid:
    """Polar grid in |u| > 1: log-spaced radii plus a thin layer next to the circle."""

    n_radii: int = 32
    n_phases: int = 128
    r_max: float = 8.0
    n_near: int = 16
    near_max: float = 1.01

    def radii(self) -> np.ndarray:
        far = np.exp(np.linspace(0.0, np.log(self.r_max), self.n_radii + 1)[1:])
        near = np.exp(np.linspace(0.0, np.log(self.near_max), self.n_near + 1)[1:])
        return np.concatenate([near, far])

    def points(self) -> np.ndarray:
        phases = np.exp(2j * np.pi * np.arange(self.n_phases) / self.n_phases)
        return (self.radii()[:, None] * phases[None, :]).ravel()

    def describe(self) -> str:
        return (
            f"{self.n_radii} log radii in (1, {self.r_max}] + {self.n_near} radii in "
            f"(1, {self.near_max}] x {self.n_phases} phases"
        )


@dataclass(frozen=True)
class StarlikeReport:
    min_real_part: float
    min_sufficient_margin: float
    n_points: int
    passed: bool


def check_starlike(cmap: ConformalMap, grid: ExteriorGrid | np.ndarray | None = None) -> StarlikeReport:
    """Starlikeness test Re(u f'/f) = Re(1 + (d/n) alpha/(u - alpha)) > 0 on a grid.

    ``min_sufficient_margin`` is min Re(alpha/(u - alpha)) + 1/2, which must be
    positive as well.
    """
    cmap = _as_reduced(cmap)
    if cmap.kind not in PRE_FORM_KINDS:
        raise ValueError(f"starlike test applies to pre-critical maps, not {cmap.kind.value}")
    if grid is None:
        grid = ExteriorGrid()
    u = grid.points() if isinstance(grid, ExteriorGrid) else np.asarray(grid, dtype=complex).ravel()
    a, p = cmap.alpha, cmap.d / cmap.n
    w = a / (u - a)
    re = np.real(1 + p * w)
    suff = np.real(w) + 0.5
    return StarlikeReport(float(re.min()), float(suff.min()), u.size,
                          bool(re.min() > 0 and suff.min() > 0))


@dataclass(frozen=True)
class InjectivityReport:
    modulus_monotone: bool
    min_abs_imag: float
    imag_sign_constant: bool
    crossings: int
    extreme_angles: tuple
    passed: bool


def check_boundary_injective(cmap: ConformalMap, m: int = 4096) -> InjectivityReport:
    """Injectivity of a post-critical map on |u| = 1.

    With alpha rotated onto the positive axis the boundary value is
    proportional to Phi(mu) = (1 - a e^{i mu})(1 - a e^{-i mu})^{d/n - 1}, a = |alpha|.
    |Phi| must be strictly monotone in cos(mu), Im Phi must keep one sign on
    (0, pi), and as a fallback the sampled curve f(e^{i theta}) is tested for
    segment crossings pair by pair.
    """
    cmap = _as_reduced(cmap)
    if cmap.kind is not MapKind.REDUCED_POST:
        raise ValueError(f"boundary injectivity test applies to post-critical maps, not {cmap.kind.value}")
    a, q = abs(cmap.alpha), cmap.d / cmap.n - 1
    mu = np.linspace(0.0, np.pi, m // 2 + 1)
    e = np.exp(1j * mu)
    phi = (1 - a * e) * (1 - a / e) ** q
    mod = np.abs(phi)
    monotone = bool(np.all(np.diff(mod) > 0) or np.all(np.diff(mod) < 0))
    im = np.imag(phi[1:-1])
    sign_constant = bool(np.all(im > 0) or np.all(im < 0))
    argmin, argmax = int(np.argmin(mod)), int(np.argmax(mod))
    z = eval_f(cmap, unit_circle_samples(m))
    crossings = len(geometry.segment_crossings(z))
    return InjectivityReport(
        modulus_monotone=monotone,
        min_abs_imag=float(np.abs(im).min()),
        imag_sign_constant=sign_constant,
        crossings=crossings,
        extreme_angles=(float(mu[argmin]), float(mu[argmax])),
        passed=monotone and sign_constant and crossings == 0,
    )
