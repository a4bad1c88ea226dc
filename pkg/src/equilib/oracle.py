"""Independent numerical checks: discrete Coulomb gas, atomic measures, root scans.

Nothing here reuses the closed-form machinery of ``params``/``conformal``;
the gas sees only the external field V and the scan only the radius
equation written out afresh.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from . import geometry
from .conformal import BoundaryCurve
from .errors import AtomHit
from .params import ProblemSpec, validate

log = logging.getLogger(__name__)

MIN_SEPARATION = 1e-12


# -- Coulomb gas ------------------------------------------------------------


@dataclass(frozen=True)
class ParticleEnsemble:
    positions: np.ndarray
    energy: float
    grad_norm: float
    spec: ProblemSpec
    converged: bool
    iterations: int
    energy_trace: tuple

    @property
    def N(self) -> int:
        return len(self.positions)


def external_field(spec: ProblemSpec, z):
    """V(z) = (|z|^{2n} - 2 Re(t z^d)) / T."""
    z = np.asarray(z, dtype=complex)
    return (np.abs(z) ** (2 * spec.n) - 2 * np.real(spec.t * z**spec.d)) / spec.T


def gas_energy(spec: ProblemSpec, z: np.ndarray) -> float:
    N = len(z)
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, 1.0)
    pair = -np.log(np.abs(diff)).sum()
    return float(pair / N**2 + external_field(spec, z).sum() / N)


def _power_increment(base, delta, k: int):
    """(base + delta)^k - base^k by the binomial expansion, accurate for small delta."""
    out = np.zeros_like(base + delta)
    for j in range(1, k + 1):
        out = out + math.comb(k, j) * base ** (k - j) * delta**j
    return out


def gas_energy_delta(spec: ProblemSpec, z: np.ndarray, dz: np.ndarray) -> float:
    """E(z + dz) - E(z) evaluated without cancellation between the two energies."""
    N = len(z)
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, 1.0)
    w = (dz[:, None] - dz[None, :]) / diff
    # log|1 + w| = log1p(2 Re w + |w|^2) / 2
    pair = -0.5 * np.log1p(2 * w.real + np.abs(w) ** 2).sum()
    sq = np.abs(z) ** 2
    dsq = 2 * np.real(np.conj(z) * dz) + np.abs(dz) ** 2
    radial = _power_increment(sq, dsq, spec.n)
    linear = 2 * np.real(spec.t * _power_increment(z, dz, spec.d))
    return float(pair / N**2 + (radial - linear).sum() / (spec.T * N))


def gas_gradient(spec: ProblemSpec, z: np.ndarray) -> np.ndarray:
    """Real gradient packed as complex: dE/dx + i dE/dy = 2 dE/dconj(z)."""
    N = len(z)
    n, d, T, t = spec.n, spec.d, spec.T, spec.t
    diff = np.conj(z[:, None] - z[None, :])
    np.fill_diagonal(diff, np.inf)
    pair = -(1.0 / diff).sum(axis=1) / N**2
    field = (n * np.abs(z) ** (2 * n - 2) * z - d * np.conj(t) * np.conj(z) ** (d - 1)) / (T * N)
    return 2.0 * (pair + field)


def _min_separation(z: np.ndarray) -> float:
    diff = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(diff, np.inf)
    return float(diff.min())


def initial_positions(spec: ProblemSpec, N: int, seed: int) -> np.ndarray:
    """Uniform sample of the disk of radius 2 (T/n)^{1/2n}."""
    rng = np.random.default_rng(seed)
    radius = 2.0 * (spec.T / spec.n) ** (1 / (2 * spec.n))
    rho = radius * np.sqrt(rng.random(N))
    theta = 2 * np.pi * rng.random(N)
    return rho * np.exp(1j * theta)


def minimize_gas(
    spec: ProblemSpec,
    N: int,
    seed: int = 0,
    max_iter: int = 50_000,
    gtol: float | None = None,
    history: int = 10,
) -> ParticleEnsemble:
    """Minimize the discrete energy of N charges in the field V.

    Descent directions come from limited-memory BFGS; every step passes an
    Armijo backtracking search on the directly evaluated energy increment,
    so accepted energies strictly decrease and the search keeps working when
    the decrease is far below the rounding level of the energy itself.
    Terminates once |grad E| <= 1e-8 / sqrt(N) or after ``max_iter`` steps.
    """
    validate(spec)
    if not 16 <= N <= 4096:
        raise ValueError(f"N must lie in [16, 4096], got {N}")
    gtol = 1e-8 / math.sqrt(N) if gtol is None else gtol

    z = initial_positions(spec, N, seed)
    energy = gas_energy(spec, z)
    grad = gas_gradient(spec, z)
    trace = [energy]
    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []

    def as_real(v):
        return np.concatenate([v.real, v.imag])

    it = 0
    converged = False
    while it < max_iter:
        g = as_real(grad)
        gnorm = float(np.linalg.norm(g))
        if gnorm <= gtol:
            converged = True
            break
        # two-loop recursion
        q = g.copy()
        coeffs = []
        for s, y in zip(reversed(s_hist), reversed(y_hist)):
            rho = 1.0 / (y @ s)
            a = rho * (s @ q)
            coeffs.append((rho, a))
            q -= a * y
        if s_hist:
            q *= (s_hist[-1] @ y_hist[-1]) / (y_hist[-1] @ y_hist[-1])
        else:
            q *= 1e-2 / max(gnorm, 1e-300)
        for (s, y), (rho, a) in zip(zip(s_hist, y_hist), reversed(coeffs)):
            b = rho * (y @ q)
            q += (a - b) * s
        direction = -q
        slope = float(g @ direction)
        if slope >= 0:
            s_hist.clear()
            y_hist.clear()
            direction = -g * (1e-2 / gnorm)
            slope = float(g @ direction)

        step = 1.0
        accepted = False
        while step > 1e-20:
            dz = step * (direction[:N] + 1j * direction[N:])
            trial = z + dz
            if _min_separation(trial) > MIN_SEPARATION:
                delta = gas_energy_delta(spec, z, dz)
                if delta <= 1e-4 * step * slope:
                    e_trial = energy + delta
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            if s_hist:
                s_hist.clear()
                y_hist.clear()
                continue
            break

        new_grad = gas_gradient(spec, trial)
        s_vec = as_real(dz)
        y_vec = as_real(new_grad - grad)
        if y_vec @ s_vec > 1e-16 * (s_vec @ s_vec):
            s_hist.append(s_vec)
            y_hist.append(y_vec)
            if len(s_hist) > history:
                s_hist.pop(0)
                y_hist.pop(0)
        z, energy, grad = trial, e_trial, new_grad
        trace.append(energy)
        it += 1

    gnorm = float(np.linalg.norm(as_real(grad)))
    converged = converged or gnorm <= gtol
    energy = gas_energy(spec, z)
    if not converged:
        log.warning("gas minimization stopped at |grad| = %.3e after %d steps", gnorm, it)
    return ParticleEnsemble(z, energy, gnorm, spec, converged, it, tuple(trace))


# -- comparison with the predicted support -----------------------------------


def distance_to_support(boundary: BoundaryCurve, z) -> np.ndarray:
    """Zero inside any component, else distance to the nearest boundary polyline."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    inside = np.zeros(z.shape, dtype=bool)
    dist = np.full(z.shape, np.inf)
    for comp in boundary.components:
        inside |= geometry.winding_number(comp, z) != 0
        dist = np.minimum(dist, geometry.distance_to_polyline(comp, z))
    return np.where(inside, 0.0, dist)


def support_coverage(ensemble: ParticleEnsemble, boundary: BoundaryCurve, eps: float) -> float:
    """Fraction of particles within eps * diam(support) of the predicted support."""
    if boundary.samples_per_component < 1024:
        raise ValueError("coverage needs a boundary sampled at m >= 1024")
    diam = geometry.diameter(boundary.all_points())
    dist = distance_to_support(boundary, ensemble.positions)
    return float(np.mean(dist <= eps * diam))


def component_gap(boundary: BoundaryCurve) -> float:
    """Smallest distance between two distinct boundary components (inf for one)."""
    comps = boundary.components
    gap = math.inf
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            gap = min(gap, geometry.min_distance(comps[i], comps[j]))
    return gap


def count_clusters(points: np.ndarray, cutoff: float) -> int:
    """Number of single-linkage clusters with merge distance below ``cutoff``."""
    pts = np.column_stack([points.real, points.imag])
    if len(pts) < 2:
        return len(pts)
    labels = fcluster(linkage(pts, method="single"), t=cutoff, criterion="distance")
    return int(labels.max())


# -- atomic measures ----------------------------------------------------------


@dataclass(frozen=True)
class AtomicMeasure:
    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=complex).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if pos.shape != w.shape:
            raise ValueError("positions and weights differ in length")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if not math.isclose(w.sum(), 1.0, rel_tol=0, abs_tol=1e-12):
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)

    @classmethod
    def random(cls, rng: np.random.Generator, size: int, scale: float = 1.0) -> "AtomicMeasure":
        pos = scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
        w = rng.random(size) + 0.1
        return cls(pos, w / w.sum())


def rotated_measure(mu: AtomicMeasure, d: int) -> AtomicMeasure:
    """Spread each atom w over its d d-th roots with weight / d each."""
    if d < 1:
        raise ValueError("d must be a positive integer")
    w = mu.positions
    arg = np.mod(np.angle(w), 2 * np.pi)
    k = np.arange(d)
    roots = np.abs(w)[:, None] ** (1 / d) * np.exp(1j * (arg[:, None] + 2 * np.pi * k) / d)
    weights = np.repeat(mu.weights / d, d)
    return AtomicMeasure(roots.ravel(), weights)


def log_potential_atomic(mu: AtomicMeasure, z: complex) -> float:
    dist = np.abs(z - mu.positions)
    if np.any(dist == 0):
        raise AtomHit(f"z = {z!r} coincides with an atom")
    return float(np.sum(mu.weights * -np.log(dist)))


def cauchy_transform_atomic(mu: AtomicMeasure, z: complex) -> complex:
    diff = mu.positions - z
    if np.any(diff == 0):
        raise AtomHit(f"z = {z!r} coincides with an atom")
    return complex(np.sum(mu.weights / diff))


# -- brute-force radius scan --------------------------------------------------


def _radius_poly(n: int, d: int, T: float, abs_t: float, r):
    return r ** (4 * n / d - 2) - (T / n) * r ** (2 * n / d - 2) + (n - d) * d**2 * abs_t**2 / n**3


def scan_radius_roots(spec: ProblemSpec, grid_size: int = 100_000) -> list[tuple[float, float]]:
    """All positive roots of the radius equation with the |alpha| each one implies.

    Dense sign-change scan on a uniform grid over (0, 2 max(R0, r_cr)] merged
    with a geometric grid reaching down to 1e-14 R0, where R0 = (T/n)^{d/2n};
    each bracket is polished by bisection.
    """
    n, d, T, abs_t = spec.n, spec.d, spec.T, abs(spec.t)
    if d in (n, 2 * n):
        raise ValueError("radius scan needs d != n and d != 2n")
    grid_size = max(int(grid_size), 100_000)
    r0 = (T / n) ** (d / (2 * n))
    r_cr = (T / (2 * n - d)) ** (d / (2 * n))
    top = 2 * max(r0, r_cr)
    grid = np.union1d(
        np.linspace(top / grid_size, top, grid_size),
        np.geomspace(1e-14 * r0, top, grid_size),
    )
    y = _radius_poly(n, d, T, abs_t, grid)
    roots = []
    exact = np.nonzero(y == 0)[0]
    roots.extend(grid[exact].tolist())
    flips = np.nonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)[0]
    for i in flips:
        lo, hi = grid[i], grid[i + 1]
        ylo = y[i]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            ym = _radius_poly(n, d, T, abs_t, mid)
            if (ym > 0) == (ylo > 0):
                lo, ylo = mid, ym
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    roots.sort()
    return [(r, (d / n) * abs_t * r ** (1 - 2 * n / d)) for r in roots]
