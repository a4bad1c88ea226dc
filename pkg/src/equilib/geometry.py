"""Planar predicates on complex-valued polylines.

Polylines are 1-D complex arrays; a closed polyline repeats its first point
at the end.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import directed_hausdorff


def close(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=complex)
    if points.size and points[0] != points[-1]:
        points = np.append(points, points[0])
    return points


def signed_area(poly: np.ndarray) -> float:
    """Shoelace area; positive for counterclockwise loops."""
    p = close(poly)
    x, y = p.real, p.imag
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def winding_number(poly: np.ndarray, z) -> np.ndarray:
    """Winding number of the closed polyline around each point of ``z``.

    Crossing-count form: upward edges with the point strictly to their left
    count +1, downward edges with the point to their right count -1.
    """
    p = close(poly)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    a, b = p[:-1][None, :], p[1:][None, :]
    q = z[:, None]
    is_left = (b.real - a.real) * (q.imag - a.imag) - (q.real - a.real) * (b.imag - a.imag)
    up = (a.imag <= q.imag) & (b.imag > q.imag) & (is_left > 0)
    down = (a.imag > q.imag) & (b.imag <= q.imag) & (is_left < 0)
    return up.sum(axis=1) - down.sum(axis=1)


def distance_to_polyline(poly: np.ndarray, z) -> np.ndarray:
    """Euclidean distance from each point of ``z`` to the polyline's segments."""
    p = close(poly)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    a, seg = p[:-1], np.diff(p)
    out = np.empty(z.shape, dtype=float)
    chunk = max(1, 2_000_000 // max(len(a), 1))
    for i in range(0, len(z), chunk):
        q = z[i : i + chunk, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.real((q - a) * seg.conj()) / np.abs(seg) ** 2
        s = np.clip(np.nan_to_num(s), 0.0, 1.0)
        out[i : i + chunk] = np.min(np.abs(q - (a + s * seg)), axis=1)
    return out


def _cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u.real * v.imag - u.imag * v.real


def segment_crossings(poly: np.ndarray, chunk: int = 512) -> list[tuple[int, int]]:
    """All pairs (i, j), i < j, of non-adjacent segments of a closed polyline that intersect.

    Exhaustive O(m^2) test, vectorized in row blocks.
    """
    p = close(poly)
    a, b = p[:-1], p[1:]
    m = len(a)
    hits: list[tuple[int, int]] = []
    lo_x, hi_x = np.minimum(a.real, b.real), np.maximum(a.real, b.real)
    lo_y, hi_y = np.minimum(a.imag, b.imag), np.maximum(a.imag, b.imag)
    for i0 in range(0, m, chunk):
        i = np.arange(i0, min(i0 + chunk, m))[:, None]
        j = np.arange(m)[None, :]
        mask = (j > i + 1) & ~((i == 0) & (j == m - 1))
        mask &= (lo_x[i] <= hi_x[j]) & (lo_x[j] <= hi_x[i])
        mask &= (lo_y[i] <= hi_y[j]) & (lo_y[j] <= hi_y[i])
        ii, jj = np.nonzero(mask)
        if ii.size == 0:
            continue
        ii = ii + i0
        pa, pb, qa, qb = a[ii], b[ii], a[jj], b[jj]
        d1 = _cross(pb - pa, qa - pa)
        d2 = _cross(pb - pa, qb - pa)
        d3 = _cross(qb - qa, pa - qa)
        d4 = _cross(qb - qa, pb - qa)
        proper = (d1 * d2 <= 0) & (d3 * d4 <= 0)
        hits.extend(zip(ii[proper].tolist(), jj[proper].tolist()))
    return hits


def polylines_cross(p: np.ndarray, q: np.ndarray) -> bool:
    """True if any segment of closed polyline ``p`` meets any segment of ``q``."""
    p, q = close(p), close(q)
    pa, pb = p[:-1][:, None], p[1:][:, None]
    qa, qb = q[:-1][None, :], q[1:][None, :]
    d1 = _cross(pb - pa, qa - pa)
    d2 = _cross(pb - pa, qb - pa)
    d3 = _cross(qb - qa, pa - qa)
    d4 = _cross(qb - qa, pb - qa)
    return bool(np.any((d1 * d2 <= 0) & (d3 * d4 <= 0)))


def min_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Minimum vertex-to-vertex distance between two point sets."""
    tree = cKDTree(np.column_stack([q.real, q.imag]))
    dist, _ = tree.query(np.column_stack([p.real, p.imag]))
    return float(dist.min())


def hausdorff(p: np.ndarray, q: np.ndarray) -> float:
    pp = np.column_stack([p.real, p.imag])
    qq = np.column_stack([q.real, q.imag])
    return max(directed_hausdorff(pp, qq)[0], directed_hausdorff(qq, pp)[0])


def diameter(points: np.ndarray) -> float:
    from scipy.spatial import ConvexHull

    pts = np.column_stack([points.real, points.imag])
    hull = pts[ConvexHull(pts).vertices]
    diff = hull[:, None, :] - hull[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())
