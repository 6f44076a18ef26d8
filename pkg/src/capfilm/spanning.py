"""Projection-based spanning gate.

A surface that spans the wire must project onto the whole flat footprint:
every vertical line through the bounded planar component has to meet the
surface.  This is the necessary condition used as a validity gate on solver
output; it is checked on a quasi-random sample of the footprint with
vertical-line/triangle incidence tests.
"""

from __future__ import annotations

import numpy as np

from ._accel import njit, pick
from .errors import DomainError
from .geometry import PlanarDomain
from .meshing import TriSurface

__all__ = ["spanning_check", "quasi_random_in_domain"]

# 2D generalization of the golden ratio (plastic constant); gives the R2
# low-discrepancy sequence
_PLASTIC = 1.3247179572447460
_ALPHA = np.array([1.0 / _PLASTIC, 1.0 / _PLASTIC**2])


def quasi_random_points(n: int, lo, hi) -> np.ndarray:
    """Deterministic R2 low-discrepancy points in the box [lo, hi]."""
    idx = np.arange(1, n + 1)[:, None]
    u = np.mod(0.5 + idx * _ALPHA[None, :], 1.0)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return lo + u * (hi - lo)


def quasi_random_in_domain(domain: PlanarDomain, n: int) -> np.ndarray:
    """First n quasi-random points of the R2 sequence that fall inside."""
    lo = domain.polyline.min(axis=0)
    hi = domain.polyline.max(axis=0)
    out = []
    offset = 0
    batch = max(4 * n, 1024)
    while len(out) < n:
        idx = np.arange(offset + 1, offset + batch + 1)[:, None]
        pts = lo + np.mod(0.5 + idx * _ALPHA[None, :], 1.0) * (hi - lo)
        inside = domain.contains(pts)
        out.extend(pts[inside].tolist())
        offset += batch
        if offset > 10000 * max(n, 1):
            raise DomainError("could not place sample points inside the domain")
    return np.array(out[:n])


def _cover_py(px, py, tx0, ty0, tx1, ty1, tx2, ty2, covered):
    npts = px.shape[0]
    ntri = tx0.shape[0]
    for i in range(npts):
        x = px[i]
        y = py[i]
        hit = False
        for t in range(ntri):
            d = (tx1[t] - tx0[t]) * (ty2[t] - ty0[t]) - (tx2[t] - tx0[t]) * (
                ty1[t] - ty0[t]
            )
            if d == 0.0:
                continue
            w1 = ((tx1[t] - x) * (ty2[t] - y) - (tx2[t] - x) * (ty1[t] - y)) / d
            w2 = ((tx2[t] - x) * (ty0[t] - y) - (tx0[t] - x) * (ty2[t] - y)) / d
            w3 = 1.0 - w1 - w2
            eps = -1e-12
            if w1 >= eps and w2 >= eps and w3 >= eps:
                hit = True
                break
        covered[i] = hit


_cover_numba = njit(cache=True)(_cover_py)


def _cover_numpy(px, py, tx0, ty0, tx1, ty1, tx2, ty2, covered):
    d = (tx1 - tx0) * (ty2 - ty0) - (tx2 - tx0) * (ty1 - ty0)
    good = d != 0.0
    chunk = 512
    for i0 in range(0, px.shape[0], chunk):
        x = px[i0 : i0 + chunk, None]
        y = py[i0 : i0 + chunk, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            w1 = ((tx1 - x) * (ty2 - y) - (tx2 - x) * (ty1 - y)) / d
            w2 = ((tx2 - x) * (ty0 - y) - (tx0 - x) * (ty2 - y)) / d
            w3 = 1.0 - w1 - w2
        eps = -1e-12
        inside = (w1 >= eps) & (w2 >= eps) & (w3 >= eps) & good
        covered[i0 : i0 + chunk] = np.any(inside, axis=1)


def vertical_line_hits(mesh: TriSurface, pts: np.ndarray) -> np.ndarray:
    """True where the vertical line through pts[i] meets the surface."""
    V, F = mesh.vertices, mesh.triangles
    t0 = V[F[:, 0]]
    t1 = V[F[:, 1]]
    t2 = V[F[:, 2]]
    covered = np.zeros(pts.shape[0], dtype=np.bool_)
    impl = pick(_cover_numba, _cover_numpy)
    impl(
        np.ascontiguousarray(pts[:, 0]),
        np.ascontiguousarray(pts[:, 1]),
        np.ascontiguousarray(t0[:, 0]),
        np.ascontiguousarray(t0[:, 1]),
        np.ascontiguousarray(t1[:, 0]),
        np.ascontiguousarray(t1[:, 1]),
        np.ascontiguousarray(t2[:, 0]),
        np.ascontiguousarray(t2[:, 1]),
        covered,
    )
    return covered


def spanning_check(
    mesh: TriSurface,
    domain: PlanarDomain,
    n_samples: int,
    rim_tol: float | None = None,
) -> bool:
    """True iff vertical lines through n_samples quasi-random footprint points
    all intersect the surface.

    The rim of a triangulated sheet is a polygon whose chords dip inside the
    true contact line by the sagitta (about edge^2 * curvature / 8), so a
    point missed only within that resolution margin of the rim still counts
    as covered; rim_tol defaults to 0.25 * (longest rim edge)^2.  Monotone
    under triangle removal: fewer triangles can only lose hits, and the rim
    ring is part of the mesh structure, not recomputed.
    """
    if n_samples < 100:
        raise DomainError("n_samples must be at least 100")
    pts = quasi_random_in_domain(domain, n_samples)
    hit = vertical_line_hits(mesh, pts)
    if np.all(hit):
        return True
    ring = mesh.vertices[mesh.boundary_loop][:, :2]
    if rim_tol is None:
        edges = np.linalg.norm(np.roll(ring, -1, axis=0) - ring, axis=1)
        rim_tol = 0.25 * float(np.max(edges)) ** 2
    missed = pts[~hit]
    a = ring
    b = np.roll(ring, -1, axis=0)
    ab = b - a
    ab2 = np.maximum(np.sum(ab**2, axis=1), 1e-300)
    ap = missed[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("pse,se->ps", ap, ab) / ab2[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[..., None] * ab[None, :, :]
    d = np.min(np.sqrt(np.sum((missed[:, None, :] - proj) ** 2, axis=-1)), axis=1)
    return bool(np.all(d <= rim_tol))
