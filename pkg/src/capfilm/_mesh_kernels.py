"""Per-triangle assembly kernels: area, under-graph volume, cotangent
curvature, and their exact gradients.

Each kernel has a numba build (sequential loops, deterministic accumulation
order) and a vectorized numpy fallback (bincount scatter); selection follows
capfilm._accel.
"""

from __future__ import annotations

import numpy as np

from ._accel import njit, pick


# -- area -------------------------------------------------------------------


def _area_grad_py(V, F, grad):
    total = 0.0
    for t in range(F.shape[0]):
        ia, ib, ic = F[t, 0], F[t, 1], F[t, 2]
        e1x = V[ib, 0] - V[ia, 0]
        e1y = V[ib, 1] - V[ia, 1]
        e1z = V[ib, 2] - V[ia, 2]
        e2x = V[ic, 0] - V[ia, 0]
        e2y = V[ic, 1] - V[ia, 1]
        e2z = V[ic, 2] - V[ia, 2]
        nx = e1y * e2z - e1z * e2y
        ny = e1z * e2x - e1x * e2z
        nz = e1x * e2y - e1y * e2x
        nn = (nx * nx + ny * ny + nz * nz) ** 0.5
        if nn <= 0.0:
            continue
        total += 0.5 * nn
        ux, uy, uz = nx / nn, ny / nn, nz / nn
        # grad_a = 0.5 * u x (c - b), cyclic
        cbx = V[ic, 0] - V[ib, 0]
        cby = V[ic, 1] - V[ib, 1]
        cbz = V[ic, 2] - V[ib, 2]
        grad[ia, 0] += 0.5 * (uy * cbz - uz * cby)
        grad[ia, 1] += 0.5 * (uz * cbx - ux * cbz)
        grad[ia, 2] += 0.5 * (ux * cby - uy * cbx)
        acx = V[ia, 0] - V[ic, 0]
        acy = V[ia, 1] - V[ic, 1]
        acz = V[ia, 2] - V[ic, 2]
        grad[ib, 0] += 0.5 * (uy * acz - uz * acy)
        grad[ib, 1] += 0.5 * (uz * acx - ux * acz)
        grad[ib, 2] += 0.5 * (ux * acy - uy * acx)
        bax = V[ib, 0] - V[ia, 0]
        bay = V[ib, 1] - V[ia, 1]
        baz = V[ib, 2] - V[ia, 2]
        grad[ic, 0] += 0.5 * (uy * baz - uz * bay)
        grad[ic, 1] += 0.5 * (uz * bax - ux * baz)
        grad[ic, 2] += 0.5 * (ux * bay - uy * bax)
    return total


_area_grad_numba = njit(cache=True)(_area_grad_py)


def _area_grad_numpy(V, F, grad):
    a, b, c = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    n = np.cross(b - a, c - a)
    nn = np.linalg.norm(n, axis=1)
    ok = nn > 0.0
    u = np.zeros_like(n)
    u[ok] = n[ok] / nn[ok, None]
    ga = 0.5 * np.cross(u, c - b)
    gb = 0.5 * np.cross(u, a - c)
    gc = 0.5 * np.cross(u, b - a)
    nv = V.shape[0]
    for k, g in ((0, ga), (1, gb), (2, gc)):
        for d in range(3):
            grad[:, d] += np.bincount(F[:, k], weights=g[:, d], minlength=nv)
    return float(0.5 * np.sum(nn))


def area_with_grad(V, F):
    """Total unsigned area and its gradient w.r.t. vertex positions."""
    grad = np.zeros_like(V)
    total = pick(_area_grad_numba, _area_grad_numpy)(V, F, grad)
    return float(total), grad


# -- volume under the graph (prism / divergence-theorem form) ----------------


def _prism_grad_py(V, F, grad):
    total = 0.0
    for t in range(F.shape[0]):
        ia, ib, ic = F[t, 0], F[t, 1], F[t, 2]
        ax, ay, az = V[ia, 0], V[ia, 1], V[ia, 2]
        bx, by, bz = V[ib, 0], V[ib, 1], V[ib, 2]
        cx, cy, cz = V[ic, 0], V[ic, 1], V[ic, 2]
        cr2 = (bx - ax) * (cy - ay) - (cx - ax) * (by - ay)
        zs = az + bz + cz
        total += zs * cr2 / 6.0
        grad[ia, 0] += zs * (by - cy) / 6.0
        grad[ia, 1] += zs * (cx - bx) / 6.0
        grad[ia, 2] += cr2 / 6.0
        grad[ib, 0] += zs * (cy - ay) / 6.0
        grad[ib, 1] += zs * (ax - cx) / 6.0
        grad[ib, 2] += cr2 / 6.0
        grad[ic, 0] += zs * (ay - by) / 6.0
        grad[ic, 1] += zs * (bx - ax) / 6.0
        grad[ic, 2] += cr2 / 6.0
    return total


_prism_grad_numba = njit(cache=True)(_prism_grad_py)


def _prism_grad_numpy(V, F, grad):
    a, b, c = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    cr2 = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (
        b[:, 1] - a[:, 1]
    )
    zs = a[:, 2] + b[:, 2] + c[:, 2]
    nv = V.shape[0]
    parts = {
        0: np.stack([zs * (b[:, 1] - c[:, 1]) / 6.0, zs * (c[:, 0] - b[:, 0]) / 6.0, cr2 / 6.0], axis=1),
        1: np.stack([zs * (c[:, 1] - a[:, 1]) / 6.0, zs * (a[:, 0] - c[:, 0]) / 6.0, cr2 / 6.0], axis=1),
        2: np.stack([zs * (a[:, 1] - b[:, 1]) / 6.0, zs * (b[:, 0] - a[:, 0]) / 6.0, cr2 / 6.0], axis=1),
    }
    for k, g in parts.items():
        for d in range(3):
            grad[:, d] += np.bincount(F[:, k], weights=g[:, d], minlength=nv)
    return float(np.sum(zs * cr2 / 6.0))


def prism_volume_with_grad(V, F):
    """Signed volume between the surface and the plane x3 = 0, with gradient."""
    grad = np.zeros_like(V)
    total = pick(_prism_grad_numba, _prism_grad_numpy)(V, F, grad)
    return float(total), grad


# -- cotangent mean curvature -------------------------------------------------


def _cotan_py(V, F, hvec, varea):
    for t in range(F.shape[0]):
        i = F[t, 0]
        j = F[t, 1]
        k = F[t, 2]
        for c in range(3):
            if c == 0:
                p, q, r = i, j, k
            elif c == 1:
                p, q, r = j, k, i
            else:
                p, q, r = k, i, j
            # cot of the angle at r, opposite the edge (p, q)
            ux = V[p, 0] - V[r, 0]
            uy = V[p, 1] - V[r, 1]
            uz = V[p, 2] - V[r, 2]
            vx = V[q, 0] - V[r, 0]
            vy = V[q, 1] - V[r, 1]
            vz = V[q, 2] - V[r, 2]
            dot = ux * vx + uy * vy + uz * vz
            cx = uy * vz - uz * vy
            cy = uz * vx - ux * vz
            cz = ux * vy - uy * vx
            cr = (cx * cx + cy * cy + cz * cz) ** 0.5
            if cr <= 0.0:
                continue
            cot = dot / cr
            for d in range(3):
                w = cot * (V[p, d] - V[q, d])
                hvec[p, d] += w
                hvec[q, d] -= w
        e1x = V[j, 0] - V[i, 0]
        e1y = V[j, 1] - V[i, 1]
        e1z = V[j, 2] - V[i, 2]
        e2x = V[k, 0] - V[i, 0]
        e2y = V[k, 1] - V[i, 1]
        e2z = V[k, 2] - V[i, 2]
        nx = e1y * e2z - e1z * e2y
        ny = e1z * e2x - e1x * e2z
        nz = e1x * e2y - e1y * e2x
        at = 0.5 * (nx * nx + ny * ny + nz * nz) ** 0.5
        varea[i] += at / 3.0
        varea[j] += at / 3.0
        varea[k] += at / 3.0


_cotan_numba = njit(cache=True)(_cotan_py)


def _cotan_numpy(V, F, hvec, varea):
    nv = V.shape[0]
    for c in range(3):
        p = F[:, c]
        q = F[:, (c + 1) % 3]
        r = F[:, (c + 2) % 3]
        u = V[p] - V[r]
        v = V[q] - V[r]
        dot = np.einsum("ij,ij->i", u, v)
        cr = np.linalg.norm(np.cross(u, v), axis=1)
        cot = np.where(cr > 0.0, dot / np.maximum(cr, 1e-300), 0.0)
        w = cot[:, None] * (V[p] - V[q])
        for d in range(3):
            hvec[:, d] += np.bincount(p, weights=w[:, d], minlength=nv)
            hvec[:, d] -= np.bincount(q, weights=w[:, d], minlength=nv)
    a, b, cc = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    at = 0.5 * np.linalg.norm(np.cross(b - a, cc - a), axis=1)
    for k in range(3):
        varea += np.bincount(F[:, k], weights=at / 3.0, minlength=nv)


def cotan_curvature(V, F):
    """Discrete mean-curvature vector (sum of principal curvatures times the
    normal) and barycentric vertex areas.

    Returns (hvec, varea) with hvec[i] = (1/(2 A_i)) * sum_j (cot a + cot b)
    (x_i - x_j); for a sphere of radius R, |hvec| -> 2/R.
    """
    hvec = np.zeros_like(V)
    varea = np.zeros(V.shape[0])
    pick(_cotan_numba, _cotan_numpy)(V, F, hvec, varea)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = hvec / (2.0 * varea[:, None])
    out[varea <= 0.0] = 0.0
    return out, varea


def _area_prism_py(V, F):
    area = 0.0
    vol = 0.0
    for t in range(F.shape[0]):
        ia, ib, ic = F[t, 0], F[t, 1], F[t, 2]
        e1x = V[ib, 0] - V[ia, 0]
        e1y = V[ib, 1] - V[ia, 1]
        e1z = V[ib, 2] - V[ia, 2]
        e2x = V[ic, 0] - V[ia, 0]
        e2y = V[ic, 1] - V[ia, 1]
        e2z = V[ic, 2] - V[ia, 2]
        nx = e1y * e2z - e1z * e2y
        ny = e1z * e2x - e1x * e2z
        nz = e1x * e2y - e1y * e2x
        area += 0.5 * (nx * nx + ny * ny + nz * nz) ** 0.5
        vol += (V[ia, 2] + V[ib, 2] + V[ic, 2]) * nz / 6.0
    return area, vol


_area_prism_numba = njit(cache=True)(_area_prism_py)


def _area_prism_numpy(V, F):
    a, b, c = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    n = np.cross(b - a, c - a)
    area = 0.5 * float(np.sum(np.linalg.norm(n, axis=1)))
    vol = float(np.sum((a[:, 2] + b[:, 2] + c[:, 2]) * n[:, 2] / 6.0))
    return area, vol


def area_and_prism(V, F):
    """Fused total area + prism volume (no gradients); line-search hot path."""
    return pick(_area_prism_numba, _area_prism_numpy)(V, F)


def vertex_areas(V, F):
    """Barycentric lumped vertex areas (one third of incident triangles)."""
    at = triangle_areas(V, F)
    nv = V.shape[0]
    va = np.zeros(nv)
    for k in range(3):
        va += np.bincount(F[:, k], weights=at / 3.0, minlength=nv)
    return va


def vertex_normals(V, F):
    """Area-weighted vertex normals (unit), orientation from the faces."""
    a, b, c = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    n = np.cross(b - a, c - a)
    nv = V.shape[0]
    acc = np.zeros_like(V)
    for k in range(3):
        for d in range(3):
            acc[:, d] += np.bincount(F[:, k], weights=n[:, d], minlength=nv)
    nn = np.linalg.norm(acc, axis=1)
    nn[nn == 0.0] = 1.0
    return acc / nn[:, None]


def triangle_areas(V, F):
    a, b, c = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def triangle_quality(V, F):
    """Inradius/circumradius ratio per triangle (equilateral = 0.5)."""
    a, b, c = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    la = np.linalg.norm(c - b, axis=1)
    lb = np.linalg.norm(a - c, axis=1)
    lc = np.linalg.norm(b - a, axis=1)
    area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    s = 0.5 * (la + lb + lc)
    with np.errstate(invalid="ignore", divide="ignore"):
        r_in = area / s
        r_circ = la * lb * lc / (4.0 * np.maximum(area, 1e-300))
        q = r_in / r_circ
    q[area <= 0.0] = 0.0
    return q
