"""Independent oracles used to freeze expected values.

Everything here deliberately avoids the code paths under test: closest
points by brute-force grid refinement, volumes by stratified Monte Carlo,
areas by pixel counting on a distance transform, orthogonality by the
two-circle intersection angle.
"""

from __future__ import annotations

import math

import numpy as np

from capfilm.geometry import Tube, tube_surface_point


def brute_force_closest_point(tube: Tube, p, n_s=4000, n_a=400, refinements=3):
    """argmin over an (s, angle) grid of |p - surface|, with iterated local
    grid refinement (pure search, no derivatives)."""
    p = np.asarray(p, dtype=float)
    L = tube.wire.L
    s_lo, s_hi = 0.0, L
    a_lo, a_hi = -math.pi, math.pi
    best = None
    for level in range(refinements + 1):
        s = np.linspace(s_lo, s_hi, n_s if level == 0 else 200)
        a = np.linspace(a_lo, a_hi, n_a if level == 0 else 200)
        S, A = np.meshgrid(s, a, indexing="ij")
        pts = tube_surface_point(tube, S.ravel(), A.ravel())
        d2 = np.sum((pts - p) ** 2, axis=1)
        k = int(np.argmin(d2))
        s_best, a_best = S.ravel()[k], A.ravel()[k]
        best = pts[k]
        ds = (s_hi - s_lo) / (len(s) - 1)
        da = (a_hi - a_lo) / (len(a) - 1)
        s_lo, s_hi = s_best - 2 * ds, s_best + 2 * ds
        a_lo, a_hi = a_best - 2 * da, a_best + 2 * da
    return best


def meridian_intersection_angle(delta: float, z_c: float, radius: float) -> float:
    """Meeting angle of the tube meridian circle (center (1,0), radius delta)
    and the sphere meridian circle (center (0, z_c), radius R) in the (r, z)
    half-plane, from the law of cosines at the intersection point."""
    d2 = 1.0 + z_c * z_c
    cosphi = (delta * delta + radius * radius - d2) / (2.0 * delta * radius)
    return math.pi - math.acos(max(-1.0, min(1.0, cosphi)))


def mc_cap_volume(
    delta: float,
    theta: float,
    n: int = 10**6,
    seed: int = 123,
    strata: int = 64,
) -> tuple[float, float]:
    """Stratified Monte Carlo estimate of the two-cap enclosed volume.

    Samples the bounding cylinder (radius r_c, height apex) in z-strata;
    indicator: inside both spheres, above the plane, outside the tube.
    Returns (estimate, standard error), both for the full two-sheet volume.
    """
    st, ct = math.sin(theta), math.cos(theta)
    radius = (1.0 - delta * ct) / st
    z_c = (delta - ct) / st
    r_c = 1.0 - delta * ct
    apex = (1.0 + delta) * math.tan(theta / 2.0)
    rng = np.random.default_rng(seed)
    per = n // strata
    z_edges = np.linspace(0.0, apex, strata + 1)
    total = 0.0
    var = 0.0
    for k in range(strata):
        z = rng.uniform(z_edges[k], z_edges[k + 1], per)
        r = r_c * np.sqrt(rng.uniform(0.0, 1.0, per))
        inside_sphere = r * r + (z - z_c) ** 2 <= radius * radius
        if delta > 0.0:
            outside_tube = (r - 1.0) ** 2 + z * z > delta * delta
        else:
            outside_tube = np.ones_like(inside_sphere)
        hit = inside_sphere & outside_tube
        phat = float(np.mean(hit))
        slab = math.pi * r_c * r_c * (z_edges[k + 1] - z_edges[k])
        total += phat * slab
        var += (phat * (1.0 - phat) / per) * slab * slab
    return 2.0 * total, 2.0 * math.sqrt(var)


def pixel_area_inner_offset(wire, delta: float, n: int = 4096) -> float:
    """Pixel count of {x inside the wire loop : dist(x, wire) > delta} using
    a Euclidean distance transform of the rasterized wire curve."""
    from scipy.ndimage import distance_transform_edt

    s = np.linspace(0.0, wire.L, 16 * n, endpoint=False)
    pts = wire.point(s)
    lo = pts.min(axis=0) - 2 * delta
    hi = pts.max(axis=0) + 2 * delta
    hx = (hi[0] - lo[0]) / n
    hy = (hi[1] - lo[1]) / n
    mask = np.ones((n, n), dtype=bool)
    ix = np.clip(((pts[:, 0] - lo[0]) / hx).astype(int), 0, n - 1)
    iy = np.clip(((pts[:, 1] - lo[1]) / hy).astype(int), 0, n - 1)
    mask[ix, iy] = False
    dist = distance_transform_edt(mask, sampling=(hx, hy))
    # inside test: winding parity per pixel row against the wire polygon
    xs = lo[0] + (np.arange(n) + 0.5) * hx
    ys = lo[1] + (np.arange(n) + 0.5) * hy
    from capfilm.geometry import PlanarDomain

    dom = PlanarDomain(polyline=wire.point(np.linspace(0, wire.L, 512, endpoint=False)))
    count = 0
    for i in range(n):  # row-chunked: the pairwise test is memory hungry
        row = np.stack([np.full(n, xs[i]), ys], axis=1)
        inside = dom.contains(row)
        count += int(np.sum(inside & (dist[i] > delta)))
    return float(count) * hx * hy
