"""Planar wire curves, tubular neighborhoods, and the admissible planar domain.

The wire is a closed embedded C^2 curve ``gamma`` living in the plane
``{x3 = 0}``.  Everything downstream (tube projections, the inner offset
domain spanned by the flat film, chart metrics) is built from the evaluators
defined here.  Derivatives always come from the analytic definition or the
periodic spline, never from finite differences of samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    AxisDegenerateError,
    ConfigError,
    DomainError,
    NoConvergenceError,
    OffsetCollapseError,
)

__all__ = [
    "WireCurve",
    "CircleWire",
    "EllipseWire",
    "SplineWire",
    "wire_from_spec",
    "Tube",
    "PlanarDomain",
    "closest_point_on_tube",
    "inner_offset_domain",
    "tube_surface_point",
    "tube_tangent_basis",
]


class WireCurve:
    """Closed planar curve with analytic derivatives up to third order.

    Subclasses provide vectorized ``point``, ``d1``, ``d2``, ``d3`` over the
    periodic parameter ``s`` in ``[0, L)``.  The parameter is not required to
    be arc length; all derived quantities carry the speed factor ``|gamma'|``.
    """

    L: float = 2.0 * np.pi

    def point(self, s):
        raise NotImplementedError

    def d1(self, s):
        raise NotImplementedError

    def d2(self, s):
        raise NotImplementedError

    def d3(self, s):
        raise NotImplementedError

    # -- derived evaluators ------------------------------------------------

    def speed(self, s):
        d = self.d1(s)
        return np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2)

    def tangent(self, s):
        d = self.d1(s)
        return d / self.speed(s)[..., None]

    def inward_normal(self, s):
        """Unit normal pointing into the bounded region (wire is CCW)."""
        t = self.tangent(s)
        return np.stack([-t[..., 1], t[..., 0]], axis=-1)

    def curvature(self, s):
        d1 = self.d1(s)
        d2 = self.d2(s)
        cross = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
        return cross / self.speed(s) ** 3

    def curvature_derivative(self, s):
        """d(kappa)/ds, used by the contact-ring volume gradient."""
        d1 = self.d1(s)
        d2 = self.d2(s)
        d3 = self.d3(s)
        sp = self.speed(s)
        cross12 = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
        cross13 = d1[..., 0] * d3[..., 1] - d1[..., 1] * d3[..., 0]
        dsp = (d1[..., 0] * d2[..., 0] + d1[..., 1] * d2[..., 1]) / sp
        return cross13 / sp**3 - 3.0 * cross12 * dsp / sp**4

    def speed_derivative(self, s):
        d1 = self.d1(s)
        d2 = self.d2(s)
        return (d1[..., 0] * d2[..., 0] + d1[..., 1] * d2[..., 1]) / self.speed(s)

    def max_curvature(self, n: int = 4096) -> float:
        s = np.linspace(0.0, self.L, n, endpoint=False)
        return float(np.max(np.abs(self.curvature(s))))

    def arclength_table(self, n: int = 4096):
        """Cumulative arc length on a uniform parameter grid (n+1 nodes)."""
        s = np.linspace(0.0, self.L, n + 1)
        sp = self.speed(s)
        ell = np.concatenate(
            [[0.0], np.cumsum(0.5 * (sp[1:] + sp[:-1]) * np.diff(s))]
        )
        return s, ell

    def validate(self, n: int = 2048, tol: float = 1e-12) -> None:
        """Check closedness, regularity, normal orthogonality, simplicity."""
        s = np.linspace(0.0, self.L, n, endpoint=False)
        if not np.allclose(self.point(0.0), self.point(self.L), atol=1e-10):
            raise DomainError("wire is not closed over its period")
        sp = self.speed(s)
        if np.min(sp) <= 0.0:
            raise DomainError("wire has a vanishing tangent")
        nu = self.inward_normal(s)
        d1 = self.d1(s)
        dots = np.abs(np.einsum("ij,ij->i", nu, d1))
        norms = np.abs(np.einsum("ij,ij->i", nu, nu) - 1.0)
        if np.max(dots / sp) > tol or np.max(norms) > tol:
            raise DomainError("inward normal fails orthonormality")
        pts = self.point(s)
        if _polyline_self_intersects(np.vstack([pts, pts[:1]])):
            raise DomainError("wire polyline self-intersects")

    def spec_dict(self) -> dict:
        raise NotImplementedError


class CircleWire(WireCurve):
    """Circle of given radius centered at the origin, CCW, s = angle."""

    def __init__(self, radius: float = 1.0):
        if radius <= 0.0:
            raise DomainError("circle radius must be positive")
        self.radius = float(radius)
        self.L = 2.0 * np.pi

    def point(self, s):
        s = np.asarray(s, dtype=float)
        return self.radius * np.stack([np.cos(s), np.sin(s)], axis=-1)

    def d1(self, s):
        s = np.asarray(s, dtype=float)
        return self.radius * np.stack([-np.sin(s), np.cos(s)], axis=-1)

    def d2(self, s):
        return -self.point(s)

    def d3(self, s):
        return -self.d1(s)

    def spec_dict(self):
        return {"kind": "circle", "params": {"radius": self.radius}}


class EllipseWire(WireCurve):
    """Axis-aligned ellipse (a, b), CCW, s = standard angle parameter."""

    def __init__(self, a: float, b: float):
        if a <= 0.0 or b <= 0.0:
            raise DomainError("ellipse semi-axes must be positive")
        self.a = float(a)
        self.b = float(b)
        self.L = 2.0 * np.pi

    def point(self, s):
        s = np.asarray(s, dtype=float)
        return np.stack([self.a * np.cos(s), self.b * np.sin(s)], axis=-1)

    def d1(self, s):
        s = np.asarray(s, dtype=float)
        return np.stack([-self.a * np.sin(s), self.b * np.cos(s)], axis=-1)

    def d2(self, s):
        return -self.point(s)

    def d3(self, s):
        return -self.d1(s)

    def spec_dict(self):
        return {"kind": "ellipse", "params": {"a": self.a, "b": self.b}}


class SplineWire(WireCurve):
    """Periodic cubic-spline fit of sample points; s in [0, 1)."""

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 2 or samples.shape[0] < 4:
            raise DomainError("spline wire needs at least 4 planar samples")
        if np.allclose(samples[0], samples[-1]):
            samples = samples[:-1]
        if _shoelace(samples) < 0.0:
            samples = samples[::-1]
        closed = np.vstack([samples, samples[:1]])
        u = np.linspace(0.0, 1.0, closed.shape[0])
        self._spline = CubicSpline(u, closed, bc_type="periodic")
        self._samples = samples
        self.L = 1.0

    def point(self, s):
        return self._spline(np.mod(s, 1.0))

    def d1(self, s):
        return self._spline(np.mod(s, 1.0), 1)

    def d2(self, s):
        return self._spline(np.mod(s, 1.0), 2)

    def d3(self, s):
        return self._spline(np.mod(s, 1.0), 3)

    def spec_dict(self):
        return {"kind": "spline", "params": {"samples": self._samples.tolist()}}


def wire_from_spec(spec: dict) -> WireCurve:
    """Build a wire from the JSON definition {"kind": ..., "params": {...}}."""
    try:
        kind = spec["kind"]
        params = spec.get("params", {})
        if kind == "circle":
            return CircleWire(radius=float(params.get("radius", 1.0)))
        if kind == "ellipse":
            return EllipseWire(a=float(params["a"]), b=float(params["b"]))
        if kind == "spline":
            return SplineWire(params["samples"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad wire spec: {exc}") from exc
    raise ConfigError(f"unknown wire kind {kind!r}")


# ---------------------------------------------------------------------------
# tube
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tube:
    """Closed delta-neighborhood of the wire; a solid torus for a circle.

    ``validate`` enforces delta * max|kappa| < 1 (so the inner offset stays
    regular) and a sampled global injectivity check: any two wire points
    closer than 2*delta in the plane must be close along the curve, otherwise
    the tube surface would self-intersect.
    """

    wire: WireCurve
    delta: float
    margin: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.delta <= 0.0:
            raise DomainError("tube radius must be positive")
        kmax = self.wire.max_curvature()
        if self.delta * kmax >= 1.0:
            raise DomainError(
                f"tube radius too large: delta*max|kappa| = {self.delta * kmax:.6g} >= 1"
            )
        object.__setattr__(self, "margin", 1.0 - self.delta * kmax)
        self._injectivity_check()

    def _injectivity_check(self, n: int = 512, tol: float = 1e-9):
        """Distant strands may not come within 2*delta of each other.

        Pairs closer along the curve than the osculating scale pi/max|kappa|
        are governed by the local condition delta*kappa < 1 and are exempt.
        """
        wire = self.wire
        s = np.linspace(0.0, wire.L, n, endpoint=False)
        pts = wire.point(s)
        sp = wire.speed(s)
        ell = np.concatenate([[0.0], np.cumsum(0.5 * (sp[1:] + sp[:-1]) * np.diff(s))])
        total = ell[-1] + 0.5 * (sp[-1] + sp[0]) * (wire.L / n)
        arc = np.abs(ell[:n, None] - ell[None, :n])
        arc = np.minimum(arc, total - arc)
        dist = np.sqrt(np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1))
        local_scale = min(np.pi / wire.max_curvature(), 0.499 * total)
        far = arc > local_scale
        if np.any(dist[far] < 2.0 * self.delta - tol):
            raise DomainError("tube self-intersects: wire folds back within 2*delta")


def tube_surface_point(tube: Tube, s, angle):
    """Point(s) on the tube boundary at meridian coordinates (s, angle).

    angle = 0 is the inner equator (toward the bounded domain), pi/2 the top.
    """
    s = np.asarray(s, dtype=float)
    angle = np.asarray(angle, dtype=float)
    g = tube.wire.point(s)
    nu = tube.wire.inward_normal(s)
    ca = np.cos(angle)[..., None]
    xy = g + tube.delta * ca * nu
    z = tube.delta * np.sin(angle)
    return np.concatenate([xy, z[..., None]], axis=-1)


def tube_tangent_basis(tube: Tube, s, angle):
    """Tangent vectors (d/ds, d/dangle) of the tube surface, plus outward normal."""
    s = np.asarray(s, dtype=float)
    angle = np.asarray(angle, dtype=float)
    d1 = tube.wire.d1(s)
    nu = tube.wire.inward_normal(s)
    kap = tube.wire.curvature(s)
    ca, sa = np.cos(angle), np.sin(angle)
    # d(gamma + delta*cos(a)*nu)/ds = gamma' (1 - delta*cos(a)*kappa)
    fac = (1.0 - tube.delta * ca * kap)[..., None]
    t_s = np.concatenate([d1 * fac, np.zeros_like(ca)[..., None]], axis=-1)
    t_a = np.concatenate(
        [-tube.delta * sa[..., None] * nu, (tube.delta * ca)[..., None]], axis=-1
    )
    n_out = np.concatenate([ca[..., None] * nu, sa[..., None]], axis=-1)
    return t_s, t_a, n_out


def _closest_param_newton(wire: WireCurve, p_xy, s0: float, max_iter: int = 50):
    """Polish the closest-curve-parameter with Newton on (p - gamma).gamma' = 0."""
    s = float(s0)
    for _ in range(max_iter):
        g = wire.point(s)
        d1 = wire.d1(s)
        d2 = wire.d2(s)
        r = p_xy - g
        f = r @ d1
        fp = -(d1 @ d1) + r @ d2
        if fp == 0.0:
            break
        step = f / fp
        s -= step
        if abs(step) < 1e-14 * max(1.0, wire.L):
            return np.mod(s, wire.L)
    g = wire.point(s)
    d1 = wire.d1(s)
    if abs((p_xy - g) @ d1) <= 1e-9 * max(1.0, float(np.linalg.norm(p_xy - g))):
        return np.mod(s, wire.L)
    raise NoConvergenceError("closest-point Newton failed", s=s)


_COARSE_N = 1024


def closest_point_on_tube(p, tube: Tube):
    """Project a 3D point onto the tube boundary.

    Returns (foot, outward_normal, s, angle) where (s, angle) are meridian
    coordinates with angle measured from the inner equator toward +x3.
    A coarse parameter grid seeds a Newton polish; the tube is non-convex so
    Newton alone could land on the wrong sheet.
    """
    p = np.asarray(p, dtype=float)
    p_xy = p[:2]
    wire = tube.wire
    sgrid = np.linspace(0.0, wire.L, _COARSE_N, endpoint=False)
    pts = wire.point(sgrid)
    d2 = np.sum((pts - p_xy) ** 2, axis=1)
    s = _closest_param_newton(wire, p_xy, float(sgrid[int(np.argmin(d2))]))
    g = wire.point(s)
    axis_pt = np.array([g[0], g[1], 0.0])
    dvec = p - axis_pt
    dist = float(np.linalg.norm(dvec))
    if dist <= 1e-12:
        raise AxisDegenerateError("point lies on the wire axis")
    n_out = dvec / dist
    foot = axis_pt + tube.delta * n_out
    nu = wire.inward_normal(s)
    a_nu = n_out[0] * nu[0] + n_out[1] * nu[1]
    angle = float(np.arctan2(n_out[2], a_nu))
    return foot, n_out, float(s), angle


# ---------------------------------------------------------------------------
# planar domain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanarDomain:
    """Simple CCW polygon in the plane {x3=0}, used as the film footprint."""

    polyline: np.ndarray  # (n, 2), no repeated endpoint
    params: np.ndarray | None = None  # wire parameter of each vertex, if known

    def __post_init__(self):
        poly = np.asarray(self.polyline, dtype=float)
        if poly.ndim != 2 or poly.shape[1] != 2 or poly.shape[0] < 3:
            raise DomainError("polyline must be (n>=3, 2)")
        if _shoelace(poly) <= 0.0:
            raise DomainError("polyline must be counterclockwise with positive area")
        if _polyline_self_intersects(np.vstack([poly, poly[:1]])):
            raise DomainError("domain polygon self-intersects")
        object.__setattr__(self, "polyline", poly)

    @property
    def area(self) -> float:
        return _shoelace(self.polyline)

    @property
    def perimeter(self) -> float:
        poly = self.polyline
        seg = np.roll(poly, -1, axis=0) - poly
        return float(np.sum(np.hypot(seg[:, 0], seg[:, 1])))

    def centroid(self) -> np.ndarray:
        poly = self.polyline
        nxt = np.roll(poly, -1, axis=0)
        cr = poly[:, 0] * nxt[:, 1] - nxt[:, 0] * poly[:, 1]
        a = np.sum(cr) / 2.0
        cx = np.sum((poly[:, 0] + nxt[:, 0]) * cr) / (6.0 * a)
        cy = np.sum((poly[:, 1] + nxt[:, 1]) * cr) / (6.0 * a)
        return np.array([cx, cy])

    def contains(self, pts) -> np.ndarray:
        """Vectorized even-odd rule point-in-polygon test."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        poly = self.polyline
        x0, y0 = poly[:, 0], poly[:, 1]
        x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
        px = pts[:, 0][:, None]
        py = pts[:, 1][:, None]
        cond = (y0[None, :] > py) != (y1[None, :] > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xin = x0[None, :] + (py - y0[None, :]) * (x1 - x0)[None, :] / (y1 - y0)[None, :]
        crossing = cond & (px < xin)
        return np.sum(crossing, axis=1) % 2 == 1

    def boundary_distance(self, pts) -> np.ndarray:
        """Unsigned distance from points to the polygon boundary."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a = self.polyline
        b = np.roll(a, -1, axis=0)
        ab = b - a
        ab2 = np.sum(ab**2, axis=1)
        ap = pts[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("pse,se->ps", ap, ab) / ab2[None, :], 0.0, 1.0)
        proj = a[None, :, :] + t[..., None] * ab[None, :, :]
        d = np.sqrt(np.sum((pts[:, None, :] - proj) ** 2, axis=-1))
        return np.min(d, axis=1)

    def inscribed_radius(self) -> float:
        """Radius of the boundary-distance ball at the centroid (lower bound
        for the largest inscribed disc)."""
        c = self.centroid()
        return float(self.boundary_distance(c[None, :])[0])


def _shoelace(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _polyline_self_intersects(closed: np.ndarray) -> bool:
    """Pairwise proper-intersection test of the closed polyline's segments."""
    a = closed[:-1]
    b = closed[1:]
    n = a.shape[0]
    if n > 1500:  # subsample: the test is O(n^2)
        step = n // 1500 + 1
        a = a[::step]
        b = np.roll(a, -1, axis=0)
        n = a.shape[0]
    d = b - a
    cross = lambda u, v: u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    denom = cross(d[:, None, :], d[None, :, :])
    diff = a[None, :, :] - a[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross(diff, d[None, :, :]) / denom
        u = cross(diff, d[:, None, :]) / denom
    eps = 1e-12
    hit = (denom != 0) & (t > eps) & (t < 1 - eps) & (u > eps) & (u < 1 - eps)
    i, j = np.indices(hit.shape)
    adjacent = (np.abs(i - j) <= 1) | (np.abs(i - j) >= n - 1)
    return bool(np.any(hit & ~adjacent))


def inner_offset_domain(tube: Tube, n_points: int = 2048) -> PlanarDomain:
    """Inward offset of the wire by delta: the bounded planar component.

    Vertices sit exactly on the offset curve gamma(s) + delta*nu(s), spaced
    uniformly in the offset curve's own arc length.
    """
    wire = tube.wire
    delta = tube.delta
    nfine = max(8 * n_points, 8192)
    s = np.linspace(0.0, wire.L, nfine + 1)
    kap = wire.curvature(s)
    fac = 1.0 - delta * kap
    if np.min(fac) <= 0.0:
        raise OffsetCollapseError(
            "inner offset collapses: delta*kappa >= 1 somewhere",
            min_factor=float(np.min(fac)),
        )
    speed_off = wire.speed(s) * fac
    ell = np.concatenate([[0.0], np.cumsum(0.5 * (speed_off[1:] + speed_off[:-1]) * np.diff(s))])
    total = ell[-1]
    targets = np.linspace(0.0, total, n_points, endpoint=False)
    s_nodes = np.interp(targets, ell, s)
    pts = wire.point(s_nodes) + delta * wire.inward_normal(s_nodes)
    if _polyline_self_intersects(np.vstack([pts, pts[:1]])):
        raise OffsetCollapseError("inner offset self-intersects globally")
    return PlanarDomain(polyline=pts, params=s_nodes)
