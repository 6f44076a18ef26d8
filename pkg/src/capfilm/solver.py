"""Discrete area minimization under an enclosed-volume constraint.

The upper sheet is a triangulated graph whose rim slides on the tube.  The
constrained functional is

    minimize  Area(V)   subject to   Vol(V) = half_volume,

where Vol is the volume of the wetted region above the plane: the
divergence-theorem prism sum over the surface minus the part of each column
blocked by the tube below the contact ring (the "shadow" term).  Using the
true enclosed volume matters: the orthogonal contact condition is never
imposed, it has to emerge as the natural boundary condition of exactly this
functional, and the measured contact angle is the convergence diagnostic.

The volume constraint is handled by an augmented-Lagrangian outer loop; the
inner loop is preconditioned gradient descent (lumped vertex mass) with a
backtracking line search.  The initial trial step is a Barzilai-Borwein
length, which only changes the step size, not the descent direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _mesh_kernels as mk
from .errors import (
    MeshDegenerateError,
    NoBoundaryError,
    NoConvergenceError,
    VolumeInfeasibleError,
)
from .geometry import PlanarDomain, Tube, tube_surface_point, tube_tangent_basis
from .meshing import QUALITY_FLOOR, TriSurface, init_mesh, remesh

__all__ = [
    "SolveParams",
    "SolveReport",
    "minimize",
    "solve_two_sheet",
    "transfer_solution",
    "measure_contact_angle",
    "estimate_lambda",
    "enclosed_volume",
    "graph_height",
]

_GAUSS_XI = np.array([0.5 - math.sqrt(3.0 / 5.0) / 2.0, 0.5, 0.5 + math.sqrt(3.0 / 5.0) / 2.0])
_GAUSS_W = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])


@dataclass
class SolveParams:
    target_edge: float
    tol: float = 1e-5  # stop when |grad L|_2 <= tol * area
    max_outer: int = 40
    max_inner: int = 6000
    penalty_growth: float = 10.0
    vol_tol: float = 1e-7  # relative volume defect
    remesh_every: int = 50
    mu0: float = 50.0

    @classmethod
    def from_dict(cls, d: dict) -> "SolveParams":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass
class SolveReport:
    lambda_hat: float
    area: float
    volume: float
    grad_norm: float
    contact_angle_mean: float
    contact_angle_max_dev: float
    iterations: int
    outer_iterations: int
    converged: bool
    merit_log: list = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {
            "lambda_hat": self.lambda_hat,
            "area": self.area,
            "volume": self.volume,
            "grad_norm": self.grad_norm,
            "contact_angle_stats": {
                "mean": self.contact_angle_mean,
                "max_dev": self.contact_angle_max_dev,
            },
            "iterations": self.iterations,
            "outer_iterations": self.outer_iterations,
            "converged": self.converged,
        }


# ---------------------------------------------------------------------------
# tube shadow term: volume of {0 < x3 < wall} under the rim
# ---------------------------------------------------------------------------


def _shadow_profile(tube: Tube, t, kap):
    """Xi(t, kappa) = int_t^delta sqrt(d^2 - tau^2) (1 - tau*kappa) dtau."""
    d = tube.delta
    t = np.clip(t, -d, d)
    root = np.sqrt(np.maximum(d * d - t * t, 0.0))
    i1 = 0.5 * (t * root + d * d * np.arcsin(np.clip(t / d, -1.0, 1.0)))
    return d * d * math.pi / 4.0 - i1 - kap * root**3 / 3.0


def _shadow_profile_dt(tube: Tube, t, kap):
    d = tube.delta
    t = np.clip(t, -d, d)
    root = np.sqrt(np.maximum(d * d - t * t, 0.0))
    return -root * (1.0 - t * kap)


def _shadow_profile_dkap(tube: Tube, t):
    d = tube.delta
    t = np.clip(t, -d, d)
    return -np.sqrt(np.maximum(d * d - t * t, 0.0)) ** 3 / 3.0


def _shadow_s_cache(tube: Tube, s_ring):
    """Per-edge Gauss data depending only on the rim's wire parameters
    (frozen during a solve): node weights, speeds, curvatures, derivatives."""
    wire = tube.wire
    L = wire.L
    s_i = np.asarray(s_ring, dtype=float)
    s_j = np.roll(s_i, -1)
    ds = (s_j - s_i) % L
    ds = np.where(ds > L / 2.0, ds - L, ds)
    nodes = []
    for xi, w in zip(_GAUSS_XI, _GAUSS_W):
        sq = (s_i + xi * ds) % L
        nodes.append(
            {
                "xi": float(xi),
                "w": float(w),
                "speed": wire.speed(sq),
                "kappa": wire.curvature(sq),
                "dspeed": wire.speed_derivative(sq),
                "dkappa": wire.curvature_derivative(sq),
            }
        )
    return {"ds": ds, "nodes": nodes}


def shadow_volume_and_grad(
    tube: Tube, s_ring, a_ring, want_grad: bool = True, cache=None
):
    """Shadow volume for a polygonal rim given in loop order, with gradients
    in the (s, angle) tube coordinates of each rim vertex.

    Per edge a 3-point Gauss rule in the wire parameter; the rim offset
    t = delta*cos(angle) is interpolated linearly along the edge.
    """
    if cache is None:
        cache = _shadow_s_cache(tube, s_ring)
    s_i = np.asarray(s_ring, dtype=float)
    a_i = np.asarray(a_ring, dtype=float)
    t_i = tube.delta * np.cos(a_i)
    t_j = np.roll(t_i, -1)
    ds = cache["ds"]

    S = 0.0
    gs = np.zeros_like(s_i)
    gt = np.zeros_like(s_i)
    for node in cache["nodes"]:
        xi, w = node["xi"], node["w"]
        sp = node["speed"]
        kap = node["kappa"]
        tq = t_i + xi * (t_j - t_i)
        Xi = _shadow_profile(tube, tq, kap)
        g = sp * Xi
        S += float(np.sum(w * ds * g))
        if want_grad:
            dg_ds = node["dspeed"] * Xi + sp * _shadow_profile_dkap(tube, tq) * node[
                "dkappa"
            ]
            dg_dt = sp * _shadow_profile_dt(tube, tq, kap)
            # edge (i -> i+1): d/ds_i and d/ds_{i+1}
            gs += w * (-g + ds * dg_ds * (1.0 - xi))
            gs += np.roll(w * (g + ds * dg_ds * xi), 1)
            gt += w * ds * dg_dt * (1.0 - xi)
            gt += np.roll(w * ds * dg_dt * xi, 1)
    ga = gt * (-tube.delta * np.sin(a_i))
    return S, gs, ga


def enclosed_volume(mesh: TriSurface, tube: Tube) -> float:
    """True wetted volume above the plane: prism sum minus the tube shadow."""
    vol, _ = mk.prism_volume_with_grad(mesh.vertices, mesh.triangles)
    loop = mesh.boundary_loop
    S, _, _ = shadow_volume_and_grad(
        tube, mesh.boundary_s[loop], mesh.boundary_angle[loop], want_grad=False
    )
    return vol - S


# ---------------------------------------------------------------------------
# solver state
# ---------------------------------------------------------------------------


class _SheetState:
    """One sheet's mesh plus cached boundary bookkeeping."""

    def __init__(self, mesh: TriSurface, tube: Tube, shadow_cache=None):
        self.mesh = mesh
        self.tube = tube
        self.loop = mesh.boundary_loop.copy()
        self._shadow_cache = shadow_cache or _shadow_s_cache(
            tube, mesh.boundary_s[self.loop]
        )

    def functionals(self):
        V, F = self.mesh.vertices, self.mesh.triangles
        area, prism = mk.area_and_prism(V, F)
        S, _, _ = shadow_volume_and_grad(
            self.tube,
            self.mesh.boundary_s[self.loop],
            self.mesh.boundary_angle[self.loop],
            want_grad=False,
            cache=self._shadow_cache,
        )
        return area, prism - S

    def gradients(self):
        """Area and volume gradients in solver DOFs.

        Returns (area, vol, gA, gV) where the g arrays have shape (n, 3) for
        interior rows; on boundary rows only column 1 is live and holds the
        derivative along the tube meridian (the angle coordinate).  The wire
        coordinate of a rim vertex is pure gauge (sliding along the contact
        line), so it is frozen rather than optimized; this pins the rim
        parametrization and prevents tangential clustering.
        """
        mesh, tube = self.mesh, self.tube
        V, F = mesh.vertices, mesh.triangles
        area, gA3 = mk.area_with_grad(V, F)
        prism, gP3 = mk.prism_volume_with_grad(V, F)
        loop = self.loop
        s_ring = mesh.boundary_s[loop]
        a_ring = mesh.boundary_angle[loop]
        S, _, gSa = shadow_volume_and_grad(
            tube, s_ring, a_ring, cache=self._shadow_cache
        )
        _, t_a, _ = tube_tangent_basis(tube, s_ring, a_ring)

        gA = gA3.copy()
        gV = gP3.copy()
        gA[loop, 0] = 0.0
        gA[loop, 1] = np.einsum("ij,ij->i", gA3[loop], t_a)
        gA[loop, 2] = 0.0
        gV[loop, 0] = 0.0
        gV[loop, 1] = np.einsum("ij,ij->i", gP3[loop], t_a) - gSa
        gV[loop, 2] = 0.0
        return area, prism - S, gA, gV

    def precond(self):
        """Inverse lumped-mass diagonal matched to the DOF layout."""
        mesh, tube = self.mesh, self.tube
        m = np.maximum(mk.vertex_areas(mesh.vertices, mesh.triangles), 1e-14)
        P = np.empty_like(mesh.vertices)
        P[:, 0] = 1.0 / m
        P[:, 1] = 1.0 / m
        P[:, 2] = 1.0 / m
        loop = self.loop
        _, t_a, _ = tube_tangent_basis(
            tube, mesh.boundary_s[loop], mesh.boundary_angle[loop]
        )
        na2 = np.einsum("ij,ij->i", t_a, t_a)
        P[loop, 0] = 0.0
        P[loop, 1] = 1.0 / (m[loop] * na2)
        P[loop, 2] = 0.0
        return P

    def apply_step(self, step):
        """Move vertices: interior rows are 3D displacements; boundary rows
        carry a meridian increment in column 1, applied as a tangent-plane
        move followed by reprojection onto the tube.

        The reprojection is meridian-constrained: the tentative point is
        pulled back onto the tube circle at the vertex's own (frozen) wire
        parameter, which is the closest tube point when the move is along
        the meridian tangent."""
        mesh, tube = self.mesh, self.tube
        loop = self.loop
        interior = ~mesh.boundary
        Vn = mesh.vertices.copy()
        Vn[interior] += step[interior]
        s_ring = mesh.boundary_s[loop]
        a_ring = mesh.boundary_angle[loop]
        _, t_a, _ = tube_tangent_basis(tube, s_ring, a_ring)
        tentative = mesh.vertices[loop] + step[loop, 1, None] * t_a
        g = tube.wire.point(s_ring)
        nu = tube.wire.inward_normal(s_ring)
        w_nu = np.einsum("ij,ij->i", tentative[:, :2] - g, nu)
        a_new = np.arctan2(tentative[:, 2], w_nu)
        Vn[loop] = tube_surface_point(tube, s_ring, a_new)
        new = mesh.copy()
        new.vertices = Vn
        new.boundary_angle[loop] = a_new
        out = _SheetState(new, tube, shadow_cache=self._shadow_cache)
        out.loop = loop
        return out


# ---------------------------------------------------------------------------
# augmented-Lagrangian driver (shared by one- and two-sheet modes)
# ---------------------------------------------------------------------------


def _merit(states, lam, mu, target):
    area = 0.0
    vol = 0.0
    for st in states:
        a, v = st.functionals()
        area += a
        vol += v
    c = vol - target
    return area - lam * c + 0.5 * mu * c * c, area, vol, c


def _assemble_grad(states, lam, mu, target):
    """Merit gradient; with lam_hat = lam - mu*c this is also the Lagrangian
    gradient at the instantaneous multiplier estimate."""
    area = 0.0
    vol = 0.0
    gAs = []
    gVs = []
    for st in states:
        a, v, gA, gV = st.gradients()
        area += a
        vol += v
        gAs.append(gA)
        gVs.append(gV)
    c = vol - target
    coef = lam - mu * c
    grads = [gA - coef * gV for gA, gV in zip(gAs, gVs)]
    gnorm = math.sqrt(sum(float(np.sum(g * g)) for g in grads))
    return area, vol, c, grads, gnorm


def _lambda_stationarity(states):
    """Multiplier read off the stationarity equation grad A = lam grad V by
    least squares over all live DOFs; at convergence this is the same number
    the augmented-Lagrangian update tends to, with far less sensitivity to
    the residual gradient."""
    num = 0.0
    den = 0.0
    for st in states:
        _, _, gA, gV = st.gradients()
        num += float(np.sum(gA * gV))
        den += float(np.sum(gV * gV))
    return num / den if den > 0.0 else 0.0


def _al_minimize(states, target, params: SolveParams, lam0: float):
    lam = lam0
    mu = params.mu0
    merit_log = []
    total_inner = 0
    c_prev = None
    vol_scale = max(abs(target), 1e-12)
    converged = False
    for outer in range(params.max_outer):
        states, inner_done, gnorm, area, vol, c = _inner_descent(
            states, lam, mu, target, params, merit_log, outer
        )
        total_inner += inner_done
        lam_hat = lam - mu * c
        if abs(c) <= params.vol_tol * vol_scale and gnorm <= params.tol * area:
            lam = _lambda_stationarity(states)
            converged = True
            break
        if c_prev is not None and abs(c) > 0.25 * abs(c_prev):
            mu *= params.penalty_growth
            if mu > 1e14:
                raise VolumeInfeasibleError(
                    "volume constraint is not closing", defect=c, mu=mu
                )
        c_prev = c
        lam = lam_hat
    else:
        raise NoConvergenceError(
            "augmented-Lagrangian loop exhausted",
            defect=c,
            grad_norm=gnorm,
            iterations=total_inner,
        )
    return states, lam, gnorm, area, vol, total_inner, outer + 1, merit_log, converged


def _inner_descent(states, lam, mu, target, params, merit_log, outer):
    merit, area, vol, c = _merit(states, lam, mu, target)
    t_prev = None
    prev_step_vec = None
    prev_grad = None
    epoch = 0
    inner = 0
    gnorm = np.inf
    Ps = None
    for inner in range(1, params.max_inner + 1):
        area, vol, c, grads, gnorm = _assemble_grad(states, lam, mu, target)
        if gnorm <= params.tol * area:
            break
        if Ps is None or (inner - 1) % 10 == 0:
            Ps = [st.precond() for st in states]
        dirs = []
        gparts = []
        dparts = []
        for P, g in zip(Ps, grads):
            d = -P * g
            dirs.append(d)
            gparts.append(g.ravel())
            dparts.append(d.ravel())
        gflat = np.concatenate(gparts)
        dflat = np.concatenate(dparts)
        slope = float(gflat @ dflat)
        if slope >= 0.0:
            break  # preconditioned direction lost descent: at resolution floor
        # Barzilai-Borwein trial step length, safeguarded by backtracking;
        # growth is capped so a bad BB estimate costs few rejected trials
        if prev_step_vec is not None and prev_step_vec.shape == gflat.shape:
            ydiff = gflat - prev_grad
            sy = float(prev_step_vec @ ydiff)
            ss = float(prev_step_vec @ prev_step_vec)
            t0 = ss / sy if sy > 0.0 else (t_prev or 1.0) * 2.0
        else:
            t0 = 1e-2 if t_prev is None else t_prev * 1.5
        if t_prev is not None:
            t0 = min(max(t0, 0.05 * t_prev), 2.5 * t_prev)
        t = t0
        accepted = False
        for _ in range(30):
            trial = [st.apply_step(t * d) for st, d in zip(states, dirs)]
            m_new, *_ = _merit(trial, lam, mu, target)
            if m_new <= merit + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break  # line search floor: no further decrease representable
        prev_step_vec = t * dflat
        prev_grad = gflat
        t_prev = t
        states = trial
        merit = m_new
        merit_log.append((outer, epoch, inner, merit))
        if params.remesh_every and inner % params.remesh_every == 0:
            states, changed = _remesh_states(states, params)
            if changed:
                epoch += 1
                t_prev = None
                prev_step_vec = None
                prev_grad = None
                Ps = None
                merit, area, vol, c = _merit(states, lam, mu, target)
    area, vol, c, _, gnorm = _assemble_grad(states, lam, mu, target)
    return states, inner, gnorm, area, vol, c


def _remesh_states(states, params):
    changed = False
    out = []
    for st in states:
        new_mesh, ops = remesh(st.mesh, st.tube, params.target_edge)
        if new_mesh.min_quality() <= QUALITY_FLOOR:
            raise MeshDegenerateError(
                "mesh quality below the floor after remeshing",
                min_quality=new_mesh.min_quality(),
            )
        if ops:
            changed = True
            out.append(_SheetState(new_mesh, st.tube))
        else:
            out.append(st)
    return out, changed


def _lambda_seed(domain: PlanarDomain, tube: Tube, eps_total: float) -> float:
    r_eff = math.sqrt(domain.area / math.pi)
    d = tube.delta
    return eps_total / (math.pi * r_eff**3 * (d + r_eff / 4.0))


def _inflate(mesh: TriSurface, half_volume: float) -> None:
    """Lift a flat mesh to a paraboloid-like graph holding half_volume.

    Purely an initial guess: heights follow 1 - f^2 in the ring fraction f
    (distance from the footprint centroid scaled by the boundary radius in
    that direction), scaled so the prism volume matches the target.
    """
    V = mesh.vertices
    bpts = V[mesh.boundary_loop][:, :2]
    c = bpts.mean(axis=0)
    phi_b = np.arctan2(bpts[:, 1] - c[1], bpts[:, 0] - c[0])
    r_b = np.linalg.norm(bpts - c, axis=1)
    order = np.argsort(phi_b)
    phi_s = phi_b[order]
    r_s = r_b[order]
    phi_ext = np.concatenate([phi_s, [phi_s[0] + 2.0 * math.pi]])
    r_ext = np.concatenate([r_s, [r_s[0]]])
    pos = V[:, :2] - c
    phi = np.arctan2(pos[:, 1], pos[:, 0])
    phi = np.where(phi < phi_s[0], phi + 2.0 * math.pi, phi)
    rb = np.interp(phi, phi_ext, r_ext)
    f = np.linalg.norm(pos, axis=1) / np.maximum(rb, 1e-12)
    w = np.maximum(1.0 - f * f, 0.0)
    w[mesh.boundary] = 0.0
    Vw = V.copy()
    Vw[:, 2] = w
    vols, _ = mk.prism_volume_with_grad(Vw, mesh.triangles)
    if vols > 0.0:
        V[:, 2] += (half_volume / vols) * w


def minimize(
    mesh: TriSurface,
    tube: Tube,
    half_volume: float,
    params: SolveParams,
    lam0: float | None = None,
) -> tuple[TriSurface, SolveReport]:
    """Minimize area at fixed enclosed volume for a single (upper) sheet.

    Interior vertices move freely; rim vertices slide on the tube.  The
    orthogonal contact condition is not imposed anywhere; SolveReport's
    contact-angle statistics record how well it emerges.  A mesh whose
    heights are already nonzero is taken as the starting guess (warm start);
    flat input gets a volume-matched paraboloid inflation.
    """
    if half_volume < 0.0:
        raise VolumeInfeasibleError("half_volume must be nonnegative")
    work = mesh.copy()
    if lam0 is None:
        lam0 = 0.0
        if half_volume > 0.0:
            r_eff = math.sqrt(work.area() / math.pi)
            lam0 = 2.0 * half_volume / (
                math.pi * r_eff**3 * (tube.delta + r_eff / 4.0)
            )
    if half_volume > 0.0 and float(np.max(np.abs(work.vertices[:, 2]))) < 1e-12:
        _inflate(work, half_volume)
    st = _SheetState(work, tube)
    states, lam, gnorm, area, vol, inner, outer, merit_log, ok = _al_minimize(
        [st], half_volume, params, lam0
    )
    out = states[0].mesh
    mean_angle, max_dev = measure_contact_angle(out, tube)
    report = SolveReport(
        lambda_hat=lam,
        area=area,
        volume=vol,
        grad_norm=gnorm,
        contact_angle_mean=mean_angle,
        contact_angle_max_dev=max_dev,
        iterations=inner,
        outer_iterations=outer,
        converged=ok,
        merit_log=merit_log,
    )
    return out, report


def solve_two_sheet(
    domain: PlanarDomain,
    tube: Tube,
    eps_total: float,
    params: SolveParams,
    perturb_amplitude: float = 0.0,
    perturb_which: str = "upper",
):
    """Two independent sheets under one shared total-volume constraint.

    The lower sheet is represented by its mirror image (an upper-type mesh),
    so the discrete functional is exactly reflection-equivariant; the
    reported asymmetry is max |z_upper(x) - z_mirror(x)| over shared samples.
    Used to test that symmetry emerges; the production path solves one sheet.
    """
    mesh_a = init_mesh(domain, tube, params.target_edge)
    _inflate(mesh_a, eps_total / 2.0)
    mesh_b = mesh_a.copy()
    if perturb_amplitude != 0.0:
        target = mesh_a if perturb_which == "upper" else mesh_b
        _bump(target, domain, perturb_amplitude)
    sa = _SheetState(mesh_a, tube)
    sb = _SheetState(mesh_b, tube)
    lam0 = _lambda_seed(domain, tube, eps_total)
    states, lam, gnorm, area, vol, inner, outer, merit_log, ok = _al_minimize(
        [sa, sb], eps_total, params, lam0
    )
    report = SolveReport(
        lambda_hat=lam,
        area=area,
        volume=vol,
        grad_norm=gnorm,
        contact_angle_mean=float("nan"),
        contact_angle_max_dev=float("nan"),
        iterations=inner,
        outer_iterations=outer,
        converged=ok,
        merit_log=merit_log,
    )
    return states[0].mesh, states[1].mesh, report


def transfer_solution(coarse: TriSurface, fine: TriSurface, tube: Tube) -> TriSurface:
    """Interpolate a converged coarse solution onto a finer flat mesh.

    Interior heights come from barycentric interpolation of the coarse graph;
    rim angles are interpolated along the contact line by wire parameter.
    """
    out = fine.copy()
    interior = ~out.boundary
    z = graph_height(coarse, out.vertices[interior, :2])
    if np.any(np.isnan(z)):
        src = coarse.vertices
        for i in np.flatnonzero(np.isnan(z)):
            p = out.vertices[interior][i, :2]
            j = int(np.argmin(np.sum((src[:, :2] - p) ** 2, axis=1)))
            z[i] = src[j, 2]
    out.vertices[interior, 2] = z
    loop_c = coarse.boundary_loop
    s_c = coarse.boundary_s[loop_c]
    a_c = coarse.boundary_angle[loop_c]
    order = np.argsort(s_c)
    s_sorted = s_c[order]
    a_sorted = a_c[order]
    L = tube.wire.L
    s_ext = np.concatenate([s_sorted, [s_sorted[0] + L]])
    a_ext = np.concatenate([a_sorted, [a_sorted[0]]])
    loop_f = out.boundary_loop
    s_f = out.boundary_s[loop_f]
    s_q = np.where(s_f < s_sorted[0], s_f + L, s_f)
    a_f = np.interp(s_q, s_ext, a_ext)
    out.boundary_angle[loop_f] = a_f
    out.vertices[loop_f] = tube_surface_point(tube, s_f, a_f)
    return out


def _bump(mesh: TriSurface, domain: PlanarDomain, amplitude: float) -> None:
    """Smooth interior perturbation vanishing at the rim, off-center so it
    breaks the rotational symmetry too."""
    c = domain.centroid()
    pts = mesh.vertices[:, :2]
    rmax = float(np.max(np.linalg.norm(domain.polyline - c, axis=1)))
    r = np.linalg.norm(pts - (c + 0.15 * rmax * np.array([1.0, 0.3])), axis=1)
    w = np.maximum(1.0 - (r / (0.7 * rmax)) ** 2, 0.0) ** 2
    w[mesh.boundary] = 0.0
    mesh.vertices[:, 2] += amplitude * w


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


def measure_contact_angle(mesh: TriSurface, tube: Tube) -> tuple[float, float]:
    """Dihedral angle between the sheet and the tube wall along the rim.

    For each rim vertex: the outward conormal (surface tangent, orthogonal to
    the contact line) against the tube's meridian tangent.  Orthogonal
    attachment gives pi/2 exactly; returns (mean, max |angle - pi/2|).
    """
    loop = mesh.boundary_loop
    if loop.size == 0:
        raise NoBoundaryError("mesh has no boundary")
    V = mesh.vertices
    nb = loop.size
    prev_pt = V[loop[np.arange(-1, nb - 1)]]
    next_pt = V[loop[(np.arange(nb) + 1) % nb]]
    line = next_pt - prev_pt
    line /= np.linalg.norm(line, axis=1)[:, None]
    normals = mk.vertex_normals(V, mesh.triangles)[loop]
    co = np.cross(normals, line)
    co /= np.linalg.norm(co, axis=1)[:, None]
    # orient outward: away from the interior neighbors
    ref = _interior_reference(mesh)
    outward = V[loop] - ref
    flip = np.einsum("ij,ij->i", co, outward) < 0.0
    co[flip] *= -1.0
    s_ring = mesh.boundary_s[loop]
    a_ring = mesh.boundary_angle[loop]
    _, t_a, _ = tube_tangent_basis(tube, s_ring, a_ring)
    t_a /= np.linalg.norm(t_a, axis=1)[:, None]
    ang = np.arccos(np.clip(np.einsum("ij,ij->i", co, t_a), -1.0, 1.0))
    dev = np.abs(ang - math.pi / 2.0)
    return float(np.mean(ang)), float(np.max(dev))


def _interior_reference(mesh: TriSurface):
    """For each rim vertex, the mean of its mesh neighbors (lies inward)."""
    loop = mesh.boundary_loop
    V, F = mesh.vertices, mesh.triangles
    acc = np.zeros((V.shape[0], 3))
    cnt = np.zeros(V.shape[0])
    for a, b in ((0, 1), (1, 2), (2, 0)):
        for p, q in ((a, b), (b, a)):
            np.add.at(acc, F[:, p], V[F[:, q]])
            np.add.at(cnt, F[:, p], 1.0)
    ref = acc / np.maximum(cnt, 1.0)[:, None]
    return ref[loop]


def estimate_lambda(mesh: TriSurface) -> float:
    """Area-weighted mean of |H| over interior vertices (cotangent formula).

    For the converged sheet this is the geometric estimate of the volume
    multiplier, to be compared against SolveReport.lambda_hat.
    """
    hvec, varea = mk.cotan_curvature(mesh.vertices, mesh.triangles)
    normals = mk.vertex_normals(mesh.vertices, mesh.triangles)
    hn = np.abs(np.einsum("ij,ij->i", hvec, normals))
    interior = ~mesh.boundary
    # one ring in from the rim: rim-adjacent vertices see a truncated stencil
    rim_adjacent = np.zeros(mesh.n_vertices, dtype=bool)
    F = mesh.triangles
    touch = np.isin(F, mesh.boundary_loop).any(axis=1)
    rim_adjacent[np.unique(F[touch])] = True
    use = interior & ~rim_adjacent
    if not np.any(use):
        use = interior
    w = varea[use]
    return float(np.sum(hn[use] * w) / np.sum(w))


def interior_curvature_stats(mesh: TriSurface) -> tuple[float, float]:
    """(mean, stddev) of |H| over well-supported interior vertices."""
    hvec, varea = mk.cotan_curvature(mesh.vertices, mesh.triangles)
    normals = mk.vertex_normals(mesh.vertices, mesh.triangles)
    hn = np.abs(np.einsum("ij,ij->i", hvec, normals))
    interior = ~mesh.boundary
    rim_adjacent = np.zeros(mesh.n_vertices, dtype=bool)
    F = mesh.triangles
    touch = np.isin(F, mesh.boundary_loop).any(axis=1)
    rim_adjacent[np.unique(F[touch])] = True
    use = interior & ~rim_adjacent
    if not np.any(use):
        use = interior
    w = varea[use]
    mean = float(np.sum(hn[use] * w) / np.sum(w))
    var = float(np.sum(w * (hn[use] - mean) ** 2) / np.sum(w))
    return mean, math.sqrt(var)


def graph_height(mesh: TriSurface, pts) -> np.ndarray:
    """Interpolated height of the graph surface at planar points.

    Barycentric interpolation over the projected triangulation; NaN for
    points outside the footprint.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    V, F = mesh.vertices, mesh.triangles
    a = V[F[:, 0], :2]
    b = V[F[:, 1], :2]
    c = V[F[:, 2], :2]
    za, zb, zc = V[F[:, 0], 2], V[F[:, 1], 2], V[F[:, 2], 2]
    det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (
        b[:, 1] - a[:, 1]
    )
    out = np.full(pts.shape[0], np.nan)
    chunk = 256
    for i0 in range(0, pts.shape[0], chunk):
        P = pts[i0 : i0 + chunk]
        px = P[:, 0][:, None]
        py = P[:, 1][:, None]
        w1 = ((b[:, 0] - px) * (c[:, 1] - py) - (c[:, 0] - px) * (b[:, 1] - py)) / det
        w2 = ((c[:, 0] - px) * (a[:, 1] - py) - (a[:, 0] - px) * (c[:, 1] - py)) / det
        w3 = 1.0 - w1 - w2
        tol = -1e-10
        inside = (w1 >= tol) & (w2 >= tol) & (w3 >= tol)
        hit = np.argmax(inside, axis=1)
        ok = inside[np.arange(P.shape[0]), hit]
        z = (
            w1[np.arange(P.shape[0]), hit] * za[hit]
            + w2[np.arange(P.shape[0]), hit] * zb[hit]
            + w3[np.arange(P.shape[0]), hit] * zc[hit]
        )
        out[i0 : i0 + chunk] = np.where(ok, z, np.nan)
    return out
