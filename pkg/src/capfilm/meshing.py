"""Triangulated graph surfaces with their contact ring pinned to the tube.

The mesh is a topological disc: one boundary loop whose vertices carry tube
coordinates (s, angle) and sit exactly on the tube surface.  Construction is
ring-based (scaled copies of the boundary polyline zipped together), which
keeps quality well above the 0.05 floor for the near-circular footprints this
solver targets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _mesh_kernels as mk
from .errors import DomainError, MeshingFailedError
from .geometry import PlanarDomain, Tube, inner_offset_domain, tube_surface_point

__all__ = [
    "TriSurface",
    "init_mesh",
    "sample_cap_mesh",
    "remesh",
    "write_obj",
    "read_obj",
]

QUALITY_FLOOR = 0.05


@dataclass
class TriSurface:
    """Oriented manifold triangle mesh with one boundary loop on the tube."""

    vertices: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int64, CCW seen from +x3 for the flat disc
    boundary: np.ndarray  # (n,) bool
    boundary_loop: np.ndarray  # boundary vertex indices in ring order
    boundary_s: np.ndarray  # (n,) wire parameter, NaN for interior
    boundary_angle: np.ndarray  # (n,) tube latitude, NaN for interior

    def copy(self) -> "TriSurface":
        return TriSurface(
            self.vertices.copy(),
            self.triangles.copy(),
            self.boundary.copy(),
            self.boundary_loop.copy(),
            self.boundary_s.copy(),
            self.boundary_angle.copy(),
        )

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def area(self) -> float:
        return float(np.sum(mk.triangle_areas(self.vertices, self.triangles)))

    def min_quality(self) -> float:
        return float(np.min(mk.triangle_quality(self.vertices, self.triangles)))

    def edge_incidence(self):
        """Map undirected edge -> list of incident triangle indices."""
        tri = self.triangles
        edges = {}
        for t in range(tri.shape[0]):
            for a, b in ((0, 1), (1, 2), (2, 0)):
                key = (min(tri[t, a], tri[t, b]), max(tri[t, a], tri[t, b]))
                edges.setdefault(key, []).append(t)
        return edges

    def validate(self, tube: Tube | None = None, tol: float = 1e-9) -> None:
        """Manifold-with-boundary checks plus the tube pin of the contact ring."""
        edges = self.edge_incidence()
        counts = np.array([len(v) for v in edges.values()])
        if np.any(counts > 2):
            raise DomainError("non-manifold edge (more than two incident triangles)")
        boundary_edges = {e for e, ts in edges.items() if len(ts) == 1}
        loop_set = set()
        for e in boundary_edges:
            loop_set.update(e)
        if loop_set != set(np.flatnonzero(self.boundary)):
            raise DomainError("boundary flags inconsistent with boundary edges")
        # each directed edge appears once across oriented triangles
        directed = set()
        tri = self.triangles
        for t in range(tri.shape[0]):
            for a, b in ((0, 1), (1, 2), (2, 0)):
                key = (tri[t, a], tri[t, b])
                if key in directed:
                    raise DomainError("inconsistent orientation")
                directed.add(key)
        if tube is not None:
            idx = self.boundary_loop
            p = self.vertices[idx]
            d_axis = np.hypot(
                np.linalg.norm(
                    p[:, :2] - tube.wire.point(self.boundary_s[idx]), axis=1
                ),
                p[:, 2],
            )
            if np.max(np.abs(d_axis - tube.delta)) > tol:
                raise DomainError("boundary vertex off the tube surface")


def _zip_rings(inner: np.ndarray, outer: np.ndarray) -> list[tuple[int, int, int]]:
    """Triangle strip between two concentric vertex rings (index arrays).

    Walks both rings by normalized position, always advancing the pointer
    whose next node comes first; produces CCW triangles for CCW rings with
    the outer ring enclosing the inner one.
    """
    ni, no = len(inner), len(outer)
    tris = []
    i = j = 0
    while i < ni or j < no:
        ui = (i + 1) / ni if i < ni else 2.0
        uj = (j + 1) / no if j < no else 2.0
        if ui <= uj:
            tris.append((inner[i % ni], outer[j % no], inner[(i + 1) % ni]))
            i += 1
        else:
            tris.append((inner[i % ni], outer[j % no], outer[(j + 1) % no]))
            j += 1
    return tris


def init_mesh(domain: PlanarDomain, tube: Tube, target_edge: float) -> TriSurface:
    """Flat triangulation of the footprint with its rim snapped to the tube's
    inner equator (angle = 0).

    target_edge must not exceed delta/2 so the contact ring can resolve the
    tube curvature.
    """
    if target_edge > tube.delta / 2.0 + 1e-12:
        raise DomainError("target_edge must be at most delta/2")
    if target_edge <= 0.0:
        raise DomainError("target_edge must be positive")
    n_b = max(12, int(round(domain.perimeter / target_edge)))
    ring_outer = inner_offset_domain(tube, n_points=n_b)
    center = ring_outer.centroid()
    radii = np.linalg.norm(ring_outer.polyline - center, axis=1)
    m = max(2, int(round(float(np.mean(radii)) / target_edge)))

    verts = [center.tolist() + [0.0]]
    svals = [np.nan]
    avals = [np.nan]
    rings: list[np.ndarray] = []
    for k in range(1, m + 1):
        frac = k / m
        n_k = n_b if k == m else max(8, int(round(n_b * frac)))
        ring_dom = ring_outer if n_k == n_b else inner_offset_domain(tube, n_points=n_k)
        pts = center + frac * (ring_dom.polyline - center)
        start = len(verts)
        for p_idx in range(n_k):
            verts.append([pts[p_idx, 0], pts[p_idx, 1], 0.0])
            if k == m:
                svals.append(float(ring_dom.params[p_idx]))
                avals.append(0.0)
            else:
                svals.append(np.nan)
                avals.append(np.nan)
        rings.append(np.arange(start, start + n_k))

    tris: list[tuple[int, int, int]] = []
    first = rings[0]
    for i in range(len(first)):
        tris.append((0, first[i], first[(i + 1) % len(first)]))
    for k in range(len(rings) - 1):
        tris.extend(_zip_rings(rings[k], rings[k + 1]))

    V = np.array(verts, dtype=float)
    F = np.array(tris, dtype=np.int64)
    # enforce upward orientation
    a, b, c = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    cr2 = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (
        b[:, 1] - a[:, 1]
    )
    flip = cr2 < 0.0
    F[flip] = F[flip][:, [0, 2, 1]]

    n = V.shape[0]
    boundary = np.zeros(n, dtype=bool)
    boundary[rings[-1]] = True
    mesh = TriSurface(
        vertices=V,
        triangles=F,
        boundary=boundary,
        boundary_loop=rings[-1].copy(),
        boundary_s=np.array(svals),
        boundary_angle=np.array(avals),
    )
    smooth_tangential(mesh, rounds=30)
    # pin the rim exactly onto the tube (angle = 0 <=> the offset curve itself)
    idx = mesh.boundary_loop
    mesh.vertices[idx] = tube_surface_point(
        tube, mesh.boundary_s[idx], mesh.boundary_angle[idx]
    )
    if mesh.min_quality() <= QUALITY_FLOOR:
        raise MeshingFailedError(
            "initial mesh below quality floor", min_quality=mesh.min_quality()
        )
    mesh.validate(tube)
    return mesh


def smooth_tangential(mesh: TriSurface, rounds: int = 5, step: float = 0.5) -> None:
    """Relax interior vertices toward their neighbor centroid, tangentially.

    The normal component of each move is removed, so the surface shape is
    preserved to second order while triangle shapes equalize.  Boundary
    vertices never move.  Used at construction (where the mesh is flat and
    the move is purely planar) and inside remeshing passes.
    """
    V = mesh.vertices
    F = mesh.triangles
    n = V.shape[0]
    interior = ~mesh.boundary
    for _ in range(rounds):
        acc = np.zeros_like(V)
        cnt = np.zeros(n)
        for a, b in ((0, 1), (1, 2), (2, 0)):
            for p, q in ((a, b), (b, a)):
                np.add.at(acc, F[:, p], V[F[:, q]])
                np.add.at(cnt, F[:, p], 1.0)
        centroid = acc / np.maximum(cnt, 1.0)[:, None]
        move = centroid - V
        normals = mk.vertex_normals(V, F)
        move -= np.einsum("ij,ij->i", move, normals)[:, None] * normals
        V[interior] += step * move[interior]


def sample_cap_mesh(cap, tube: Tube, target_edge: float) -> TriSurface:
    """TriSurface sampled analytically from a CapSolution (circle wire).

    Same ring layout as init_mesh but over the cap's own footprint, with rim
    vertices at the contact latitude and interior heights on the sphere.
    """
    from .caps import cap_profile_height

    r_c = cap.contact_radius
    n_b = max(12, int(round(2.0 * np.pi * r_c / target_edge)))
    m = max(2, int(round(r_c / target_edge)))
    verts = [[0.0, 0.0, cap.apex_height]]
    svals = [np.nan]
    avals = [np.nan]
    rings: list[np.ndarray] = []
    for k in range(1, m + 1):
        n_k = n_b if k == m else max(8, int(round(n_b * k / m)))
        phi = np.linspace(0.0, 2.0 * np.pi, n_k, endpoint=False)
        r = r_c * k / m
        z = float(cap_profile_height(cap, r))
        start = len(verts)
        for p in range(n_k):
            verts.append([r * np.cos(phi[p]), r * np.sin(phi[p]), z])
            svals.append(float(phi[p]) if k == m else np.nan)
            avals.append(cap.theta if k == m else np.nan)
        rings.append(np.arange(start, start + n_k))
    tris: list[tuple[int, int, int]] = []
    first = rings[0]
    for i in range(len(first)):
        tris.append((0, first[i], first[(i + 1) % len(first)]))
    for k in range(len(rings) - 1):
        tris.extend(_zip_rings(rings[k], rings[k + 1]))
    V = np.array(verts, dtype=float)
    F = np.array(tris, dtype=np.int64)
    n = V.shape[0]
    boundary = np.zeros(n, dtype=bool)
    boundary[rings[-1]] = True
    return TriSurface(
        vertices=V,
        triangles=F,
        boundary=boundary,
        boundary_loop=rings[-1].copy(),
        boundary_s=np.array(svals),
        boundary_angle=np.array(avals),
    )


# ---------------------------------------------------------------------------
# remeshing: split long / collapse short edges toward the target length
# ---------------------------------------------------------------------------


def _rebuild(mesh: TriSurface, V, F, boundary, b_s, b_a) -> TriSurface:
    keep = np.zeros(V.shape[0], dtype=bool)
    keep[F.ravel()] = True
    remap = -np.ones(V.shape[0], dtype=np.int64)
    remap[keep] = np.arange(int(np.sum(keep)))
    V2 = V[keep]
    F2 = remap[F]
    boundary2 = boundary[keep]
    edges = {}
    for t in range(F2.shape[0]):
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key = (min(F2[t, a], F2[t, b]), max(F2[t, a], F2[t, b]))
            edges[key] = edges.get(key, 0) + 1
    nxt = {}
    for t in range(F2.shape[0]):
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key = (min(F2[t, a], F2[t, b]), max(F2[t, a], F2[t, b]))
            if edges[key] == 1:
                nxt[F2[t, a]] = F2[t, b]
    if not nxt:
        raise MeshingFailedError("remesh lost the boundary loop")
    start = next(iter(nxt))
    loop = [start]
    cur = nxt[start]
    while cur != start:
        loop.append(cur)
        cur = nxt[cur]
        if len(loop) > V2.shape[0]:
            raise MeshingFailedError("boundary loop did not close")
    return TriSurface(
        vertices=V2,
        triangles=F2,
        boundary=boundary2,
        boundary_loop=np.array(loop, dtype=np.int64),
        boundary_s=b_s[keep],
        boundary_angle=b_a[keep],
    )


def remesh(mesh: TriSurface, tube: Tube, target_edge: float) -> tuple[TriSurface, int]:
    """One split/collapse pass toward target_edge.

    Splits edges longer than 1.6*target, collapses interior edges shorter
    than 0.5*target (thresholds wide enough not to churn the structured
    rings, whose diagonals sit near 1.45*target).  A collapse keeps the endpoint farther from the boundary
    (boundary vertices always survive) and is skipped if it would flip or
    squash any incident triangle.  Returns (mesh, number of operations).
    """
    V = mesh.vertices.copy()
    F = mesh.triangles.copy()
    boundary = mesh.boundary.copy()
    b_s = mesh.boundary_s.copy()
    b_a = mesh.boundary_angle.copy()
    n_ops = 0

    # --- splits
    edges = {}
    for t in range(F.shape[0]):
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key = (min(F[t, a], F[t, b]), max(F[t, a], F[t, b]))
            edges.setdefault(key, []).append(t)
    long_edges = [
        e
        for e in edges
        if np.linalg.norm(V[e[0]] - V[e[1]]) > 1.6 * target_edge
    ]
    dead = np.zeros(F.shape[0], dtype=bool)
    new_tris = []
    newV = [V]
    newb = [boundary]
    news = [b_s]
    newa = [b_a]
    next_idx = V.shape[0]
    for e in long_edges:
        ts = [t for t in edges[e] if not dead[t]]
        if len(ts) != len(edges[e]):
            continue  # neighbor already modified this pass
        u, w = e
        on_boundary = boundary[u] and boundary[w] and len(ts) == 1
        if on_boundary:
            s_u, s_w = b_s[u], b_s[w]
            L = tube.wire.L
            ds = (s_w - s_u) % L
            if ds > L / 2:
                ds -= L
            s_mid = (s_u + 0.5 * ds) % L
            a_mid = 0.5 * (b_a[u] + b_a[w])
            pos = tube_surface_point(tube, s_mid, a_mid)
        else:
            s_mid, a_mid = np.nan, np.nan
            pos = 0.5 * (V[u] + V[w])
        newV.append(pos.reshape(1, 3))
        newb.append(np.array([on_boundary]))
        news.append(np.array([s_mid]))
        newa.append(np.array([a_mid]))
        mid = next_idx
        next_idx += 1
        for t in ts:
            tri = F[t]
            dead[t] = True
            k = [v for v in tri if v != u and v != w][0]
            # preserve orientation: replace each endpoint by mid in turn
            t1 = [mid if v == w else v for v in tri]
            t2 = [mid if v == u else v for v in tri]
            new_tris.append(t1)
            new_tris.append(t2)
        n_ops += 1
    V = np.vstack(newV)
    boundary = np.concatenate(newb)
    b_s = np.concatenate(news)
    b_a = np.concatenate(newa)
    if new_tris:
        F = np.vstack([F[~dead], np.array(new_tris, dtype=np.int64)])

    # --- collapses (interior or interior-boundary edges only)
    mesh2 = _rebuild(mesh, V, F, boundary, b_s, b_a)
    for _ in range(200):
        res = _collapse_one(mesh2, target_edge)
        if res is None:
            break
        mesh2 = res
        n_ops += 1
    if n_ops:
        smooth_tangential(mesh2, rounds=4)
    return mesh2, n_ops


def _collapse_one(mesh: TriSurface, target_edge: float) -> TriSurface | None:
    """Collapse the first admissible short edge; None when there is none."""
    V, F = mesh.vertices, mesh.triangles
    boundary = mesh.boundary
    b_dist = _distance_to_boundary(V, boundary)
    edges = mesh.edge_incidence()
    vert_tris: dict[int, set] = {}
    for t in range(F.shape[0]):
        for v in F[t]:
            vert_tris.setdefault(int(v), set()).add(t)
    for (u, w), ts in edges.items():
        if np.linalg.norm(V[u] - V[w]) >= 0.5 * target_edge:
            continue
        if boundary[u] and boundary[w]:
            continue  # boundary resolution is fixed at construction
        # keep the endpoint farther from the boundary; boundary always wins
        if boundary[u]:
            keep, drop = u, w
        elif boundary[w]:
            keep, drop = w, u
        elif b_dist[u] >= b_dist[w]:
            keep, drop = u, w
        else:
            keep, drop = w, u
        # link condition: shared neighbors must be exactly the edge opposites
        nb_u = set(F[list(vert_tris[u])].ravel()) - {u}
        nb_w = set(F[list(vert_tris[w])].ravel()) - {w}
        opp = set()
        for t in ts:
            opp.update(int(v) for v in F[t] if v != u and v != w)
        if (nb_u & nb_w) != opp:
            continue
        affected = (vert_tris[keep] | vert_tris[drop]) - set(ts)
        cand = []
        ok = True
        for t in affected:
            tri = [keep if int(v) == drop else int(v) for v in F[t]]
            if len(set(tri)) < 3:
                ok = False
                break
            cand.append(tri)
        if not ok:
            continue
        q = mk.triangle_quality(V, np.array(cand, dtype=np.int64))
        if np.min(q) <= QUALITY_FLOOR:
            continue
        Fw = F.copy()
        for t in affected:
            Fw[t] = [keep if int(v) == drop else int(v) for v in Fw[t]]
        mask = np.ones(Fw.shape[0], dtype=bool)
        for t in ts:
            mask[t] = False
        return _rebuild(
            mesh, V, Fw[mask], boundary, mesh.boundary_s, mesh.boundary_angle
        )
    return None


def _distance_to_boundary(V, boundary):
    bpts = V[boundary]
    if bpts.shape[0] == 0:
        return np.zeros(V.shape[0])
    d = np.full(V.shape[0], np.inf)
    chunk = 2048
    for i in range(0, V.shape[0], chunk):
        diff = V[i : i + chunk, None, :] - bpts[None, :, :]
        d[i : i + chunk] = np.min(np.linalg.norm(diff, axis=2), axis=1)
    return d


# ---------------------------------------------------------------------------
# OBJ I/O (x3 up)
# ---------------------------------------------------------------------------


def write_obj(mesh: TriSurface, path) -> None:
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}")
    for f in mesh.triangles:
        lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    from .io_utils import atomic_write_text

    atomic_write_text(path, "\n".join(lines) + "\n")


def read_obj(path):
    verts = []
    faces = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return np.array(verts, dtype=float), np.array(faces, dtype=np.int64)
