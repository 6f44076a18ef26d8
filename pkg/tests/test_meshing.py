import math

import numpy as np
import pytest

from capfilm.caps import cap_from_angle
from capfilm.errors import DomainError
from capfilm.geometry import CircleWire, EllipseWire, Tube, inner_offset_domain
from capfilm.meshing import (
    init_mesh,
    read_obj,
    remesh,
    sample_cap_mesh,
    smooth_tangential,
    write_obj,
)
from capfilm import _mesh_kernels as mk


@pytest.fixture(scope="module")
def circle_setup():
    tube = Tube(CircleWire(1.0), 0.1)
    return tube, inner_offset_domain(tube)


def test_flat_disc_area(circle_setup):
    tube, dom = circle_setup
    mesh = init_mesh(dom, tube, 0.05)
    assert abs(mesh.area() - math.pi * 0.81) < 2e-3
    assert mesh.min_quality() > 0.05
    mesh.validate(tube)


def test_boundary_count_matches_polyline(circle_setup):
    tube, dom = circle_setup
    mesh = init_mesh(dom, tube, 0.05)
    n_b = max(12, round(dom.perimeter / 0.05))
    assert int(np.sum(mesh.boundary)) == n_b
    assert mesh.boundary_loop.size == n_b


def test_ellipse_area_matches_domain():
    tube = Tube(EllipseWire(1.3, 0.8), 0.05)
    dom = inner_offset_domain(tube)
    mesh = init_mesh(dom, tube, 0.025)
    assert abs(mesh.area() - dom.area) / dom.area < 5e-3
    mesh.validate(tube)


def test_target_edge_guard(circle_setup):
    tube, dom = circle_setup
    with pytest.raises(DomainError):
        init_mesh(dom, tube, 0.06)  # above delta/2


def test_remesh_preserves_validity(circle_setup):
    tube, dom = circle_setup
    mesh = init_mesh(dom, tube, 0.05)
    rng = np.random.default_rng(0)
    interior = ~mesh.boundary
    mesh.vertices[interior] += 0.004 * rng.standard_normal((int(interior.sum()), 3))
    out, ops = remesh(mesh, tube, 0.05)
    out.validate(tube)
    assert out.min_quality() > 0.05


def test_remesh_refines_long_edges(circle_setup):
    tube, dom = circle_setup
    mesh = init_mesh(dom, tube, 0.05)
    out, ops = remesh(mesh, tube, 0.03)  # force splits toward a finer target
    assert ops > 0
    assert out.n_vertices > mesh.n_vertices
    out.validate(tube)


def test_smoothing_keeps_boundary(circle_setup):
    tube, dom = circle_setup
    mesh = init_mesh(dom, tube, 0.05)
    before = mesh.vertices[mesh.boundary_loop].copy()
    smooth_tangential(mesh, rounds=3)
    assert np.array_equal(before, mesh.vertices[mesh.boundary_loop])


def test_cap_sampling(circle_setup):
    tube, _ = circle_setup
    cap = cap_from_angle(0.1, 0.4)
    mesh = sample_cap_mesh(cap, tube, cap.radius / 30)
    mesh.validate(tube)
    r = np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1])
    on_sphere = np.abs(np.hypot(r, mesh.vertices[:, 2] - cap.z_c) - cap.radius)
    assert np.max(on_sphere) < 1e-12


def test_obj_roundtrip(tmp_path, circle_setup):
    tube, dom = circle_setup
    mesh = init_mesh(dom, tube, 0.05)
    path = tmp_path / "m.obj"
    write_obj(mesh, path)
    V, F = read_obj(path)
    assert np.allclose(V, mesh.vertices)
    assert np.array_equal(F, mesh.triangles)


def test_vertex_areas_sum_to_area(circle_setup):
    tube, dom = circle_setup
    mesh = init_mesh(dom, tube, 0.05)
    va = mk.vertex_areas(mesh.vertices, mesh.triangles)
    assert np.sum(va) == pytest.approx(mesh.area(), rel=1e-12)
