import numpy as np
import pytest

from capfilm.errors import DomainError
from capfilm.geometry import CircleWire, PlanarDomain, Tube, inner_offset_domain
from capfilm.meshing import init_mesh
from capfilm.spanning import quasi_random_in_domain, spanning_check, vertical_line_hits


@pytest.fixture(scope="module")
def setup():
    tube = Tube(CircleWire(1.0), 0.1)
    dom = inner_offset_domain(tube)
    mesh = init_mesh(dom, tube, 0.05)
    return tube, dom, mesh


def test_flat_disc_spans_its_own_footprint(setup):
    _, _, mesh = setup
    rim = PlanarDomain(polyline=mesh.vertices[mesh.boundary_loop][:, :2])
    assert spanning_check(mesh, rim, 1000)


def test_hole_breaks_spanning(setup):
    _, _, mesh = setup
    rim = PlanarDomain(polyline=mesh.vertices[mesh.boundary_loop][:, :2])
    centers = mesh.vertices[mesh.triangles].mean(axis=1)
    keep = np.hypot(centers[:, 0], centers[:, 1]) > 0.2
    holed = mesh.copy()
    holed.triangles = mesh.triangles[keep]
    assert not spanning_check(holed, rim, 1000)


def test_monotone_under_triangle_removal(setup):
    _, _, mesh = setup
    rim = PlanarDomain(polyline=mesh.vertices[mesh.boundary_loop][:, :2])
    pts = quasi_random_in_domain(rim, 500)
    rng = np.random.default_rng(4)
    hits_full = vertical_line_hits(mesh, pts)
    for frac in (0.9, 0.6, 0.3):
        keep = rng.random(mesh.n_triangles) < frac
        sub = mesh.copy()
        sub.triangles = mesh.triangles[keep]
        hits_sub = vertical_line_hits(sub, pts)
        assert not np.any(hits_sub & ~hits_full)


def test_sample_count_guard(setup):
    _, dom, mesh = setup
    with pytest.raises(DomainError):
        spanning_check(mesh, dom, 50)


def test_quasi_random_points_inside(setup):
    _, dom, _ = setup
    pts = quasi_random_in_domain(dom, 750)
    assert pts.shape == (750, 2)
    assert np.all(dom.contains(pts))
