import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capfilm.caps import cap_for_volume
from capfilm.errors import DomainError, IncompatibleRecordsError, InsufficientTailError
from capfilm.foliation import (
    FoliationRecord,
    check_convergence_to_disc,
    check_ordering,
    compute_Pi,
    sweep,
)
from capfilm.geometry import CircleWire, Tube


@pytest.fixture(scope="module")
def tube():
    return Tube(CircleWire(1.0), 0.1)


@pytest.fixture(scope="module")
def cap_records(tube):
    recs = []
    for eps in np.geomspace(1e-4, 5e-2, 8):
        cap = cap_for_volume(0.1, float(eps))
        recs.append(
            FoliationRecord(
                eps=float(eps),
                lam=cap.lam,
                sup_height=cap.apex_height,
                domain_area=math.pi * cap.contact_radius**2,
                solver_kind="cap",
                solution=cap,
            )
        )
    return recs


class TestPi:
    def test_reference_values(self):
        assert compute_Pi(3, 1.0) == pytest.approx(32 / math.pi, rel=1e-14)
        assert compute_Pi(3, 0.9) == pytest.approx((2 / math.pi) * (2 / 0.9) ** 4, rel=1e-14)
        assert compute_Pi(3, 0.9) == pytest.approx(15.5249, abs=1e-3)

    @given(st.floats(0.05, 5.0))
    @settings(max_examples=60, deadline=None)
    def test_homogeneity(self, r):
        assert compute_Pi(3, 2 * r) == pytest.approx(compute_Pi(3, r) / 16.0, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            compute_Pi(2, 1.0)
        with pytest.raises(DomainError):
            compute_Pi(3, 0.0)


def test_record_invariants():
    with pytest.raises(DomainError):
        FoliationRecord(eps=0.01, lam=-1.0, sup_height=0.1, domain_area=1.0,
                        solver_kind="cap", solution=None)
    with pytest.raises(DomainError):
        FoliationRecord(eps=-0.01, lam=1.0, sup_height=0.1, domain_area=1.0,
                        solver_kind="cap", solution=None)


class TestSweep:
    def test_cap_sweep_all_true(self, tube):
        rep = sweep(tube, np.geomspace(1e-4, 5e-2, 8), solver="cap")
        assert rep.ordering_ok is True
        assert rep.symmetry_ok is True
        assert rep.curvature_bound_ok is True
        assert rep.convergence_ok is True
        assert rep.all_ok()

    def test_ode_sweep(self, tube):
        rep = sweep(tube, np.geomspace(1e-3, 5e-2, 4), solver="ode")
        assert rep.ordering_ok is True
        assert rep.curvature_bound_ok is True

    def test_single_point_markers(self, tube):
        rep = sweep(tube, [0.01], solver="cap")
        assert rep.ordering_ok is True
        assert rep.convergence_ok is None
        assert "insufficient" in rep.details["convergence_note"]

    def test_parallel_matches_serial(self, tube):
        grid = np.geomspace(1e-3, 3e-2, 4)
        a = sweep(tube, grid, solver="cap", jobs=1).as_dict()
        b = sweep(tube, grid, solver="cap", jobs=3).as_dict()
        assert a == b

    def test_failed_record_voids_only_its_checks(self, tube):
        from capfilm.caps import eps_max

        grid = [1e-3, 1e-2, eps_max(0.1) * 2.0]
        rep = sweep(tube, grid, solver="cap")
        assert len(rep.records) == 2
        assert rep.details["failures"]
        assert rep.ordering_ok is True

    def test_rejects_unsorted_grid(self, tube):
        with pytest.raises(DomainError):
            sweep(tube, [1e-2, 1e-3], solver="cap")

    def test_mesh_backend_end_to_end(self, tube):
        from capfilm.solver import SolveParams

        rep = sweep(
            tube,
            [5e-3, 2e-2],
            solver="mesh",
            params=SolveParams(target_edge=0.05, tol=1e-5),
            symmetry_target_edge=0.05,
        )
        assert rep.ordering_ok is True
        assert rep.symmetry_ok is True
        assert rep.curvature_bound_ok is True
        assert rep.details["max_asymmetry"] <= 5 * 0.05**2


class TestOrdering:
    def test_exact_nesting(self, cap_records):
        ok, witnesses = check_ordering(cap_records)
        assert ok and not witnesses

    def test_sort_invariance(self, cap_records):
        ok, _ = check_ordering(list(reversed(cap_records)))
        assert ok

    def test_fault_injection(self, cap_records):
        bad = list(cap_records)
        bad[3] = FoliationRecord(
            eps=bad[3].eps,
            lam=bad[7].lam * 2.0,
            sup_height=bad[3].sup_height,
            domain_area=bad[3].domain_area,
            solver_kind="cap",
            solution=bad[3].solution,
        )
        ok, witnesses = check_ordering(bad)
        assert not ok
        assert any(w["kind"] == "lambda" for w in witnesses)

    def test_needs_two_records(self, cap_records):
        with pytest.raises(IncompatibleRecordsError):
            check_ordering(cap_records[:1])

    def test_validators_are_pure(self, cap_records):
        r1 = check_ordering(cap_records)
        r2 = check_ordering(cap_records)
        assert r1 == r2


class TestConvergence:
    def test_cap_tail(self, tube):
        recs = []
        for eps in (1e-5, 1e-4, 1e-3, 1e-2):
            cap = cap_for_volume(0.1, eps)
            recs.append(
                FoliationRecord(
                    eps=eps,
                    lam=cap.lam,
                    sup_height=cap.apex_height,
                    domain_area=math.pi * cap.contact_radius**2,
                    solver_kind="cap",
                    solution=cap,
                )
            )
        ok, details = check_convergence_to_disc(recs, tube, compute_Pi(3, 0.9))
        assert ok
        assert details["monotone_hausdorff"]
        assert 0.9 < details["lambda_exponent"] < 1.1  # reported, near-linear
        assert details["below_Pi"]

    def test_constant_lambda_fault(self, tube):
        recs = []
        for eps in (1e-5, 1e-4, 1e-3, 1e-2):
            cap = cap_for_volume(0.1, 1e-3)
            recs.append(
                FoliationRecord(
                    eps=eps,
                    lam=cap.lam,
                    sup_height=cap.apex_height,
                    domain_area=math.pi * cap.contact_radius**2,
                    solver_kind="cap",
                    solution=cap,
                )
            )
        ok, _ = check_convergence_to_disc(recs, tube, compute_Pi(3, 0.9))
        assert not ok

    def test_insufficient_tail(self, tube, cap_records):
        with pytest.raises(InsufficientTailError):
            check_convergence_to_disc(cap_records[:3], tube)


def test_leaf_disjointness(cap_records):
    # consecutive leaves keep a positive 3D separation over their overlap
    rng = np.random.default_rng(0)
    for lo, hi in zip(cap_records, cap_records[1:]):
        r = lo.solution.contact_radius * np.sqrt(rng.random(10000))
        z_lo = lo.solution.profile_height(r)
        # distance from points of the lower leaf to the upper sphere's cap
        d_sphere = np.abs(
            np.hypot(r, z_lo - hi.solution.z_c) - hi.solution.radius
        )
        assert np.min(d_sphere) > 0.0
