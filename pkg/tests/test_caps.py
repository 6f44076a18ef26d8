import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from capfilm.caps import (
    cap_for_volume,
    cap_from_angle,
    cap_profile_height,
    cap_table,
    cap_volume,
    discrepancy_records,
    eps_max,
    printed_center_height,
    printed_volume_identity,
)
from capfilm.errors import DomainError, VolumeTooLargeError
from capfilm.foliation import compute_Pi

from oracles import mc_cap_volume, meridian_intersection_angle

# frozen stratified Monte Carlo values, 1e8 samples (oracles.mc_cap_volume)
MC_FROZEN = {
    (0.0, 0.3, 123): (0.47843693397799564, 3.88e-05),
    (0.1, 0.3, 456): (0.5049195089259532, 3.18e-05),
}


def test_hemisphere_limit():
    theta = math.pi / 2 - 1e-9
    cap = cap_from_angle(0.0, theta)
    assert cap.radius == pytest.approx(1.0, abs=1e-8)
    assert cap.z_c == pytest.approx(0.0, abs=1e-8)
    assert cap.volume / 2 == pytest.approx(2 * math.pi / 3, abs=1e-6)


def test_reference_values():
    cap = cap_from_angle(0.1, 0.2)
    assert cap.radius == pytest.approx((1 - 0.1 * math.cos(0.2)) / math.sin(0.2), rel=1e-15)
    assert cap.z_c == pytest.approx((0.1 - math.cos(0.2)) / math.sin(0.2), rel=1e-15)
    assert cap.apex_height == pytest.approx(1.1 * math.tan(0.1), rel=1e-14)
    assert cap.lam == pytest.approx(2 * cap.kappa, rel=1e-15)


@given(
    st.floats(1e-3, 0.3),
    st.floats(1e-3, math.pi / 2 - 1e-3),
)
@settings(max_examples=200, deadline=None)
def test_orthogonality_residual(delta, theta):
    cap = cap_from_angle(delta, theta)
    residual = -math.cos(theta) * cap.contact_radius + math.sin(theta) * (
        delta * math.sin(theta) - cap.z_c
    )
    assert abs(residual) < 1e-12
    # apex identity is an algebraic consequence of the same relations
    assert abs(cap.apex_height - (1 + delta) * math.tan(theta / 2)) < 1e-12


def test_meridian_meeting_angle_oracle():
    worst = 0.0
    for d in np.linspace(0.01, 0.3, 50):
        for th in np.linspace(0.02, math.pi / 2 - 0.02, 50):
            cap = cap_from_angle(float(d), float(th))
            ang = meridian_intersection_angle(float(d), cap.z_c, cap.radius)
            worst = max(worst, abs(ang - math.pi / 2))
    assert worst < 1e-9


def test_domain_errors():
    with pytest.raises(DomainError):
        cap_from_angle(0.1, 0.0)
    with pytest.raises(DomainError):
        cap_from_angle(0.1, math.pi / 2)
    with pytest.raises(DomainError):
        cap_from_angle(1.2, 0.3)


class TestVolume:
    def test_against_frozen_monte_carlo(self):
        for (delta, theta, _seed), (val, se) in MC_FROZEN.items():
            assert abs(cap_volume(delta, theta) - val) <= 3 * se

    def test_live_monte_carlo_small(self):
        v, se = mc_cap_volume(0.1, 0.3, n=10**6, seed=9)
        assert abs(cap_volume(0.1, 0.3) - v) <= 3 * se

    def test_against_quadrature_assembly(self):
        # independent route: the two cross-section integrals by quadrature
        for delta, theta in [(0.1, 0.3), (0.05, 0.7), (0.2, 1.1)]:
            cap = cap_from_angle(delta, theta)
            zs = cap.contact_height

            def wall(z):
                return math.pi * (1 - math.sqrt(delta**2 - z * z)) ** 2

            def sphere(z):
                return math.pi * (cap.radius**2 - (z - cap.z_c) ** 2)

            v1, _ = quad(wall, 0, zs, epsabs=1e-13, epsrel=1e-13)
            v2, _ = quad(sphere, zs, cap.apex_height, epsabs=1e-13, epsrel=1e-13)
            assert cap_volume(delta, theta) == pytest.approx(2 * (v1 + v2), abs=1e-12)

    def test_monotone_in_theta(self):
        thetas = np.linspace(1e-4, math.pi / 2 - 1e-4, 1000)
        vols = np.array([cap_volume(0.1, float(t)) for t in thetas])
        assert np.all(np.diff(vols) > 0)


class TestCapForVolume:
    def test_roundtrip(self):
        cap = cap_for_volume(0.1, 0.05)
        assert abs(cap_volume(0.1, cap.theta) - 0.05) <= 1e-11

    def test_tiny_volume_limits(self):
        cap = cap_for_volume(0.1, 1e-12)
        assert cap.theta < 1e-6
        assert cap.lam < 1e-6
        assert cap.apex_height < 1e-6

    def test_too_large(self):
        with pytest.raises(VolumeTooLargeError):
            cap_for_volume(0.1, eps_max(0.1) * 1.01)

    def test_lambda_bound(self):
        cap = cap_for_volume(0.05, 0.02)
        assert cap.lam < compute_Pi(3, 1 - 0.05) * 0.02

    def test_lambda_monotone_in_eps(self):
        eps = np.geomspace(1e-6, 0.05, 1000)
        lams = np.array([cap_for_volume(0.1, float(e)).lam for e in eps])
        assert np.all(np.diff(lams) > 0)

    def test_nesting(self):
        c1 = cap_for_volume(0.1, 0.01)
        c2 = cap_for_volume(0.1, 0.03)
        r = np.linspace(0.0, c1.contact_radius, 1000)
        assert np.all(cap_profile_height(c1, r) < cap_profile_height(c2, r))


def test_discrepancy_records():
    recs = {r["id"]: r for r in discrepancy_records()}
    sign = recs["center_height_sign"]
    assert abs(sign["orthogonality_residual_adopted"]) < 1e-12
    assert abs(sign["orthogonality_residual_rejected"]) > 1e-3
    assert sign["adopted_value"] == pytest.approx(-sign["rejected_value"])
    vol = recs["closed_form_volume_identity"]
    assert vol["identity_value"] == pytest.approx(math.pi / 2, abs=1e-6)
    assert vol["geometric_value"] == pytest.approx(2 * math.pi / 3, abs=1e-6)


def test_printed_variants_are_what_they_claim():
    assert printed_center_height(0.1, 0.3) == pytest.approx(
        (math.cos(0.3) - 0.1) / math.sin(0.3)
    )
    assert printed_volume_identity(0.0, math.pi / 2 - 1e-9) == pytest.approx(
        math.pi / 2, abs=1e-6
    )


def test_cap_table():
    rows = cap_table(0.1, [1e-3, 1e-2])
    assert [r["eps"] for r in rows] == [1e-3, 1e-2]
    assert rows[0]["lambda"] < rows[1]["lambda"]
