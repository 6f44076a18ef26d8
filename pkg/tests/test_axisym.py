import numpy as np
import pytest

from capfilm.axisym import integrate_meridian, regime_boundary, solve_axisym
from capfilm.caps import cap_for_volume, cap_from_angle, cap_meridian_distance
from capfilm.errors import BlowupError, DomainError
from capfilm.foliation import compute_Pi


def test_matches_cap_meridian():
    cap = cap_from_angle(0.1, 0.2)
    prof = integrate_meridian(cap.lam, 0.1, 0.2)
    dist = cap_meridian_distance(cap, prof.samples[:, 0], prof.samples[:, 1])
    assert prof.reached_axis
    assert np.max(dist) < 1e-8


def test_flat_limit():
    prof = integrate_meridian(1e-12, 0.1, 1e-12, raise_on_failure=False)
    assert np.max(np.abs(prof.samples[:, 1] - prof.samples[0, 1])) < 1e-8


def test_first_integral_conserved():
    for lam, angle in [(0.05, 0.03), (0.5, 0.25), (1.5, 0.9)]:
        prof = integrate_meridian(lam, 0.1, angle, raise_on_failure=False)
        assert np.ptp(prof.first_integral()) < 1e-9


def test_blowup_for_large_lambda():
    with pytest.raises(BlowupError):
        integrate_meridian(8.0, 0.1, 0.1)


def test_preconditions():
    with pytest.raises(DomainError):
        integrate_meridian(-1.0, 0.1, 0.2)
    with pytest.raises(DomainError):
        integrate_meridian(1.0, 0.1, 2.0)


class TestSolve:
    def test_agrees_with_cap(self):
        prof = solve_axisym(0.1, 0.05)
        cap = cap_for_volume(0.1, 0.05)
        assert abs(prof.lam - cap.lam) / cap.lam < 1e-8
        dist = cap_meridian_distance(cap, prof.samples[:, 0], prof.samples[:, 1])
        assert np.max(dist) < 1e-7
        assert abs(prof.pole_residual) <= 1e-9
        assert abs(prof.half_volume - 0.025) / 0.05 <= 1e-9

    def test_lambda_bound_and_monotone_tail(self):
        pi_const = compute_Pi(3, 0.9)
        lams = []
        for eps in (1e-4, 1e-3, 1e-2):
            prof = solve_axisym(0.1, eps)
            assert 0.0 < prof.lam <= pi_const * eps
            lams.append(prof.lam)
        assert lams[0] < lams[1] < lams[2]

    def test_unique_from_random_seeds(self):
        rng = np.random.default_rng(42)
        base = solve_axisym(0.1, 0.05)
        lams = []
        for _ in range(10):
            x0 = (
                base.lam * rng.uniform(0.3, 3.0),
                base.contact_angle * rng.uniform(0.3, 3.0),
            )
            lams.append(solve_axisym(0.1, 0.05, x0=x0).lam)
        assert np.ptp(np.array(lams)) < 1e-7

    def test_reflection_gives_lower_sheet(self):
        prof = solve_axisym(0.1, 0.02)
        r = prof.samples[:, 0]
        z_m = -prof.samples[:, 1]
        psi_m = -prof.samples[:, 2]
        # mirrored meridian conserves the first integral with flipped sign
        conserved = r * np.sin(psi_m) + 0.5 * (-prof.lam) * r * r
        assert np.ptp(conserved) < 1e-9
        assert np.max(z_m) < 0.0


def test_regime_boundary_reports():
    out = regime_boundary(0.1, [1e-3, 1e-2])
    assert out["first_bad_eps"] is None
    assert out["last_ok_eps"] == 1e-2
    assert out["Pi"] == pytest.approx(compute_Pi(3, 0.9))
