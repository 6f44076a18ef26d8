"""Closed-form spherical-cap minimizers for the unit-circle wire.

For the circular wire the film boundary consists of two mirror spherical caps
meeting the tube orthogonally.  With contact latitude ``theta`` on the tube
(measured from the inner equator toward +x3) orthogonality forces

    R   = (1 - delta*cos(theta)) / sin(theta)        sphere radius
    z_C = (delta - cos(theta)) / sin(theta)          lower sphere center height

The z_C sign is re-derived here from the orthogonality of the meridian
circles: the tube meridian normal at the contact is (-cos(theta), sin(theta))
and the sphere radius vector is (1 - delta*cos(theta), delta*sin(theta) - z_C);
their dot product vanishing gives z_C as above, which is negative whenever
cos(theta) > delta, consistent with the center lying below the plane.  A
published variant with the opposite sign fails that constraint; both values
are surfaced in the verification report (see ``discrepancy_records``).

The enclosed volume is assembled geometrically (spherical cap above the
contact plane plus the tube-wall solid of revolution below it).  A closed-form
volume identity floating around for this configuration fails the half-ball
sanity check (it gives pi/2 instead of 2*pi/3 at delta=0, theta=pi/2) and is
evaluated for documentation only, never used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, VolumeTooLargeError

__all__ = [
    "CapSolution",
    "cap_from_angle",
    "cap_volume",
    "cap_for_volume",
    "eps_max",
    "cap_profile_height",
    "cap_meridian_distance",
    "printed_center_height",
    "printed_volume_identity",
    "discrepancy_records",
    "cap_table",
]

_THETA_CAP = math.pi / 2 - 1e-6


@dataclass(frozen=True)
class CapSolution:
    """One spherical-cap minimizer (upper sheet; the lower is its mirror)."""

    delta: float
    theta: float
    z_c: float
    radius: float  # R, sphere radius
    kappa: float  # 1/R
    lam: float  # 2/R, the PDE volume multiplier (sum of principal curvatures)
    contact_radius: float  # 1 - delta*cos(theta)
    contact_height: float  # delta*sin(theta)
    apex_height: float  # (1 + delta)*tan(theta/2)
    volume: float  # total enclosed volume of both sheets

    def profile_height(self, r):
        """Upper-sheet height u(r) over the projected disc r <= contact_radius."""
        return cap_profile_height(self, r)

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "theta": self.theta,
            "z_C": self.z_c,
            "R": self.radius,
            "kappa": self.kappa,
            "lambda": self.lam,
            "contact_radius": self.contact_radius,
            "contact_height": self.contact_height,
            "apex_height": self.apex_height,
            "volume": self.volume,
        }


def _check_domain(delta: float, theta: float) -> None:
    # delta = 0 is admitted as the zero-thickness wire limit (half-ball checks)
    if not (0.0 <= delta < 1.0) or not math.isfinite(delta):
        raise DomainError(f"delta must be in [0, 1), got {delta}")
    if not (0.0 < theta < math.pi / 2) or not math.isfinite(theta):
        raise DomainError(f"theta must be in (0, pi/2), got {theta}")


def cap_from_angle(delta: float, theta: float) -> CapSolution:
    """Cap solution from the contact latitude; volume filled geometrically."""
    _check_domain(delta, theta)
    st, ct = math.sin(theta), math.cos(theta)
    radius = (1.0 - delta * ct) / st
    z_c = (delta - ct) / st
    apex = (1.0 + delta) * math.tan(theta / 2.0)
    return CapSolution(
        delta=delta,
        theta=theta,
        z_c=z_c,
        radius=radius,
        kappa=1.0 / radius,
        lam=2.0 / radius,
        contact_radius=1.0 - delta * ct,
        contact_height=delta * st,
        apex_height=apex,
        volume=cap_volume(delta, theta),
    )


def _tube_wall_volume(delta: float, theta: float) -> float:
    """pi * integral over z in (0, delta*sin(theta)) of r_t(z)^2 with
    r_t(z) = 1 - sqrt(delta^2 - z^2): solid of revolution bounded by the
    inner tube wall below the contact circle.  Closed form."""
    st, ct = math.sin(theta), math.cos(theta)
    d = delta
    return math.pi * (
        d * st * (1.0 + d * d)
        - (d * st) ** 3 / 3.0
        - d * d * st * ct
        - d * d * theta
    )


def cap_volume(delta: float, theta: float) -> float:
    """Total enclosed volume of the two-cap lens, tube excluded.

    One sheet splits at the contact height z* = delta*sin(theta): above z*
    the exact spherical-cap volume pi*h^2*(3R - h)/3 with h = apex - z*,
    below z* the tube-wall solid of revolution (closed form).  The factored
    cap formula stays stable as theta -> 0 where the naive antiderivative
    difference loses all digits.
    """
    _check_domain(delta, theta)
    st = math.sin(theta)
    radius = (1.0 - delta * math.cos(theta)) / st
    apex = (1.0 + delta) * math.tan(theta / 2.0)
    h = apex - delta * st
    upper = math.pi * h * h * (3.0 * radius - h) / 3.0
    return 2.0 * (upper + _tube_wall_volume(delta, theta))


def eps_max(delta: float) -> float:
    """Largest volume the cap family reaches before theta hits pi/2."""
    return cap_volume(delta, _THETA_CAP)


def cap_for_volume(delta: float, eps: float) -> CapSolution:
    """Invert the strictly increasing theta -> volume map.

    Bracketed bisection followed by a secant polish; the root is located to
    |cap_volume(delta, theta) - eps| <= 1e-11 * max(1, eps).
    """
    if not (eps > 0.0) or not math.isfinite(eps):
        raise DomainError(f"eps must be positive, got {eps}")
    vmax = eps_max(delta)
    if eps > vmax:
        raise VolumeTooLargeError(
            f"eps = {eps:.6g} beyond the cap family's range {vmax:.6g}; "
            "outside the small-volume regime",
            eps=eps,
            eps_max=vmax,
        )
    tol = 1e-11 * max(1.0, eps)
    lo, hi = 1e-300, _THETA_CAP
    fhi = vmax - eps
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = cap_volume(delta, mid) - eps
        if abs(fmid) <= tol:
            lo = hi = mid
            break
        if (fmid > 0.0) == (fhi > 0.0):
            hi, fhi = mid, fmid
        else:
            lo = mid
        if hi - lo <= 1e-17 * hi:
            break
    # secant polish from the bisection end state
    t_prev = 0.5 * (lo + hi) * (1.0 + 1e-9)
    t_cur = 0.5 * (lo + hi)
    f_prev = cap_volume(delta, t_prev) - eps
    f_cur = cap_volume(delta, t_cur) - eps
    for _ in range(60):
        if abs(f_cur) <= tol or f_cur == f_prev:
            break
        t_next = t_cur - f_cur * (t_cur - t_prev) / (f_cur - f_prev)
        t_next = min(max(t_next, 1e-300), _THETA_CAP)
        t_prev, f_prev = t_cur, f_cur
        t_cur = t_next
        f_cur = cap_volume(delta, t_cur) - eps
    theta = t_cur if abs(f_cur) <= abs(f_prev) else t_prev
    return cap_from_angle(delta, theta)


def cap_profile_height(cap: CapSolution, r):
    """u(r) = z_C + sqrt(R^2 - r^2) on r in [0, contact_radius]."""
    r = np.asarray(r, dtype=float)
    if np.any(r < -1e-15) or np.any(r > cap.contact_radius * (1 + 1e-12)):
        raise DomainError("radius outside the cap's projected disc")
    return cap.z_c + np.sqrt(np.maximum(cap.radius**2 - r**2, 0.0))


def cap_meridian_distance(cap: CapSolution, r, z):
    """Distance of meridian points (r, z) to the cap's meridian circle."""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    return np.abs(np.hypot(r, z - cap.z_c) - cap.radius)


# ---------------------------------------------------------------------------
# documented formula discrepancies
# ---------------------------------------------------------------------------


def printed_center_height(delta: float, theta: float) -> float:
    """The rejected sign variant (cos(theta) - delta)/sin(theta)."""
    return (math.cos(theta) - delta) / math.sin(theta)


def printed_volume_identity(delta: float, theta: float) -> float:
    """The rejected closed-form half-volume identity, evaluated verbatim:

        eps/2 = theta*(1/kappa^2 - delta^2)
                + (delta^2 sin^2 - (cos - delta)^2) / (sin*cos)

    Reported for audit only; it fails the half-ball check.
    """
    st, ct = math.sin(theta), math.cos(theta)
    kinv = (1.0 - delta * ct) / st
    return theta * (kinv * kinv - delta * delta) + (
        (delta * st) ** 2 - (ct - delta) ** 2
    ) / (st * ct)


def discrepancy_records() -> list[dict]:
    """Machine-readable audit records for the two rejected formulas."""
    delta, theta = 0.1, 0.3
    adopted = (delta - math.cos(theta)) / math.sin(theta)
    rejected = printed_center_height(delta, theta)
    th_half = math.pi / 2 - 1e-9
    identity_val = printed_volume_identity(0.0, th_half)
    geometric_val = cap_volume(0.0, th_half) / 2.0
    return [
        {
            "id": "center_height_sign",
            "description": (
                "sign of the sphere-center height z_C; adopted "
                "(delta - cos(theta))/sin(theta) from the meridian "
                "orthogonality relation, negating a published variant that "
                "puts the center above the plane for small theta"
            ),
            "at": {"delta": delta, "theta": theta},
            "adopted_value": adopted,
            "rejected_value": rejected,
            "orthogonality_residual_adopted": float(
                -math.cos(theta) * (1 - delta * math.cos(theta))
                + math.sin(theta) * (delta * math.sin(theta) - adopted)
            ),
            "orthogonality_residual_rejected": float(
                -math.cos(theta) * (1 - delta * math.cos(theta))
                + math.sin(theta) * (delta * math.sin(theta) - rejected)
            ),
        },
        {
            "id": "closed_form_volume_identity",
            "description": (
                "closed-form half-volume identity rejected: at delta->0, "
                "theta->pi/2 it must give the unit half-ball 2*pi/3 but "
                "evaluates to pi/2; volume is assembled geometrically instead"
            ),
            "at": {"delta": 0.0, "theta": th_half},
            "identity_value": identity_val,
            "geometric_value": geometric_val,
            "expected_half_ball": 2.0 * math.pi / 3.0,
        },
    ]


def cap_table(delta: float, eps_values) -> list[dict]:
    """Rows (eps, theta, z_C, R, lambda, apex_height) for CSV export."""
    rows = []
    for eps in eps_values:
        cap = cap_for_volume(delta, float(eps))
        rows.append(
            {
                "eps": float(eps),
                "theta": cap.theta,
                "z_C": cap.z_c,
                "R": cap.radius,
                "lambda": cap.lam,
                "apex_height": cap.apex_height,
            }
        )
    return rows
