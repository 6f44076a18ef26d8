"""Axisymmetric meridian solver for the unit-circle wire.

This is the second, independent route to the circular-wire minimizer: the
constant-mean-curvature surface of revolution is reduced to the meridian ODE
in arc-length form,

    dpsi/dl = -lam - sin(psi)/r,

integrated inward from an orthogonal start on the tube, and the pair
(lam, contact angle) is solved by damped-Newton shooting on pole regularity
and enclosed volume.  Along any solution the Delaunay first integral
r*sin(psi) + lam*r^2/2 is conserved; for profiles that close regularly at the
axis it vanishes identically, which is what the pole residual measures.

Nothing here uses the spherical-cap formulas: agreement of this solver with
the cap family is a verified statement, not an assumption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from ._meridian_kernel import (
    STATUS_BLOWUP,
    STATUS_MAXSTEPS,
    STATUS_REACHED,
    STATUS_UNDERFLOW,
    integrate_meridian_raw,
)
from .errors import BlowupError, DomainError, NoConvergenceError, StepUnderflowError

__all__ = ["MeridianProfile", "integrate_meridian", "solve_axisym", "regime_boundary"]


@dataclass(frozen=True)
class MeridianProfile:
    """One integrated meridian with its shooting diagnostics."""

    samples: np.ndarray  # (n, 3): r, z, psi along the profile
    lam: float
    contact_radius: float
    volume: float  # total enclosed volume (both mirror sheets)
    delta: float
    contact_angle: float
    reached_axis: bool
    pole_residual: float
    n_steps: int
    half_volume: float = field(repr=False, default=0.0)

    def first_integral(self) -> np.ndarray:
        """r*sin(psi) + lam*r^2/2 along the profile (conserved)."""
        r = self.samples[:, 0]
        psi = self.samples[:, 2]
        return r * np.sin(psi) + 0.5 * self.lam * r * r

    def height_at(self, r) -> np.ndarray:
        """Interpolated profile height z(r); samples have decreasing r."""
        rr = self.samples[::-1, 0]
        zz = self.samples[::-1, 1]
        return np.interp(np.asarray(r, dtype=float), rr, zz)

    @property
    def sup_height(self) -> float:
        return float(np.max(self.samples[:, 1]))


def _tube_wall_volume_quad(delta: float, angle: float) -> float:
    """pi * int_0^{delta*sin(angle)} (1 - sqrt(delta^2 - z^2))^2 dz by
    adaptive quadrature (deliberately a different route than the cap oracle's
    closed form)."""
    zstar = delta * math.sin(angle)
    if zstar <= 0.0:
        return 0.0
    val, _ = quad(
        lambda z: (1.0 - math.sqrt(max(delta * delta - z * z, 0.0))) ** 2,
        0.0,
        zstar,
        epsabs=1e-13,
        epsrel=1e-13,
    )
    return math.pi * val


def integrate_meridian(
    lam: float,
    delta: float,
    contact_angle: float,
    step: float = 1e-5,
    rtol: float = 1e-12,
    atol: float = 1e-13,
    raise_on_failure: bool = True,
    max_step: float = 1e9,
) -> MeridianProfile:
    """Integrate inward from the tube contact at the given angle.

    The start point is (r, z) = (1 - delta*cos(a), delta*sin(a)) with tangent
    angle psi = -a, i.e. the meridian leaves the tube orthogonally.  ``step``
    is the stop radius at the axis.  Raises BLOWUP if |psi| reaches pi/2
    before the axis and STEP_UNDERFLOW on step-size collapse (suppressed when
    raise_on_failure=False so shooting can use the partial profile).
    """
    if lam <= 0.0:
        raise DomainError(f"lam must be positive, got {lam}")
    if not (0.0 < contact_angle < math.pi / 2):
        raise DomainError("contact angle must be in (0, pi/2)")
    if not (0.0 < delta < 1.0):
        raise DomainError("delta must be in (0, 1)")
    r0 = 1.0 - delta * math.cos(contact_angle)
    z0 = delta * math.sin(contact_angle)
    status, samples = integrate_meridian_raw(
        lam, r0, z0, -contact_angle, r_stop=step, rtol=rtol, atol=atol, h_max=max_step
    )
    if raise_on_failure:
        if status == STATUS_BLOWUP:
            raise BlowupError(
                "profile turned vertical before reaching the axis",
                r_turn=float(samples[-1, 0]),
            )
        if status == STATUS_UNDERFLOW:
            raise StepUnderflowError("meridian step size collapsed")
        if status == STATUS_MAXSTEPS:
            raise NoConvergenceError("meridian integration exceeded step budget")

    r_end, z_end, psi_end = samples[-1, 0], samples[-1, 1], samples[-1, 2]
    vol_graph = samples[-1, 3]
    # pole residual: deviation from the regular local behaviour sin(psi) = -lam*r/2
    s_loc = min(max(lam * r_end / 2.0, -1.0), 1.0)
    pole_residual = psi_end + math.asin(s_loc)
    half_vol = (
        vol_graph
        + math.pi * r_end * r_end * z_end
        + _tube_wall_volume_quad(delta, contact_angle)
        - math.pi * r0 * r0 * z0
    )
    return MeridianProfile(
        samples=samples[:, :3],
        lam=float(lam),
        contact_radius=r0,
        volume=2.0 * half_vol,
        delta=float(delta),
        contact_angle=float(contact_angle),
        reached_axis=(status == STATUS_REACHED),
        pole_residual=float(pole_residual),
        n_steps=int(samples.shape[0]),
        half_volume=float(half_vol),
    )


def _shallow_seed(delta: float, eps: float) -> tuple[float, float]:
    """Initial (lam, angle) from the thin-film limit of the volume map."""
    denom = 2.0 * math.pi * (1.0 - delta) ** 2 * (delta + (1.0 - delta) / 4.0)
    angle = min(max(eps / denom, 1e-8), math.pi / 2 - 0.05)
    lam = 2.0 * math.sin(angle) / (1.0 - delta * math.cos(angle))
    return lam, angle


def _residuals(x, delta, eps, step, rtol):
    """Shooting residuals: Delaunay defect at the pole and scaled volume.

    The pole-regularity condition psi(0) = 0 is enforced through the first
    integral r*sin(psi) + lam*r^2/2 evaluated at the stop radius: it vanishes
    exactly on profiles that close regularly at the axis and, unlike the raw
    end angle, has O(1) slope in (lam, angle), which keeps the Newton model
    honest.  The raw angle residual is still what convergence is judged on.
    """
    lam, angle = x
    if lam <= 0.0 or not (0.0 < angle < math.pi / 2):
        return np.array([1e3, 1e3]), None
    prof = integrate_meridian(
        lam, delta, angle, step=step, rtol=rtol, raise_on_failure=False
    )
    r_end, _, psi_end = prof.samples[-1]
    defect = r_end * math.sin(psi_end) + 0.5 * lam * r_end * r_end
    return (
        np.array([defect, (prof.half_volume - eps / 2.0) / eps]),
        prof,
    )


def solve_axisym(
    delta: float,
    eps: float,
    step: float = 1e-4,
    rtol: float = 1e-12,
    tol: float = 1e-9,
    max_iter: int = 100,
    x0: tuple[float, float] | None = None,
) -> MeridianProfile:
    """Two-parameter shooting on (lam, contact angle).

    Residuals are pole regularity and enclosed half volume = eps/2 (scaled by
    eps); damped Newton with central finite-difference Jacobian (relative
    step 1e-6).  On success both |pole_residual| (radians) and the scaled
    volume residual are <= tol.
    """
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    # the defect tolerance that makes the radian residual meet tol
    tol_defect = 0.5 * tol * step

    def norm(f):
        return float(max(abs(f[0]) / tol_defect, abs(f[1]) / tol))

    def done(f, prof):
        return (
            prof is not None
            and prof.reached_axis
            and abs(prof.pole_residual) <= tol
            and abs(f[1]) <= tol
        )

    x = np.array(x0 if x0 is not None else _shallow_seed(delta, eps))
    f, prof = _residuals(x, delta, eps, step, rtol)
    eta = norm(f)
    for _ in range(max_iter):
        if done(f, prof):
            return _densify(prof, delta, eps, step, rtol)
        jac = np.empty((2, 2))
        for j in range(2):
            h = 1e-6 * max(1.0, abs(x[j]))
            xp = x.copy()
            xp[j] += h
            xm = x.copy()
            xm[j] -= h
            fp, _ = _residuals(xp, delta, eps, step, rtol)
            fm, _ = _residuals(xm, delta, eps, step, rtol)
            jac[:, j] = (fp - fm) / (2.0 * h)
        try:
            dx = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            raise NoConvergenceError("singular shooting Jacobian", residuals=f.tolist())
        damp = 1.0
        for _ in range(25):
            f_new, prof_new = _residuals(x + damp * dx, delta, eps, step, rtol)
            if norm(f_new) < eta or done(f_new, prof_new):
                break
            damp *= 0.5
        else:
            raise NoConvergenceError("shooting line search stalled", residuals=f.tolist())
        x = x + damp * dx
        f, prof = f_new, prof_new
        eta = norm(f)
    if done(f, prof):
        return _densify(prof, delta, eps, step, rtol)
    raise NoConvergenceError(
        "shooting did not converge", residuals=f.tolist(), iterations=max_iter
    )


def _densify(prof: MeridianProfile, delta, eps, step, rtol) -> MeridianProfile:
    """Re-integrate the converged shot with a capped step so the returned
    polyline is chord-accurate for downstream interpolation."""
    return integrate_meridian(
        prof.lam,
        delta,
        prof.contact_angle,
        step=step,
        rtol=rtol,
        raise_on_failure=False,
        max_step=2e-3,
    )


def regime_boundary(delta: float, eps_values) -> dict:
    """Empirical small-volume regime probe.

    Walks the increasing eps grid; reports the first eps where the shooting
    fails or the solved multiplier violates 0 < lam <= Pi*eps with
    Pi = compute_Pi(3, 1 - delta).  The regime threshold is not constructive,
    so this is a measurement, not a guarantee.
    """
    from .foliation import compute_Pi

    pi_const = compute_Pi(3, 1.0 - delta)
    last_ok = None
    for eps in eps_values:
        try:
            prof = solve_axisym(delta, float(eps))
        except Exception as exc:  # solver failure ends the regime
            return {
                "delta": delta,
                "last_ok_eps": last_ok,
                "first_bad_eps": float(eps),
                "reason": type(exc).__name__,
                "Pi": pi_const,
            }
        if not (0.0 < prof.lam <= pi_const * eps):
            return {
                "delta": delta,
                "last_ok_eps": last_ok,
                "first_bad_eps": float(eps),
                "reason": "curvature_bound",
                "Pi": pi_const,
            }
        last_ok = float(eps)
    return {
        "delta": delta,
        "last_ok_eps": last_ok,
        "first_bad_eps": None,
        "reason": None,
        "Pi": pi_const,
    }
