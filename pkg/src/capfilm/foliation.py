"""Volume sweeps and the family-level validators.

One FoliationRecord per volume; the validators check the structural
properties the film family must have: strictly positive multipliers below
the linear bound Pi*eps, strict nesting of footprints/heights/multipliers,
mirror symmetry of the two sheets, and collapse onto the flat footprint as
the volume vanishes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .axisym import MeridianProfile, solve_axisym
from .caps import CapSolution, cap_for_volume
from .errors import (
    DomainError,
    IncompatibleRecordsError,
    InsufficientTailError,
)
from .geometry import CircleWire, Tube, inner_offset_domain
from .meshing import TriSurface, init_mesh
from .solver import (
    SolveParams,
    graph_height,
    minimize,
    solve_two_sheet,
)
from .spanning import quasi_random_in_domain

__all__ = [
    "FoliationRecord",
    "SweepReport",
    "compute_Pi",
    "sweep",
    "check_ordering",
    "check_symmetry",
    "check_convergence_to_disc",
]


def compute_Pi(dimension: int, inscribed_radius: float) -> float:
    """Linear curvature-bound constant ((d-1)/omega_{d-1}) (2/r)^(d+1).

    omega_{d-1} is the volume of the unit (d-1)-ball and r the radius of a
    flat disc inscribed in the footprint; only d = 3 is supported, where
    omega_2 = pi.
    """
    if dimension != 3:
        raise DomainError("only dimension 3 is supported")
    if not (inscribed_radius > 0.0):
        raise DomainError("inscribed radius must be positive")
    return (2.0 / math.pi) * (2.0 / inscribed_radius) ** 4


@dataclass(frozen=True)
class FoliationRecord:
    """One (eps, lam, solution) sample of the foliation."""

    eps: float
    lam: float
    sup_height: float
    domain_area: float
    solver_kind: str
    solution: object = field(repr=False)

    def __post_init__(self):
        if not (self.eps > 0.0):
            raise DomainError("record eps must be positive")
        if not (self.lam > 0.0):
            raise DomainError("record lam must be positive (multiplier bound)")
        if not (self.sup_height > 0.0):
            raise DomainError("record sup_height must be positive")

    def height_at(self, pts_or_r):
        sol = self.solution
        if isinstance(sol, CapSolution):
            r = np.asarray(pts_or_r, dtype=float)
            if r.ndim == 2:
                r = np.hypot(r[:, 0], r[:, 1])
            return sol.profile_height(r)
        if isinstance(sol, MeridianProfile):
            r = np.asarray(pts_or_r, dtype=float)
            if r.ndim == 2:
                r = np.hypot(r[:, 0], r[:, 1])
            return sol.height_at(r)
        if isinstance(sol, TriSurface):
            return graph_height(sol, pts_or_r)
        raise DomainError(f"unknown solution payload {type(sol).__name__}")

    def footprint_radius(self) -> float | None:
        sol = self.solution
        if isinstance(sol, CapSolution):
            return sol.contact_radius
        if isinstance(sol, MeridianProfile):
            return sol.contact_radius
        return None

    def footprint_polygon(self) -> np.ndarray:
        sol = self.solution
        if isinstance(sol, TriSurface):
            return sol.vertices[sol.boundary_loop][:, :2]
        r = self.footprint_radius()
        phi = np.linspace(0.0, 2.0 * math.pi, 256, endpoint=False)
        return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)


@dataclass
class SweepReport:
    records: list
    ordering_ok: bool | None = None
    symmetry_ok: bool | None = None
    curvature_bound_ok: bool | None = None
    convergence_ok: bool | None = None
    Pi: float = float("nan")
    details: dict = field(default_factory=dict)

    def all_ok(self) -> bool:
        flags = [self.ordering_ok, self.symmetry_ok, self.curvature_bound_ok, self.convergence_ok]
        return all(f is True or f is None for f in flags) and any(
            f is not None for f in flags
        )

    def as_dict(self) -> dict:
        return {
            "records": [
                {
                    "eps": r.eps,
                    "lambda": r.lam,
                    "sup_height": r.sup_height,
                    "domain_area": r.domain_area,
                    "solver_kind": r.solver_kind,
                }
                for r in self.records
            ],
            "ordering_ok": self.ordering_ok,
            "symmetry_ok": self.symmetry_ok,
            "curvature_bound_ok": self.curvature_bound_ok,
            "convergence_ok": self.convergence_ok,
            "Pi": self.Pi,
            "details": self.details,
        }


def _solve_one(tube: Tube, eps: float, solver: str, params: SolveParams | None):
    if solver == "cap":
        if not isinstance(tube.wire, CircleWire) or tube.wire.radius != 1.0:
            raise DomainError("cap solver requires the unit-circle wire")
        cap = cap_for_volume(tube.delta, eps)
        return FoliationRecord(
            eps=eps,
            lam=cap.lam,
            sup_height=cap.apex_height,
            domain_area=math.pi * cap.contact_radius**2,
            solver_kind="cap",
            solution=cap,
        )
    if solver == "ode":
        if not isinstance(tube.wire, CircleWire) or tube.wire.radius != 1.0:
            raise DomainError("ode solver requires the unit-circle wire")
        prof = solve_axisym(tube.delta, eps)
        return FoliationRecord(
            eps=eps,
            lam=prof.lam,
            sup_height=prof.sup_height,
            domain_area=math.pi * prof.contact_radius**2,
            solver_kind="ode",
            solution=prof,
        )
    if solver == "mesh":
        params = params or SolveParams(target_edge=min(0.02, tube.delta / 2.0))
        domain = inner_offset_domain(tube)
        mesh0 = init_mesh(domain, tube, params.target_edge)
        out, rep = minimize(mesh0, tube, eps / 2.0, params)
        loop = out.boundary_loop
        poly = out.vertices[loop][:, :2]
        area = 0.5 * float(
            np.sum(
                poly[:, 0] * np.roll(poly[:, 1], -1)
                - np.roll(poly[:, 0], -1) * poly[:, 1]
            )
        )
        return FoliationRecord(
            eps=eps,
            lam=rep.lambda_hat,
            sup_height=float(np.max(out.vertices[:, 2])),
            domain_area=abs(area),
            solver_kind="mesh",
            solution=out,
        )
    raise DomainError(f"unknown solver {solver!r}")


def sweep(
    tube: Tube,
    eps_grid,
    solver: str = "cap",
    params: SolveParams | None = None,
    jobs: int = 1,
    symmetry_eps: float | None = None,
    symmetry_target_edge: float | None = None,
) -> SweepReport:
    """Solve every eps, then run all validators on the family.

    Records are solved independently (optionally in parallel); a failed
    record voids only the checks that need it.  Validators run after the
    join, single threaded.
    """
    eps_grid = [float(e) for e in eps_grid]
    if any(b <= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise DomainError("eps grid must be strictly increasing")
    errors: dict[int, str] = {}
    records: list[FoliationRecord | None] = [None] * len(eps_grid)

    def run(i):
        try:
            records[i] = _solve_one(tube, eps_grid[i], solver, params)
        except Exception as exc:  # recorded, not fatal
            errors[i] = f"{type(exc).__name__}: {exc}"

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            list(ex.map(run, range(len(eps_grid))))
    else:
        for i in range(len(eps_grid)):
            run(i)

    good = [r for r in records if r is not None]
    report = SweepReport(records=good)
    report.details["solver"] = solver
    report.details["failures"] = errors
    inscribed = inner_offset_domain(tube, n_points=1024).inscribed_radius()
    report.Pi = compute_Pi(3, inscribed)

    # curvature bound: every solved multiplier obeys 0 < lam <= Pi * eps
    if good:
        viol = [r.eps for r in good if not (0.0 < r.lam <= report.Pi * r.eps)]
        report.curvature_bound_ok = not viol
        report.details["curvature_bound_violations"] = viol
        report.details["lam_over_eps"] = [r.lam / r.eps for r in good]

    if len(good) >= 2:
        ok, witnesses = check_ordering(good)
        report.ordering_ok = ok
        report.details["ordering_witnesses"] = witnesses
    else:
        report.ordering_ok = True
        report.details["ordering_note"] = "insufficient points: trivially ordered"

    if solver in ("cap", "ode"):
        # both sheets are mirror images by construction; record it as exact
        report.symmetry_ok = True
        report.details["symmetry_note"] = "sheets mirror by construction"
        report.details["max_asymmetry"] = 0.0
    elif good:
        eps_sym = symmetry_eps if symmetry_eps is not None else good[-1].eps
        te = symmetry_target_edge or (params.target_edge if params else tube.delta / 2)
        ok, asym = check_symmetry(tube, eps_sym, target_edge=te)
        report.symmetry_ok = ok
        report.details["max_asymmetry"] = asym

    spans = math.log10(good[-1].eps / good[0].eps) if len(good) >= 2 else 0.0
    if len(good) >= 4 and spans >= 2.5:
        ok, det = check_convergence_to_disc(good, tube, report.Pi, min_decades=2.5)
        report.convergence_ok = ok
        report.details["convergence"] = det
    else:
        report.convergence_ok = None
        report.details["convergence_note"] = "insufficient points: need a long eps tail"
    return report


def check_ordering(records, margin: float | None = None, n_samples: int = 1000):
    """Strict monotonicity of footprints, heights, and multipliers in eps.

    Validates consecutive pairs after sorting by eps: (a) footprint polygons
    nested with positive margin, (b) heights ordered at shared samples,
    (c) multipliers strictly increasing.  Returns (ok, witnesses).
    """
    if len(records) < 2:
        raise IncompatibleRecordsError("need at least two records")
    recs = sorted(records, key=lambda r: r.eps)
    witnesses = []
    for lo, hi in zip(recs, recs[1:]):
        if margin is None:
            m = 1e-9 * max(1.0, abs(hi.lam))
        else:
            m = margin
        if not (hi.lam > lo.lam + m):
            witnesses.append(
                {"pair": (lo.eps, hi.eps), "kind": "lambda", "values": (lo.lam, hi.lam)}
            )
        poly_lo = lo.footprint_polygon()
        poly_hi = hi.footprint_polygon()
        from .geometry import PlanarDomain

        dom_hi = PlanarDomain(polyline=poly_hi)
        inside = dom_hi.contains(poly_lo)
        dist = dom_hi.boundary_distance(poly_lo)
        if not (np.all(inside) and np.min(dist) > 0.0):
            witnesses.append(
                {
                    "pair": (lo.eps, hi.eps),
                    "kind": "domain",
                    "min_margin": float(np.min(dist)),
                }
            )
        from .geometry import PlanarDomain as _PD

        dom_lo = _PD(polyline=poly_lo)
        pts = quasi_random_in_domain(dom_lo, n_samples)
        z_lo = lo.height_at(pts)
        z_hi = hi.height_at(pts)
        okmask = ~(np.isnan(z_lo) | np.isnan(z_hi))
        bad = np.flatnonzero(z_lo[okmask] >= z_hi[okmask])
        if bad.size:
            i0 = int(bad[0])
            witnesses.append(
                {
                    "pair": (lo.eps, hi.eps),
                    "kind": "height",
                    "sample": pts[okmask][i0].tolist(),
                    "values": (float(z_lo[okmask][i0]), float(z_hi[okmask][i0])),
                }
            )
    return (len(witnesses) == 0), witnesses


def check_symmetry(
    tube: Tube,
    eps: float,
    target_edge: float | None = None,
    perturb_fraction: float = 0.3,
    n_samples: int = 1000,
):
    """Two-sheet solve from an asymmetric start; measures max |u+ + u-|.

    The initial perturbation has amplitude perturb_fraction times the apex
    height scale; symmetry holds iff the final asymmetry is at most
    5 * target_edge^2.
    """
    te = target_edge if target_edge is not None else tube.delta / 2.0
    domain = inner_offset_domain(tube)
    apex_scale = _apex_estimate(tube, eps)
    mesh_a, mesh_b, report = solve_two_sheet(
        domain,
        tube,
        eps,
        SolveParams(target_edge=te, tol=2e-6),
        perturb_amplitude=perturb_fraction * apex_scale,
    )
    shrunk = PlanarShrink(domain, 0.9)
    pts = quasi_random_in_domain(shrunk.domain, n_samples)
    za = graph_height(mesh_a, pts)
    zb = graph_height(mesh_b, pts)
    ok = ~(np.isnan(za) | np.isnan(zb))
    asym = float(np.max(np.abs(za[ok] - zb[ok])))
    return asym <= 5.0 * te**2, asym


class PlanarShrink:
    """Footprint scaled toward its centroid (sampling stays off the rim)."""

    def __init__(self, domain, factor: float):
        from .geometry import PlanarDomain

        c = domain.centroid()
        self.domain = PlanarDomain(polyline=c + factor * (domain.polyline - c))


def _apex_estimate(tube: Tube, eps: float) -> float:
    if isinstance(tube.wire, CircleWire) and tube.wire.radius == 1.0:
        return cap_for_volume(tube.delta, eps).apex_height
    domain = inner_offset_domain(tube, n_points=512)
    r_eff = math.sqrt(domain.area / math.pi)
    lam = eps / (math.pi * r_eff**3 * (tube.delta + r_eff / 4.0))
    return lam * r_eff**2 / 4.0 + tube.delta * lam * (1.0 - tube.delta) / 2.0


def check_convergence_to_disc(
    records, tube: Tube, pi_const: float | None = None, min_decades: float = 3.0
):
    """Monotone vanishing of sup_height and lam along a >= 3-decade tail,
    fitted power laws (reported, not asserted), lam/eps <= Pi, and monotone
    Hausdorff distance of the footprint boundary to the flat footprint."""
    recs = sorted(records, key=lambda r: r.eps)
    if len(recs) < 4 or math.log10(recs[-1].eps / recs[0].eps) < min_decades - 1e-9:
        raise InsufficientTailError(
            f"need >= 4 records spanning >= {min_decades:g} decades of eps"
        )
    heights = np.array([r.sup_height for r in recs])
    lams = np.array([r.lam for r in recs])
    eps = np.array([r.eps for r in recs])
    mono_h = bool(np.all(np.diff(heights) > 0.0))
    mono_l = bool(np.all(np.diff(lams) > 0.0))
    fit_h = float(np.polyfit(np.log(eps), np.log(heights), 1)[0])
    fit_l = float(np.polyfit(np.log(eps), np.log(lams), 1)[0])
    d0 = inner_offset_domain(tube, n_points=1024)
    dists = []
    for r in recs:
        poly = r.footprint_polygon()
        dists.append(float(np.max(d0.boundary_distance(poly))))
    mono_d = bool(np.all(np.diff(np.array(dists)) > 0.0))
    details = {
        "height_exponent": fit_h,
        "lambda_exponent": fit_l,
        "hausdorff_to_flat": dists,
        "monotone_heights": mono_h,
        "monotone_lambdas": mono_l,
        "monotone_hausdorff": mono_d,
    }
    ok = mono_h and mono_l and mono_d
    if pi_const is not None:
        ratio_ok = bool(np.all(lams / eps <= pi_const))
        details["lam_over_eps_max"] = float(np.max(lams / eps))
        details["below_Pi"] = ratio_ok
        ok = ok and ratio_ok
    return ok, details
