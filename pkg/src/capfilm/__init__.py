"""capfilm: small-volume capillary soap films spanning planar wires.

The film is modeled as two mirror constant-mean-curvature sheets meeting the
wire's tubular neighborhood orthogonally.  The package provides an exact
spherical-cap oracle for the circular wire, an independent meridian shooting
solver, a constrained triangle-mesh minimizer for general planar wires, the
wire-centered angular reparametrization used for curvature diagnostics, and
volume sweeps validating the family's ordering, symmetry, curvature bounds,
and collapse to the flat spanning disc.
"""

__version__ = "0.1.0"

from .caps import CapSolution, cap_for_volume, cap_from_angle, cap_volume, eps_max
from .errors import CapfilmError
from .foliation import compute_Pi, sweep
from .geometry import (
    CircleWire,
    EllipseWire,
    PlanarDomain,
    SplineWire,
    Tube,
    WireCurve,
    closest_point_on_tube,
    inner_offset_domain,
    wire_from_spec,
)
from .axisym import MeridianProfile, integrate_meridian, solve_axisym
from .meshing import TriSurface, init_mesh, sample_cap_mesh
from .solver import (
    SolveParams,
    SolveReport,
    estimate_lambda,
    measure_contact_angle,
    minimize,
    solve_two_sheet,
)
from .spanning import spanning_check

__all__ = [
    "__version__",
    "CapSolution",
    "cap_for_volume",
    "cap_from_angle",
    "cap_volume",
    "eps_max",
    "CapfilmError",
    "compute_Pi",
    "sweep",
    "CircleWire",
    "EllipseWire",
    "SplineWire",
    "WireCurve",
    "PlanarDomain",
    "Tube",
    "closest_point_on_tube",
    "inner_offset_domain",
    "wire_from_spec",
    "MeridianProfile",
    "integrate_meridian",
    "solve_axisym",
    "TriSurface",
    "init_mesh",
    "sample_cap_mesh",
    "SolveParams",
    "SolveReport",
    "estimate_lambda",
    "measure_contact_angle",
    "minimize",
    "solve_two_sheet",
    "spanning_check",
]
