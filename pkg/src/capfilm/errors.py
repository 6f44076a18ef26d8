"""Exception types. Each carries a stable machine-readable ``code``."""

from __future__ import annotations


class CapfilmError(Exception):
    code = "ERROR"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details


class DomainError(CapfilmError):
    code = "DOMAIN"


class AxisDegenerateError(CapfilmError):
    code = "AXIS_DEGENERATE"


class NoConvergenceError(CapfilmError):
    code = "NO_CONVERGENCE"


class OffsetCollapseError(CapfilmError):
    code = "OFFSET_COLLAPSE"


class MeshingFailedError(CapfilmError):
    code = "MESHING_FAILED"


class VolumeInfeasibleError(CapfilmError):
    code = "VOLUME_INFEASIBLE"


class MeshDegenerateError(CapfilmError):
    code = "MESH_DEGENERATE"


class VolumeTooLargeError(CapfilmError):
    code = "VOLUME_TOO_LARGE"


class BlowupError(CapfilmError):
    code = "BLOWUP"


class StepUnderflowError(CapfilmError):
    code = "STEP_UNDERFLOW"


class NotAGraphError(CapfilmError):
    code = "NOT_A_GRAPH"


class ChartSingularError(CapfilmError):
    code = "CHART_SINGULAR"


class IncompatibleRecordsError(CapfilmError):
    code = "INCOMPATIBLE_RECORDS"


class InsufficientTailError(CapfilmError):
    code = "INSUFFICIENT_TAIL"


class NoBoundaryError(CapfilmError):
    code = "NO_BOUNDARY"


class ConfigError(CapfilmError):
    code = "CONFIG_INVALID"
