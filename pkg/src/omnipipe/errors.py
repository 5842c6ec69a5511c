"""Exception types shared across the omnipipe package."""


class OmnipipeError(Exception):
    """Base class for all omnipipe errors."""


class InvalidGeometryError(OmnipipeError):
    """Robot geometry is degenerate or violates a physical constraint."""


class UndefinedCurvatureError(OmnipipeError):
    """Curvature is 0/0: all module speeds zero and no angular velocity."""


class InvalidSectionError(OmnipipeError):
    """A pipe cross-section cut is degenerate (cut plane parallel to axis)."""


class InsufficientReachError(OmnipipeError):
    """Module reach cannot press even the narrowest part of the section."""


class NoEscapeError(OmnipipeError):
    """The forbidden orientation set covers the whole period; no free gap."""


class NetworkValidationError(OmnipipeError):
    """A pipe network document violates the schema or an invariant.

    ``segment_index`` is the offending segment (None for document-level
    problems); ``field`` names the offending key when known.
    """

    def __init__(self, message: str, segment_index: int | None = None,
                 field: str | None = None):
        super().__init__(message)
        self.segment_index = segment_index
        self.field = field


class PlanError(OmnipipeError):
    """A mission plan is malformed or cannot be constructed."""


class SimulationError(OmnipipeError):
    """A simulation run received invalid inputs."""
