"""Exception types shared across the package."""


class SlipformError(Exception):
    """Base class for domain errors raised by this package."""


class Infeasible(SlipformError):
    """A requested lift or decomposition has no admissible solution."""


class InvalidRange(SlipformError):
    """A sampling range does not cover the nontrivial part of a profile."""


class NotConnected(SlipformError):
    """Two shear states admit no rank-one connection."""


class AngleTooLarge(SlipformError):
    """A rotation exceeds what a single construction can absorb."""


class AxisShearUnsupported(SlipformError):
    """Shear adjustment is not available for this slip direction."""


class HTooLarge(SlipformError):
    """The strip half-height leaves no room for the transition windows."""


class ShortSegment(SlipformError):
    """A profile segment is too short (or too contracted) to process."""


class BadAlpha(SlipformError):
    """The blend-window exponent is outside the open interval (0, 2)."""


class CFLViolation(SlipformError):
    """The requested grid violates the explicit-stepping stability bound."""


class BlowUp(SlipformError):
    """The transported field developed gradients beyond the safety factor."""


class GridTooSmall(SlipformError):
    """A residual stencil needs at least a 3 x 3 grid."""


class MeshFormatError(SlipformError):
    """A mesh document does not conform to the slipform-mesh/1 schema."""


class ProfileFormatError(SlipformError):
    """A profile file does not parse as (t_end, xi1, xi2) rows."""
