"""Exception and warning types shared across topowave."""


class TopowaveError(Exception):
    """Base class for numerical failures raised by topowave."""


class InvalidParametersError(TopowaveError, ValueError):
    pass


class DegenerateBandsError(TopowaveError):
    """Two bands come closer than the guard threshold somewhere on the grid."""


class CurvatureResidualError(TopowaveError):
    """Finite-difference Berry curvature carries a large imaginary residue."""


class BranchPointError(TopowaveError):
    """Transverse roots coalesce (k_y = 0 double root); step around the point."""


class NoBoundStateSectorError(TopowaveError):
    """Fewer than two decaying transverse roots at the requested (k_x, omega)."""


class SingularGaugeError(TopowaveError):
    """A section was evaluated at its gauge singularity z = zeta."""


class PoleError(TopowaveError):
    """The scattering denominator vanishes at a real, positive kappa."""


class ContractViolationError(TopowaveError):
    """The incoming amplitude of the scattering kernel vanished."""


class UnresolvedWindingError(TopowaveError):
    """Phase jumps larger than pi survived the maximal contour refinement."""


class UnderResolvedWarning(UserWarning):
    """A quadrature that should return an integer came out non-integer."""


class UnresolvedMergeWarning(UserWarning):
    """A branch leaves the k_x window while hugging the band edge."""


class NonInvariantWarning(UserWarning):
    """Result computed outside the regime where it is a topological invariant."""
