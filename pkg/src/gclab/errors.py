"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A model or operation parameter violates its documented constraint."""


class InvalidInputError(ValueError):
    """Input data (path, profile, grid) violates a precondition."""


class CapacityError(ValueError):
    """An exhaustive search was requested beyond its tractable size."""


class AssociationViolationError(ValueError):
    """A covariance profile required to be nonnegative has a negative entry."""


class NotApplicableError(ValueError):
    """An inequality check was requested outside its hypotheses."""
