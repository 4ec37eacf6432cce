"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An argument is outside the domain of the operation."""


class RequiresIrreducible(ValueError):
    """The operation needs an irreducible (strongly connected) shift."""


class PreconditionViolation(ValueError):
    """A documented precondition could not be established."""


class DegenerateSample(RuntimeError):
    """A sampled trajectory never exhibits the event being measured."""
