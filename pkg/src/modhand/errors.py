"""Exception types shared across the package."""

from __future__ import annotations


class ModhandError(Exception):
    """Base class for all errors raised by this package."""


class ConfigSchemaError(ModhandError):
    """A configuration document violates the schema.

    The offending field path is kept in ``field`` and always appears in the
    message so CLI users can locate the problem without a traceback.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ValidationError(ModhandError):
    """A structurally well-formed value violates a model invariant."""


class SingularTrainError(ModhandError):
    """The composite differential matrix is not invertible."""


class DegenerateCouplingError(ModhandError):
    """The rigid coupling ratio has a zero leading entry."""


class SingularStiffnessError(ModhandError):
    """The joint stiffness matrix is singular or not positive definite."""


class InfeasibleStartError(ModhandError):
    """Initial configuration penetrates the object beyond the recovery tolerance."""


class NonConvergedError(ModhandError):
    """Equilibrium iteration hit the cap; ``best`` carries the last iterate.

    ``best`` is the (JointState, TransmissionState, contacts) triple of the
    deepest iterate reached, so callers can inspect or resume.
    """

    def __init__(self, message: str, best=None):
        self.best = best
        super().__init__(message)


class PreconditionError(ModhandError):
    """An operation was called outside its documented precondition."""


class SweepError(ModhandError):
    """A drive sweep failed at a specific step; ``step`` is the 0-based index."""

    def __init__(self, step: int, cause: Exception):
        self.step = step
        self.cause = cause
        super().__init__(f"sweep failed at step {step}: {cause}")
