"""
Engine Errors
=============
Exception hierarchy shared by every engine module.

Each class carries a short ``code`` that the spec evaluator puts into result
records (e.g. ``"ZeroDenominator: ..."``).
"""


class ProbeFrameworkError(Exception):
    """Base class of all engine failures."""

    code = "ProbeFrameworkError"


class DimensionMismatchError(ProbeFrameworkError, ValueError):
    code = "DimensionMismatch"


class SpaceMismatchError(ProbeFrameworkError, ValueError):
    code = "SpaceMismatch"


class InvalidConeError(ProbeFrameworkError, ValueError):
    code = "InvalidCone"


class ConeSolverError(ProbeFrameworkError, RuntimeError):
    code = "ConeSolverNonConvergence"


class AsymmetricPairingError(ProbeFrameworkError, ValueError):
    code = "AsymmetricPairing"


class DegeneratePairingError(ProbeFrameworkError, ValueError):
    code = "DegeneratePairing"


class InvalidBasisError(ProbeFrameworkError, ValueError):
    code = "InvalidSignedBasis"


class UnknownEntityError(ProbeFrameworkError, LookupError):
    code = "UnknownEntity"

    def __str__(self) -> str:
        # LookupError would otherwise repr() the message
        return str(self.args[0]) if self.args else self.code


class DuplicateEntityError(ProbeFrameworkError, ValueError):
    code = "DuplicateEntity"


class RepeatedAtomError(ProbeFrameworkError, ValueError):
    code = "RepeatedAtom"


class EmptyInterfaceError(ProbeFrameworkError, ValueError):
    code = "EmptyInterface"


class GluingMismatchError(ProbeFrameworkError, ValueError):
    code = "GluingMismatch"


class RegionMismatchError(ProbeFrameworkError, ValueError):
    code = "RegionMismatch"


class IncompleteAssignmentError(ProbeFrameworkError, ValueError):
    code = "IncompleteAssignment"


class ZeroDenominatorError(ProbeFrameworkError, ArithmeticError):
    """The conditioning value vanished: b is incompatible with the apparatus."""

    code = "ZeroDenominator"

    def __init__(self, message: str, numerator: float, denominator: float):
        super().__init__(message)
        self.numerator = numerator
        self.denominator = denominator


class NonSelfAdjointError(ProbeFrameworkError, ValueError):
    code = "NonSelfAdjoint"


class NonPositiveEffectError(ProbeFrameworkError, ValueError):
    """An effect lies outside 0 <= E (or E <= I where a complement is formed)."""

    code = "NonPositiveEffect"


class NonUnitaryError(ProbeFrameworkError, ValueError):
    code = "NonUnitary"


class KrausShapeError(ProbeFrameworkError, ValueError):
    code = "KrausShape"


class InvalidStateError(ProbeFrameworkError, ValueError):
    code = "InvalidState"


class AmbiguousBoundaryError(ProbeFrameworkError, ValueError):
    code = "AmbiguousBoundary"


class KernelError(ProbeFrameworkError, ValueError):
    code = "InvalidKernel"


class NonFiniteValueError(ProbeFrameworkError, ValueError):
    code = "NonFiniteValue"


class FailedDependencyError(ProbeFrameworkError, LookupError):
    """A spec declaration references one that could not be built."""

    code = "FailedDependency"


def error_code(exc: BaseException) -> str:
    """Return the record code for an exception (class name for foreign ones)."""
    return getattr(exc, "code", type(exc).__name__)
