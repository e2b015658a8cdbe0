"""Semantic exception hierarchy.

Public functions never raise bare ``ValueError``; every failure mode has a
named class so callers (and the CLI) can map errors to exit codes.
"""


class MincopError(Exception):
    """Base error for this package."""


class InputError(MincopError, ValueError):
    """Inputs violate a contract: wrong dimension, malformed point, bad weights."""


class DimensionMismatchError(InputError):
    """Operands live in different ambient dimensions."""


class DomainError(InputError):
    """A constructor was asked for an object that does not exist
    (e.g. the lower Fréchet-Hoeffding bound for d >= 3)."""


class UnsupportedRepresentationError(MincopError):
    """The requested operation has no algorithm for this representation
    (e.g. sampling an extreme Clayton node)."""


class ValidationError(MincopError):
    """A would-be copula failed a hard validity check (negative cell mass,
    non-uniform margins beyond tolerance)."""


class SpecError(InputError):
    """A JSON copula spec could not be parsed."""


class RefuterInternalError(MincopError):
    """A refutation certificate failed its own verification.

    This must never fire on valid inputs; it exists as an executable oracle
    for the surgery construction.
    """
