"""Exception hierarchy shared across the package.

Every error raised on purpose derives from :class:`DuelbandError`, so callers
can catch one base class at the CLI boundary and map it to an exit code.
"""

from __future__ import annotations

__all__ = [
    "DuelbandError",
    "NonSquareError",
    "EntryOutOfRangeError",
    "SkewViolationError",
    "DiagonalViolationError",
    "NoCondorcetWinnerError",
    "SubsetTooLargeError",
    "InvalidGapRangeError",
    "IndexOutOfRangeError",
    "AlphaTooSmallError",
    "AlphaNotGreaterThanOneError",
    "PairMismatchError",
    "ZeroGapError",
    "DomainError",
    "VerificationFailure",
    "ConfigError",
]


class DuelbandError(Exception):
    """Base class for all package-specific errors."""


class NonSquareError(DuelbandError):
    """Raw preference data is not a square matrix."""


class EntryOutOfRangeError(DuelbandError):
    """A preference entry is not a finite number in [0, 1]."""


class SkewViolationError(DuelbandError):
    """Some pair has p_ij + p_ji deviating from 1 beyond tolerance."""


class DiagonalViolationError(DuelbandError):
    """A diagonal entry deviates from 1/2 beyond tolerance."""


class NoCondorcetWinnerError(DuelbandError):
    """The matrix has no arm that beats every other arm outright."""


class SubsetTooLargeError(DuelbandError):
    """Requested subset size exceeds the number of arms."""


class InvalidGapRangeError(DuelbandError):
    """Planted-gap interval must satisfy 0 < lo <= hi < 1/2."""


class IndexOutOfRangeError(DuelbandError):
    """Arm index outside [0, K)."""


class AlphaTooSmallError(DuelbandError):
    """Exploration parameter alpha must exceed 1/2."""


class AlphaNotGreaterThanOneError(DuelbandError):
    """The expected-regret bound needs alpha > 1."""


class PairMismatchError(DuelbandError):
    """Duel outcome fed to an algorithm state it does not belong to."""


class ZeroGapError(DuelbandError):
    """A non-winner arm has a zero gap, so count coefficients diverge."""


class DomainError(DuelbandError):
    """Argument outside the mathematical domain of the function."""


class VerificationFailure(DuelbandError):
    """A numerical lemma check failed.

    Carries the witness so the caller can report exactly which case broke:
    ``name`` identifies the check, ``witness`` is a small dict of the inputs
    and both sides of the failed comparison.
    """

    def __init__(self, name: str, witness: dict):
        self.name = name
        self.witness = witness
        super().__init__(f"{name} failed at {witness!r}")


class ConfigError(DuelbandError):
    """Experiment configuration is malformed or inconsistent."""
