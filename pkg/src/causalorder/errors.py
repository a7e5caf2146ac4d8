"""Exception types shared across the package."""

from __future__ import annotations


class CausalOrderError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(CausalOrderError, ValueError):
    """Operand shapes or subsystem dimensions are inconsistent."""


class NonHermitian(CausalOrderError, ValueError):
    """An operator that must be Hermitian is not (within tolerance)."""


class SingularAnchor(CausalOrderError):
    """The positive-definite anchor of a Jordan inversion has a (near) zero eigenvalue."""


class NonOrthonormalBasis(CausalOrderError, ValueError):
    """Measurement vectors for a setting do not form an orthonormal basis."""


class BadContrastRank(CausalOrderError, ValueError):
    """Contrast rows are not independent of the all-ones row."""


class A1Violation(CausalOrderError):
    """The contrast operators do not form a basis of the Hermitian operators."""


class A3Violation(CausalOrderError):
    """A measurement effect is not rank one."""


class C0Degenerate(CausalOrderError):
    """Some first-party outcome has (near) zero probability, so conditionals are undefined."""


class InvalidStrategy(CausalOrderError, ValueError):
    """A strategy or channel description is malformed or out of range."""
