"""Exact arithmetic helpers for rational thresholds involving square roots.

Several bounds in this package compare a rational quantity against
``coeff * sqrt(radicand)`` where the radicand (typically the extractor error
``epsilon``) need not be a perfect square.  All such comparisons are done by
squaring, which is exact; no floats are involved in any pass/fail decision.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

from .errors import ParameterError


def frac_sqrt(value: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None if irrational."""
    if value < 0:
        raise ParameterError(f"square root of negative rational {value}")
    num, den = value.numerator, value.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def le_scaled_sqrt(lhs: Fraction | int, coeff: Fraction | int, radicand: Fraction | int) -> bool:
    """Whether ``lhs <= coeff * sqrt(radicand)``, exactly.

    Requires ``coeff >= 0`` and ``radicand >= 0``.
    """
    lhs, coeff, radicand = Fraction(lhs), Fraction(coeff), Fraction(radicand)
    if coeff < 0 or radicand < 0:
        raise ParameterError("le_scaled_sqrt requires coeff >= 0 and radicand >= 0")
    if lhs <= 0:
        return True
    return lhs * lhs <= coeff * coeff * radicand


def ge_scaled_sqrt(lhs: Fraction | int, coeff: Fraction | int, radicand: Fraction | int) -> bool:
    """Whether ``lhs >= coeff * sqrt(radicand)``, exactly."""
    lhs, coeff, radicand = Fraction(lhs), Fraction(coeff), Fraction(radicand)
    if coeff < 0 or radicand < 0:
        raise ParameterError("ge_scaled_sqrt requires coeff >= 0 and radicand >= 0")
    if lhs < 0:
        return False
    return lhs * lhs >= coeff * coeff * radicand


def ceil_scaled_sqrt(coeff: Fraction | int, radicand: Fraction | int) -> int:
    """Smallest integer ``g`` with ``g >= coeff * sqrt(radicand)``, exactly."""
    coeff, radicand = Fraction(coeff), Fraction(radicand)
    if coeff < 0 or radicand < 0:
        raise ParameterError("ceil_scaled_sqrt requires coeff >= 0 and radicand >= 0")
    if coeff == 0 or radicand == 0:
        return 0
    # g >= c*sqrt(r)  <=>  g^2 >= c^2 * r (for g >= 0); start near the float
    # estimate and correct with exact comparisons.
    target = coeff * coeff * radicand
    guess = isqrt(target.numerator // target.denominator)
    while Fraction(guess * guess) < target:
        guess += 1
    while guess > 0 and Fraction((guess - 1) * (guess - 1)) >= target:
        guess -= 1
    return guess


def ceil_log2(value: int) -> int:
    """Smallest integer ``e`` with ``2**e >= value`` (value >= 1)."""
    if value < 1:
        raise ParameterError(f"ceil_log2 domain is positive integers, got {value}")
    return (value - 1).bit_length()
