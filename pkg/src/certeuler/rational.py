"""Exact rational arithmetic helpers.

The substrate is :class:`fractions.Fraction`, which keeps every value in
lowest terms with a positive denominator after each operation.  The helpers
here add the few operations the rest of the package needs on top of plain
field arithmetic: the minimal power-of-two magnitude bound, the 1-norm of a
rational vector, and the "num/den" wire format.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

# Rationals are plain Fractions; precision exponents are plain ints >= 1,
# standing for a tolerance of 2**-p.
Rational = Fraction
PrecisionExp = int

__all__ = [
    "Rational",
    "PrecisionExp",
    "rat",
    "rat_add",
    "rat_sub",
    "rat_mul",
    "rat_div",
    "rat_floor",
    "rat_le_abs_bound",
    "rat_norm1",
    "check_precision",
    "format_rational",
    "parse_rational",
    "format_vector",
]


def rat(numerator: int, denominator: int = 1) -> Fraction:
    """Build a normalized rational from an integer pair."""
    return Fraction(numerator, denominator)


def check_precision(p: int) -> int:
    """Validate a precision exponent (p >= 1, meaning tolerance 2**-p)."""
    if not isinstance(p, int) or isinstance(p, bool) or p < 1:
        raise ValueError(f"precision exponent must be an integer >= 1, got {p!r}")
    return p


def rat_add(a: Fraction, b: Fraction) -> Fraction:
    return a + b


def rat_sub(a: Fraction, b: Fraction) -> Fraction:
    return a - b


def rat_mul(a: Fraction, b: Fraction) -> Fraction:
    return a * b


def rat_div(a: Fraction, b: Fraction) -> Fraction:
    if b == 0:
        raise ZeroDivisionError("rational division by zero")
    return a / b


def rat_floor(a: Fraction) -> int:
    """Greatest integer <= a (rounds toward -inf, also for negatives)."""
    return math.floor(a)


def rat_le_abs_bound(a: Fraction) -> int:
    """Smallest p >= 1 with |a| <= 2**p."""
    a = abs(Fraction(a))
    num, den = a.numerator, a.denominator
    p = max(1, num.bit_length() - den.bit_length() - 1)
    while (den << p) < num:
        p += 1
    return p


def rat_norm1(v: Iterable[Fraction]) -> Fraction:
    """1-norm of a rational vector, exact; the empty sum is 0."""
    total = Fraction(0)
    for x in v:
        total += abs(x)
    return total


def format_rational(a: Fraction) -> str:
    """Serialize as "num/den", or just "num" for integers."""
    if a.denominator == 1:
        return str(a.numerator)
    return f"{a.numerator}/{a.denominator}"


def parse_rational(text: str) -> Fraction:
    """Inverse of :func:`format_rational`; accepts "n" and "num/den"."""
    return Fraction(text.strip())


def format_vector(v: Sequence[Fraction]) -> list[str]:
    return [format_rational(x) for x in v]
