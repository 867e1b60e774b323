"""Shared test oracles: frozen high-precision constants and generators.

The frozen values below were computed independently with mpmath at 60
decimal digits and are exact rationals within 1e-50 of the named reals;
``test_oracles_self_check`` in test_acceptance.py re-derives them.  All
comparisons in the suite use tolerances no finer than 2**-40, so the
oracle error is negligible against every asserted bound.
"""

from __future__ import annotations

import random
from fractions import Fraction

from certeuler import ConstructiveReal, compress, real_add, real_from_rational, real_mul, real_sub

# dyadic 2*pi approximation, |T_END - 2*pi| <= 2**-20
T_END = Fraction(6588397, 1 << 20)

E = Fraction("2.718281828459045235360287471352662497757247093699959575")
E_HALF = Fraction("1.648721270700128146848650787814163571653776100710148012")
SQRT2 = Fraction("1.414213562373095048801688724209698078569671875376948073")
E_2PI = Fraction("535.4916555247647365030493295890471814778057976032949155")
COS_T_END = Fraction("0.999999999999954400537309611251992947125991243943213989")
SIN_T_END = Fraction("-0.0000003019915981956706965483540942327101692006451915049047527")

# the paper's reported outputs, used as cross-check reference points only
PAPER_EXP_VALUE = Fraction(55317227, 33554432)
PAPER_CIRCLE_VALUE = (Fraction(16790121, 16777216), Fraction(22267, 134217728))


def e_series_real() -> ConstructiveReal:
    """Partial sums of sum 1/k! with modulus max(p, 3).

    The tail beyond index n is < 2/(n+1)!, and (p+1)! >= 2**(p+1) for
    p >= 3, so indices at or beyond max(p, 3) agree to within 2**-p.
    """

    def seq(n: int) -> Fraction:
        total = Fraction(1)
        term = Fraction(1)
        for k in range(1, n + 1):
            term /= k
            total += term
        return total

    return ConstructiveReal(seq, lambda p: max(p, 3))


def geometric_real() -> ConstructiveReal:
    """a_n = 1 - 2**-n with modulus p; represents 1."""
    return ConstructiveReal(lambda n: 1 - Fraction(1, 1 << n), lambda p: p)


def third_decimal_real() -> ConstructiveReal:
    """Decimal truncations of 1/3 with modulus p; represents 1/3."""
    return ConstructiveReal(lambda n: Fraction(10 ** n // 3, 10 ** n), lambda p: p)


def sqrt2_newton_real() -> ConstructiveReal:
    """Newton iterates for sqrt(2) from 2; quadratic convergence makes
    modulus p generous (iterate n is within 2**-2**n of sqrt 2)."""

    def seq(n: int) -> Fraction:
        x = Fraction(2)
        for _ in range(n):
            x = (x + 2 / x) / 2
        return x

    return ConstructiveReal(seq, lambda p: p)


def make_real_cases(rng: random.Random, count: int) -> list[tuple[str, ConstructiveReal, Fraction]]:
    """Deterministic suite of (label, real, oracle value) cases.

    Oracle values are exact for rational-valued reals and frozen
    50-digit rationals for e; combinations combine oracles exactly.
    """
    base: list[tuple[str, ConstructiveReal, Fraction]] = [
        ("e-series", e_series_real(), E),
        ("geometric-1", geometric_real(), Fraction(1)),
        ("third-decimal", third_decimal_real(), Fraction(1, 3)),
    ]
    cases: list[tuple[str, ConstructiveReal, Fraction]] = list(base)
    while len(cases) < count:
        roll = rng.random()
        if roll < 0.35:
            num = rng.randrange(-999, 1000)
            den = rng.randrange(1, 512)
            q = Fraction(num, den)
            cases.append((f"const({q})", real_from_rational(q), q))
        elif roll < 0.8:
            name_a, a, va = cases[rng.randrange(len(cases))]
            name_b, b, vb = cases[rng.randrange(len(cases))]
            op = rng.choice(("add", "sub", "mul"))
            if op == "add":
                cases.append((f"({name_a})+({name_b})", real_add(a, b), va + vb))
            elif op == "sub":
                cases.append((f"({name_a})-({name_b})", real_sub(a, b), va - vb))
            else:
                cases.append((f"({name_a})*({name_b})", real_mul(a, b), va * vb))
        else:
            name, x, v = cases[rng.randrange(len(cases))]
            cases.append((f"compress({name})", compress(x), v))
    return cases[:count]
