"""Constructive real numbers as regular Cauchy sequences with explicit moduli.

A real is a pair (seq, modulus): ``seq(n)`` is the n-th rational approximant
and ``modulus(p)`` an index beyond which any two approximants differ by at
most 2**-p.  The modulus must be weakly increasing.  Everything needed to
extract a guaranteed approximation travels with the number; there is no
floating point anywhere.

Arithmetic produces new (seq, modulus) pairs whose regularity follows from
the operands'.  ``compress`` re-encodes a real over dyadic denominators,
which is what keeps coefficient growth bounded inside the Euler solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .rational import check_precision, format_rational, rat_le_abs_bound

__all__ = [
    "ConstructiveReal",
    "RealVector",
    "real_from_rational",
    "real_add",
    "real_sub",
    "real_mul",
    "real_abs",
    "real_approx",
    "real_vec_approx",
    "vec_split_precision",
    "is_nonneg_up_to",
    "is_pos_up_to",
    "real_eq_up_to",
    "compress",
    "check_regularity",
    "seq_table_csv",
]


def _ceil_log2(n: int) -> int:
    return (n - 1).bit_length()


class ConstructiveReal:
    """A regular Cauchy sequence of rationals with modulus of convergence.

    ``seq`` must be a pure function of the index; values are memoized per
    index.  Memo writes are single dict assignments, atomic under the GIL,
    and recomputation races are idempotent, so instances can be shared
    freely between threads.
    """

    __slots__ = ("_seq", "_modulus", "_seq_cache", "_mod_cache")

    def __init__(self, seq: Callable[[int], Fraction], modulus: Callable[[int], int]):
        self._seq = seq
        self._modulus = modulus
        self._seq_cache: dict[int, Fraction] = {}
        self._mod_cache: dict[int, int] = {}

    def seq_at(self, n: int) -> Fraction:
        cache = self._seq_cache
        v = cache.get(n)
        if v is None:
            v = Fraction(self._seq(n))
            cache[n] = v
        return v

    def modulus_at(self, p: int) -> int:
        cache = self._mod_cache
        v = cache.get(p)
        if v is None:
            v = int(self._modulus(p))
            if v < 0:
                raise ValueError("modulus returned a negative index")
            cache[p] = v
        return v

    # Convenience operators; the module-level functions are the primary API.
    def __add__(self, other: "ConstructiveReal") -> "ConstructiveReal":
        return real_add(self, other)

    def __sub__(self, other: "ConstructiveReal") -> "ConstructiveReal":
        return real_sub(self, other)

    def __mul__(self, other: "ConstructiveReal") -> "ConstructiveReal":
        return real_mul(self, other)

    def __abs__(self) -> "ConstructiveReal":
        return real_abs(self)

    def __repr__(self):
        a = self.seq_at(self.modulus_at(8))
        return f"<ConstructiveReal ~ {format_rational(a)} (within 2^-8)>"


@dataclass(frozen=True)
class RealVector:
    """Fixed-dimension vector of constructive reals."""

    components: tuple[ConstructiveReal, ...]

    def __post_init__(self):
        if len(self.components) < 1:
            raise ValueError("vector needs at least one component")

    @property
    def dim(self) -> int:
        return len(self.components)


def real_from_rational(a: Fraction) -> ConstructiveReal:
    """Embed a rational as the constant sequence with modulus 0."""
    a = Fraction(a)
    return ConstructiveReal(lambda n: a, lambda p: 0)


def real_add(x: ConstructiveReal, y: ConstructiveReal) -> ConstructiveReal:
    return ConstructiveReal(
        lambda n: x.seq_at(n) + y.seq_at(n),
        lambda p: max(x.modulus_at(p + 1), y.modulus_at(p + 1)),
    )


def real_sub(x: ConstructiveReal, y: ConstructiveReal) -> ConstructiveReal:
    return ConstructiveReal(
        lambda n: x.seq_at(n) - y.seq_at(n),
        lambda p: max(x.modulus_at(p + 1), y.modulus_at(p + 1)),
    )


def real_abs(x: ConstructiveReal) -> ConstructiveReal:
    # ||a| - |b|| <= |a - b|, so the modulus carries over unchanged.
    return ConstructiveReal(lambda n: abs(x.seq_at(n)), x.modulus_at)


def _magnitude_exp(x: ConstructiveReal) -> int:
    """k with |x_n| <= 2**k for every index n >= modulus(1).

    Witnessed by the approximant at modulus(1): any later element is within
    1/2 of it, and rat_le_abs_bound(a) + 2 leaves room for that slack.
    """
    return rat_le_abs_bound(x.seq_at(x.modulus_at(1))) + 2


def real_mul(x: ConstructiveReal, y: ConstructiveReal) -> ConstructiveReal:
    kx = _magnitude_exp(x)
    ky = _magnitude_exp(y)
    mx1 = x.modulus_at(1)
    my1 = y.modulus_at(1)

    def modulus(p: int) -> int:
        # |a_n b_n - a_m b_m| <= 2**kx |b_n - b_m| + 2**ky |a_n - a_m|;
        # the max with the level-1 indices keeps the magnitude bounds valid.
        return max(x.modulus_at(p + 1 + ky), y.modulus_at(p + 1 + kx), mx1, my1)

    return ConstructiveReal(lambda n: x.seq_at(n) * y.seq_at(n), modulus)


def real_approx(x: ConstructiveReal, p: int) -> Fraction:
    """A rational within 2**-p of x: the approximant at index modulus(p)."""
    check_precision(p)
    return x.seq_at(x.modulus_at(p))


def vec_split_precision(dim: int, p: int) -> int:
    """Per-component precision so the 1-norm of the errors stays <= 2**-p."""
    return p + _ceil_log2(dim) if dim > 1 else p


def real_vec_approx(x: RealVector | Sequence[ConstructiveReal], p: int) -> list[Fraction]:
    """A rational vector within 2**-p of x in the 1-norm.

    Each component is approximated at p + ceil(log2(dim)); the per-component
    errors then sum to at most dim * 2**-(p + ceil(log2 dim)) <= 2**-p.
    """
    check_precision(p)
    components = x.components if isinstance(x, RealVector) else tuple(x)
    if len(components) < 1:
        raise ValueError("vector needs at least one component")
    pq = vec_split_precision(len(components), p)
    return [real_approx(c, pq) for c in components]


def is_nonneg_up_to(x: ConstructiveReal, p: int) -> bool:
    """Witness of x >= 0 up to tolerance 2**-p: -2**-p <= a_{M(p+1)}."""
    check_precision(p)
    return -Fraction(1, 1 << p) <= x.seq_at(x.modulus_at(p + 1))


def is_pos_up_to(x: ConstructiveReal, p: int) -> bool:
    """Strict-positivity witness: 2**-p <= a_{M(p+1)}."""
    check_precision(p)
    return Fraction(1, 1 << p) <= x.seq_at(x.modulus_at(p + 1))


def real_eq_up_to(x: ConstructiveReal, y: ConstructiveReal, p: int) -> bool:
    """Equality up to 2**-p, tested on the level-(p+1) approximants."""
    check_precision(p)
    a = x.seq_at(x.modulus_at(p + 1))
    b = y.seq_at(y.modulus_at(p + 1))
    return abs(a - b) <= Fraction(1, 1 << p)


def compress(x: ConstructiveReal) -> ConstructiveReal:
    """The same real re-encoded over dyadic denominators.

    b_n = floor(a_{M(n)} * 2**n) / 2**n, with new modulus p -> p + 2.
    Then |b_n - x| <= 2**-n (floor) + 2**-n (regularity), so indices >= p+2
    are within 2**-p of each other.  Denominators divide 2**n, which bounds
    coefficient growth no matter how complex the source sequence was.
    """

    def seq(n: int) -> Fraction:
        a = x.seq_at(x.modulus_at(max(n, 1)))
        if n == 0:
            return Fraction((a.numerator // a.denominator))
        scale = 1 << n
        return Fraction((a.numerator * scale) // a.denominator, scale)

    return ConstructiveReal(seq, lambda p: p + 2)


def check_regularity(x: ConstructiveReal, p_max: int = 12, spread: int = 16) -> None:
    """Sampled check of regularity and modulus monotonicity.

    For each p <= p_max, compares approximants at a handful of indices at
    and beyond modulus(p).  A pass is evidence, not proof.
    """
    prev = x.modulus_at(1)
    for p in range(1, p_max + 1):
        m = x.modulus_at(p)
        if m < prev:
            raise AssertionError(f"modulus decreases between p={p - 1} and p={p}")
        prev = m
        tol = Fraction(1, 1 << p)
        idx = [m, m + 1, m + 3, m + spread]
        vals = [x.seq_at(i) for i in idx]
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                if abs(vals[i] - vals[j]) > tol:
                    raise AssertionError(
                        f"regularity violated at p={p}: |a_{idx[i]} - a_{idx[j]}| > 2^-{p}"
                    )


def seq_table_csv(x: ConstructiveReal, upto: int) -> str:
    """Debug dump: CSV table of (n, a_n) for n = 0..upto."""
    lines = ["n,a_n"]
    for n in range(upto + 1):
        lines.append(f"{n},{format_rational(x.seq_at(n))}")
    return "\n".join(lines) + "\n"
