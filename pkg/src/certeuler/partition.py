"""Uniform dyadic partitions of rational intervals with a certified mesh bound.

``unif_p(b, p)`` splits [0, b] into 2**depth equal pieces with
depth = p + rat_le_abs_bound(b), which makes the mesh b * 2**-depth <= 2**-p.
The recursive bisection this mirrors is replaced by direct indexing
(identical output, linear cost); the equality is property-tested.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .rational import check_precision, format_rational, rat_le_abs_bound

__all__ = ["Partition", "UniformGrid", "unif_p_core", "unif_p", "mesh", "check_partition", "partition_to_csv"]


class UniformGrid(Sequence):
    """Read-only sequence of equally spaced rationals start + i*step.

    Values are computed on access, so multi-million-point partitions cost
    no storage.  Supports bisection and iteration like a list.
    """

    __slots__ = ("start", "step", "count")

    def __init__(self, start: Fraction, step: Fraction, count: int):
        if count < 1:
            raise ValueError("grid needs at least one point")
        self.start = Fraction(start)
        self.step = Fraction(step)
        self.count = count

    def __len__(self) -> int:
        return self.count

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(self.count))]
        if i < 0:
            i += self.count
        if not 0 <= i < self.count:
            raise IndexError(i)
        return self.start + i * self.step

    def __eq__(self, other):
        if isinstance(other, UniformGrid):
            return (self.start, self.step, self.count) == (other.start, other.step, other.count)
        if isinstance(other, (list, tuple)):
            return len(other) == self.count and all(a == b for a, b in zip(self, other))
        return NotImplemented

    def __repr__(self):
        return f"UniformGrid(start={self.start!r}, step={self.step!r}, count={self.count})"


@dataclass(frozen=True)
class Partition:
    """Weakly increasing rational points c_0 <= ... <= c_n with c_0 = lo, c_n = hi."""

    points: Sequence[Fraction]
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if len(self.points) == 0:
            raise ValueError("partition needs at least one point")
        if self.points[0] != self.lo or self.points[-1] != self.hi:
            raise ValueError("partition endpoints do not match lo/hi")


def unif_p_core(depth: int, a: Fraction, b: Fraction) -> list[Fraction]:
    """The 2**depth right-open bisection points of [a, b], ending at b.

    Depth 0 yields just (b).  Each extra level splits every piece at its
    midpoint, so the result is a + i*(b-a)/2**depth for i = 1..2**depth.
    """
    if depth < 0:
        raise ValueError("depth must be a natural number")
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    n = 1 << depth
    step = (Fraction(b) - Fraction(a)) / n
    return [a + i * step for i in range(1, n + 1)]


def unif_p(b: Fraction, p: int) -> Partition:
    """Uniform partition of [0, b] with mesh <= 2**-p."""
    check_precision(p)
    b = Fraction(b)
    if b <= 0:
        raise ValueError(f"interval endpoint must be positive, got {b}")
    depth = p + rat_le_abs_bound(b)
    n = 1 << depth
    grid = UniformGrid(Fraction(0), b / n, n + 1)
    return Partition(points=grid, lo=Fraction(0), hi=b)


def mesh(partition: Partition) -> Fraction:
    """Exact maximum gap between consecutive partition points."""
    pts = partition.points
    if len(pts) < 2:
        raise ValueError("mesh needs at least two points")
    if isinstance(pts, UniformGrid):
        return pts.step
    best = pts[1] - pts[0]
    for i in range(2, len(pts)):
        gap = pts[i] - pts[i - 1]
        if gap > best:
            best = gap
    return best


def check_partition(partition: Partition) -> None:
    """Assert the full Partition invariants (walks every point)."""
    pts = partition.points
    if pts[0] != partition.lo or pts[-1] != partition.hi:
        raise AssertionError("endpoint mismatch")
    prev = pts[0]
    for i in range(1, len(pts)):
        cur = pts[i]
        if cur < prev:
            raise AssertionError(f"points decrease at index {i}")
        prev = cur


def partition_to_csv(partition: Partition) -> str:
    """One rational per line, for debugging dumps."""
    return "\n".join(format_rational(c) for c in partition.points) + "\n"
