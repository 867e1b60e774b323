"""Cauchy-Euler construction of approximate IVP solutions with a defect certificate.

Given a uniformly continuous right-hand side f bounded by C on the box
|t| <= t_a, |x - x0|_1 <= x_b, the solver builds a piecewise-linear curve
phi on [0, T], T = min(t_a, x_b / C), whose defect |phi'(t) - f(t, phi(t))|_1
is at most 2**-p wherever phi' is defined.  The construction follows the
classical Peano/Euler existence argument made fully explicit:

  * a continuity level q = omega(p+1) so that input perturbations of
    1-norm at most 2**(1-q) move f by at most 2**-(p+1);
  * a uniform dyadic partition with mesh <= min(2**-q, 2**-(q+k)) where
    2**k bounds C, so the polygon drifts less than 2**-q inside a step;
  * slopes within 2**-(p+1) of f at the left knot, with |s|_1 <= C kept
    exact by rescaling onto the C sphere when the approximation overshoots.

Exactness is rational end to end.  Against the (Lipschitz-unique) exact
solution, the defect integrates to the Gronwall bound
(2**-p / L) (e^(L T) - 1), see ``global_error_bound``.
"""

from __future__ import annotations

import math
import random
from array import array
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .creal import vec_split_precision
from .partition import Partition, UniformGrid, unif_p
from .rational import check_precision, format_rational, rat_le_abs_bound, rat_norm1
from .ucf import DomainError, UcfVector, Violation, apply_vector

__all__ = [
    "ConfigurationError",
    "EulerProblem",
    "EulerSolution",
    "validate_problem",
    "euler_map",
    "euler_map_fast",
    "solve",
    "solve_chained",
    "eval_solution",
    "defect_certificate",
    "exp_upper_bound",
    "global_error_bound",
    "max_denominator_bits",
    "solution_to_json_dict",
    "solution_to_csv",
]

_INT64_MAX = (1 << 63) - 1


class ConfigurationError(ValueError):
    """Problem data is inconsistent (box outside domain, bound violated, ...)."""


# ---------------------------------------------------------------------------
# storage


class _PackedVectors(Sequence):
    """Append-only sequence of exact rational vectors.

    While all entries are dyadic with denominator dividing 2**exp and
    scaled numerators fitting in int64 they are packed into an array('q');
    on the first entry that does not fit, storage transparently falls back
    to a plain list of Fraction tuples.  Multi-million-step certified runs
    stay in the packed regime whenever compression is on.
    """

    __slots__ = ("_dim", "_exp", "_nums", "_items")

    def __init__(self, dim: int, exp: Optional[int]):
        self._dim = dim
        self._exp = exp
        if exp is None:
            self._nums = None
            self._items: Optional[list] = []
        else:
            self._nums = array("q")
            self._items = None

    def __len__(self) -> int:
        if self._nums is None:
            return len(self._items)
        return len(self._nums) // self._dim

    def _unpack(self, i: int) -> tuple[Fraction, ...]:
        base = i * self._dim
        den = 1 << self._exp
        return tuple(Fraction(self._nums[base + j], den) for j in range(self._dim))

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        n = len(self)
        if i < 0:
            i += n
        if not 0 <= i < n:
            raise IndexError(i)
        if self._nums is None:
            return self._items[i]
        return self._unpack(i)

    def _try_pack(self, vec) -> Optional[list[int]]:
        exp = self._exp
        out = []
        for f in vec:
            den = f.denominator
            if den & (den - 1):
                return None
            shift = exp - (den.bit_length() - 1)
            if shift < 0:
                return None
            num = f.numerator << shift
            if not -_INT64_MAX <= num <= _INT64_MAX:
                return None
            out.append(num)
        return out

    def _fall_back(self) -> None:
        self._items = [self._unpack(i) for i in range(len(self))]
        self._nums = None

    def append(self, vec: Sequence[Fraction]) -> None:
        if self._nums is not None:
            packed = self._try_pack(vec)
            if packed is not None:
                self._nums.extend(packed)
                return
            self._fall_back()
        self._items.append(tuple(vec))

    def extend_tail(self, other: Sequence, skip: int) -> None:
        """Append other[skip:], using a raw array copy when layouts match."""
        if (
            self._nums is not None
            and isinstance(other, _PackedVectors)
            and other._nums is not None
            and other._exp == self._exp
            and other._dim == self._dim
        ):
            self._nums.extend(other._nums[skip * self._dim:])
            return
        for i in range(skip, len(other)):
            self.append(other[i])

    def max_denominator_bits(self) -> int:
        if len(self) == 0:
            return 0
        if self._nums is None:
            return max(f.denominator.bit_length() for vec in self._items for f in vec)
        den = 1 << self._exp
        best = 1
        for n in self._nums:
            bits = (den // math.gcd(n, den)).bit_length()
            if bits > best:
                best = bits
        return best


# ---------------------------------------------------------------------------
# problem and solution types


@dataclass(frozen=True)
class EulerProblem:
    """An IVP instance: rhs, start state, validity box, bound C, optional L.

    The box B' = {|t| <= t_a, |x - x0|_1 <= x_b} must sit inside the rhs
    domain ball, and |f|_1 <= C must hold on B'.  C is problem data, as in
    the underlying existence theorem; it is sanity-checked by sampling but
    not inferred.
    """

    rhs: UcfVector
    x0: tuple[Fraction, ...]
    t_a: Fraction
    x_b: Fraction
    bound_c: Fraction
    lipschitz_l: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(Fraction(c) for c in self.x0))
        object.__setattr__(self, "t_a", Fraction(self.t_a))
        object.__setattr__(self, "x_b", Fraction(self.x_b))
        object.__setattr__(self, "bound_c", Fraction(self.bound_c))
        if self.lipschitz_l is not None:
            object.__setattr__(self, "lipschitz_l", Fraction(self.lipschitz_l))


@dataclass
class EulerSolution:
    """Piecewise-linear approximate solution with certified defect 2**-p.

    nodes[i] is the value at partition point i; slopes[i] rules the segment
    [c_i, c_{i+1}], so nodes[i+1] = nodes[i] + (c_{i+1} - c_i) * slopes[i]
    holds exactly.  q records the continuity level used for the mesh.
    """

    partition: Partition
    nodes: Sequence[tuple[Fraction, ...]]
    slopes: Sequence[tuple[Fraction, ...]]
    p: int
    horizon: Fraction
    q: Optional[int] = None

    @property
    def defect_bound(self) -> Fraction:
        return Fraction(1, 1 << self.p)

    @property
    def dim(self) -> int:
        return len(self.nodes[0])


def _state_ball_points(x0, x_b, rng, count):
    pts = [tuple(x0)]
    for j in range(len(x0)):
        for sign in (1, -1):
            corner = list(x0)
            corner[j] += sign * x_b
            pts.append(tuple(corner))
    for _ in range(count):
        weights = [Fraction(rng.randrange(1, 64)) for _ in x0]
        total = sum(weights)
        r = x_b * Fraction(rng.randrange(1 << 10), 1 << 10)
        pts.append(tuple(
            c + (w / total) * r * (1 if rng.random() < 0.5 else -1)
            for c, w in zip(x0, weights)
        ))
    return pts


def validate_problem(problem: EulerProblem, samples: int = 6, seed: int = 0) -> None:
    """Raise ConfigurationError on inconsistent problem data.

    Containment of the box in the rhs ball is decided exactly; the bound C
    is checked on corner and random sample points only (a pass is evidence,
    a failure is a proof of inconsistency).
    """
    f = problem.rhs
    if problem.t_a <= 0 or problem.x_b <= 0 or problem.bound_c <= 0:
        raise ConfigurationError("t_a, x_b and C must all be positive")
    if problem.lipschitz_l is not None and problem.lipschitz_l <= 0:
        raise ConfigurationError("Lipschitz constant must be positive when given")
    if len(problem.x0) != f.dim_out:
        raise ConfigurationError(
            f"x0 has dimension {len(problem.x0)}, rhs expects {f.dim_out}"
        )
    ct = f.center[0]
    cx = f.center[1:]
    t_reach = max(abs(-problem.t_a - ct), abs(problem.t_a - ct))
    x_reach = rat_norm1([a - c for a, c in zip(problem.x0, cx)]) + problem.x_b
    if t_reach + x_reach > f.radius:
        raise ConfigurationError(
            "problem box is not contained in the rhs domain ball: reach "
            f"{format_rational(t_reach + x_reach)} > radius {format_rational(f.radius)}"
        )
    rng = random.Random(seed)
    tol = Fraction(1, 1 << 8)
    times = (Fraction(0), problem.t_a, -problem.t_a, problem.t_a / 2)
    for xpt in _state_ball_points(problem.x0, problem.x_b, rng, samples):
        for t in times:
            val = apply_vector(f, t, xpt, 8)
            norm = rat_norm1(val)
            if norm > problem.bound_c + tol:
                raise ConfigurationError(
                    f"sampled |f(t, x)|_1 = {format_rational(norm)} at t={format_rational(t)} "
                    f"exceeds C = {format_rational(problem.bound_c)}"
                )


# ---------------------------------------------------------------------------
# the Euler maps


def euler_map(
    f: UcfVector,
    a: Sequence[Fraction],
    n: int,
    d: Fraction,
    p: int,
    compress: bool = True,
) -> tuple[Fraction, ...]:
    """Reference Euler recursion, kept literal including the duplicated
    recursive call, so it can serve as the oracle for euler_map_fast.
    Exponential in n; use only for small step counts.
    """
    if n < 0:
        raise ValueError("step count must be a natural number")
    if n == 0:
        return tuple(Fraction(c) for c in a)
    prev = euler_map(f, a, n - 1, d, p, compress)
    again = euler_map(f, a, n - 1, d, p, compress)
    slope = apply_vector(f, (n - 1) * d, again, p, compress)
    return tuple(b + d * s for b, s in zip(prev, slope))


def euler_map_fast(
    f: UcfVector,
    n: int,
    state: tuple[Sequence[Fraction], Sequence[Fraction]],
    d: Fraction,
    p: int,
    compress: bool = True,
) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Iterative Euler accumulation over a (previous, current) pair.

    The right component after n steps equals euler_map(f, a, n, d, p) when
    started from (anything, a); times ascend k*d for k = 0..n-1, as the
    equivalence with the reference recursion requires.
    """
    if n < 0:
        raise ValueError("step count must be a natural number")
    left = tuple(Fraction(c) for c in state[0])
    right = tuple(Fraction(c) for c in state[1])
    for k in range(n):
        slope = apply_vector(f, k * d, right, p, compress)
        left, right = right, tuple(b + d * s for b, s in zip(right, slope))
    return (left, right)


# ---------------------------------------------------------------------------
# the solver


def _partition_precision(T: Fraction, mesh_exp: int) -> int:
    """Least unif_p precision whose mesh T * 2**-(pp + bound(T)) <= 2**-mesh_exp."""
    shift = rat_le_abs_bound(T)
    pp = 1
    while T * Fraction(1, 1 << (pp + shift)) > Fraction(1, 1 << mesh_exp):
        pp += 1
    return pp


def solve(problem: EulerProblem, p: int, compress: bool = True) -> EulerSolution:
    """Construct the defect-certified Euler polygon on [0, T].

    Slopes are extracted at precision p+2 and, if the rational
    approximation overshoots the bound C, rescaled onto the C sphere: the
    rescale moves the slope by at most its own extraction error, so the
    combined slope error stays within 2**-(p+1) while |s_i|_1 <= C holds
    exactly.  Admissibility |b_i - x0|_1 <= x_b then follows from
    |b_i - x0|_1 <= c_i * C <= T * C <= x_b, with no per-step check needed.
    """
    check_precision(p)
    validate_problem(problem)
    f = problem.rhs
    dim = f.dim_out
    C = problem.bound_c

    q = f.cont_modulus(p + 1)
    mesh_exp = q + rat_le_abs_bound(C)
    T = min(problem.t_a, problem.x_b / C)
    part = unif_p(T, _partition_precision(T, mesh_exp))
    pts = part.points
    n_steps = len(pts) - 1
    d = pts.step if isinstance(pts, UniformGrid) else (pts[1] - pts[0])

    slope_p = p + 2
    pq = vec_split_precision(dim, slope_p)
    comp_exp = pq + 2  # compression index: slope denominators divide 2**comp_exp

    slope_hint: Optional[int] = comp_exp if compress else None
    node_hint: Optional[int] = None
    if compress:
        dden = d.denominator
        if dden & (dden - 1) == 0:
            node_hint = (dden.bit_length() - 1) + comp_exp
            for c in problem.x0:
                cden = c.denominator
                if cden & (cden - 1):
                    node_hint = None
                    break
                node_hint = max(node_hint, cden.bit_length() - 1)

    nodes = _PackedVectors(dim, node_hint)
    slopes = _PackedVectors(dim, slope_hint)

    b = problem.x0
    nodes.append(b)
    for i in range(n_steps):
        s = apply_vector(f, pts[i], b, slope_p, compress)
        norm = rat_norm1(s)
        if norm > C:
            scale = C / norm
            s = tuple(c * scale for c in s)
        slopes.append(s)
        b = tuple(bj + d * sj for bj, sj in zip(b, s))
        nodes.append(b)

    return EulerSolution(partition=part, nodes=nodes, slopes=slopes, p=p, horizon=T, q=q)


def eval_solution(sol: EulerSolution, t: Fraction) -> tuple[Fraction, ...]:
    """Exact value of the polygon at t in [0, horizon].

    The segment [c_{i-1}, c_i] containing t is anchored forward:
    phi(t) = b_{i-1} + (t - c_{i-1}) s_{i-1}, which agrees with the nodes
    at every knot.
    """
    t = Fraction(t)
    if t < 0 or t > sol.horizon:
        raise DomainError(f"t = {format_rational(t)} outside [0, {format_rational(sol.horizon)}]")
    pts = sol.partition.points
    i = bisect_right(pts, t)
    if i >= len(pts):
        i = len(pts) - 1
    if i < 1:
        i = 1
    b = sol.nodes[i - 1]
    s = sol.slopes[i - 1]
    dt = t - pts[i - 1]
    return tuple(bj + dt * sj for bj, sj in zip(b, s))


def defect_certificate(
    sol: EulerSolution,
    problem: EulerProblem,
    samples: int,
    compress: bool = True,
) -> list[Violation]:
    """Sampled verification of the defect bound |phi' - f(t, phi)|_1 <= 2**-p.

    At ``samples`` evenly spaced interior points of every segment the slope
    is compared against f evaluated at precision p+4; the tolerance
    2**-p + 2**-(p+4) accounts for that evaluation error.  Returns the list
    of violations found (empty = certificate holds on the sample).
    """
    if samples < 1:
        raise ValueError("need at least one sample per segment")
    f = problem.rhs
    p = sol.p
    check_p = p + 4
    tol = Fraction(1, 1 << p) + Fraction(1, 1 << check_p)
    report: list[Violation] = []
    pts = sol.partition.points
    nodes = sol.nodes
    slopes = sol.slopes
    for i in range(1, len(pts)):
        c0 = pts[i - 1]
        width = pts[i] - c0
        if width == 0:
            continue
        b = nodes[i - 1]
        s = slopes[i - 1]
        for j in range(1, samples + 1):
            t = c0 + width * Fraction(j, samples + 1)
            dt = t - c0
            phi = tuple(bk + dt * sk for bk, sk in zip(b, s))
            val = apply_vector(f, t, phi, check_p, compress)
            gap = rat_norm1([sk - vk for sk, vk in zip(s, val)])
            if gap > tol:
                report.append(Violation(
                    "defect",
                    f"segment {i} t={format_rational(t)}: |s - f(t, phi)|_1 = "
                    f"{format_rational(gap)} > 2^-{p} + 2^-{check_p}",
                ))
    return report


# ---------------------------------------------------------------------------
# error bound against the exact solution


def exp_upper_bound(x: Fraction) -> Fraction:
    """Rational u >= e^x for x >= 0, by truncated series plus certified tail.

    With K+1 >= 2x the neglected tail is at most twice its first term, so
    u = sum_{k<=K} x^k/k! + 2 x^(K+1)/(K+1)! is an upper bound; K is the
    least such index plus 8 to keep the overshoot small.
    """
    x = Fraction(x)
    if x < 0:
        raise ValueError("exp_upper_bound expects x >= 0")
    K = max(math.ceil(2 * x) - 1, 0) + 8
    term = Fraction(1)
    total = Fraction(1)
    for k in range(1, K + 1):
        term = term * x / k
        total += term
    tail = 2 * term * x / (K + 1)
    return total + tail


def global_error_bound(p: int, L: Fraction, T: Fraction) -> Fraction:
    """Rational upper bound on (2**-p / L) (e^(L T) - 1).

    This is the Gronwall estimate for the distance between a defect-2**-p
    approximate solution and the exact solution of an L-Lipschitz system
    over [0, T].
    """
    check_precision(p)
    L = Fraction(L)
    T = Fraction(T)
    if L <= 0 or T <= 0:
        raise ValueError("L and T must be positive")
    u = exp_upper_bound(L * T)
    return Fraction(1, 1 << p) * (u - 1) / L


# ---------------------------------------------------------------------------
# continuation


def _time_shifted(f: UcfVector, tau: Fraction) -> UcfVector:
    """The rhs in local time: g(t, x) = f(t + tau, x), domain ball shifted."""
    if tau == 0:
        return f
    return UcfVector(
        center=(f.center[0] - tau, *f.center[1:]),
        radius=f.radius,
        dim_in=f.dim_in,
        dim_out=f.dim_out,
        approx=lambda pt, n, _f=f, _tau=tau: _f.approx((pt[0] + _tau, *pt[1:]), n),
        conv_modulus=f.conv_modulus,
        cont_modulus=f.cont_modulus,
    )


def _concatenate(segments: list[EulerSolution], p: int) -> EulerSolution:
    dim = segments[0].dim
    total_h = sum((seg.horizon for seg in segments), Fraction(0))

    grids = [seg.partition.points for seg in segments]
    uniform = all(isinstance(g, UniformGrid) for g in grids) and len(
        {(g.step) for g in grids}
    ) == 1
    total_steps = sum(len(g) - 1 for g in grids)
    if uniform:
        points: Sequence[Fraction] = UniformGrid(Fraction(0), grids[0].step, total_steps + 1)
    else:
        pts = [Fraction(0)]
        offset = Fraction(0)
        for g in grids:
            pts.extend(offset + c for c in g[1:])
            offset += g[-1]
        points = pts
    partition = Partition(points=points, lo=Fraction(0), hi=total_h)

    first = segments[0]
    node_exp = first.nodes._exp if isinstance(first.nodes, _PackedVectors) else None
    slope_exp = first.slopes._exp if isinstance(first.slopes, _PackedVectors) else None
    nodes = _PackedVectors(dim, node_exp)
    slopes = _PackedVectors(dim, slope_exp)
    nodes.extend_tail(first.nodes, 0)
    slopes.extend_tail(first.slopes, 0)
    for seg in segments[1:]:
        nodes.extend_tail(seg.nodes, 1)  # seam node equals previous terminal node
        slopes.extend_tail(seg.slopes, 0)

    return EulerSolution(
        partition=partition,
        nodes=nodes,
        slopes=slopes,
        p=p,
        horizon=total_h,
        q=first.q,
    )


def solve_chained(
    problem: EulerProblem,
    p: int,
    t_end: Fraction,
    compress: bool = True,
) -> EulerSolution:
    """Continue the solution segment by segment until the horizon covers t_end.

    Each restart re-centers the box at the current terminal node, shifts
    the rhs to local time and re-validates the problem assumptions; a
    validation failure raises ConfigurationError naming the restart time.
    """
    check_precision(p)
    t_end = Fraction(t_end)
    if t_end <= 0:
        raise ValueError("t_end must be positive")

    segments: list[EulerSolution] = []
    x0 = problem.x0
    tau = Fraction(0)
    while tau < t_end:
        prob = EulerProblem(
            rhs=_time_shifted(problem.rhs, tau),
            x0=x0,
            t_a=problem.t_a,
            x_b=problem.x_b,
            bound_c=problem.bound_c,
            lipschitz_l=problem.lipschitz_l,
        )
        try:
            seg = solve(prob, p, compress)
        except ConfigurationError as exc:
            raise ConfigurationError(
                f"assumptions fail at restart t = {format_rational(tau)}: {exc}"
            ) from exc
        segments.append(seg)
        tau += seg.horizon
        x0 = seg.nodes[len(seg.nodes) - 1]

    if len(segments) == 1:
        return segments[0]
    return _concatenate(segments, p)


def max_denominator_bits(vectors: Sequence) -> int:
    """Largest denominator bit-length over a sequence of rational vectors."""
    if isinstance(vectors, _PackedVectors):
        return vectors.max_denominator_bits()
    best = 0
    for vec in vectors:
        for f in vec:
            bits = f.denominator.bit_length()
            if bits > best:
                best = bits
    return best


# ---------------------------------------------------------------------------
# serialization


def solution_to_json_dict(sol: EulerSolution) -> dict:
    return {
        "horizon": format_rational(sol.horizon),
        "p": sol.p,
        "partition": [format_rational(c) for c in sol.partition.points],
        "nodes": [[format_rational(c) for c in vec] for vec in sol.nodes],
        "slopes": [[format_rational(c) for c in vec] for vec in sol.slopes],
        "defect_bound": f"2^-{sol.p}",
    }


def solution_to_csv(sol: EulerSolution) -> str:
    dim = sol.dim
    lines = ["t," + ",".join(f"x{i + 1}" for i in range(dim))]
    for t, vec in zip(sol.partition.points, sol.nodes):
        lines.append(format_rational(t) + "," + ",".join(format_rational(c) for c in vec))
    return "\n".join(lines) + "\n"
