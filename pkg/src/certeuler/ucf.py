"""Uniformly continuous functions with explicit approximating maps and moduli.

A function is packaged as data: a rational-level approximating map ``h``
indexed by an approximation stage, a modulus of convergence ``alpha`` (how
far into the stages to go for 2**-p agreement) and a modulus of continuity
``omega`` (inputs closer than 2**-(omega(p)-1) give outputs within 2**-p).
Applying such a function to a constructive real produces a constructive
real; no proof obligations exist at runtime, so validity is checked by
sampling (``validate_ucf``), which can refute but never prove.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .creal import ConstructiveReal, compress as compress_real, real_approx, vec_split_precision
from .rational import check_precision, format_rational, rat_norm1

__all__ = [
    "DomainError",
    "Violation",
    "UcfScalar",
    "UcfVector",
    "DerivativeWitness",
    "apply_scalar",
    "apply_vector",
    "validate_ucf",
    "validate_scalar_ucf",
    "validate_derivative",
]


class DomainError(ValueError):
    """A point fell outside a function's domain beyond the clamping tolerance."""


@dataclass(frozen=True)
class Violation:
    """One sampled counterexample found by a checker."""

    kind: str
    detail: str

    def __str__(self):
        return f"[{self.kind}] {self.detail}"


@dataclass(frozen=True)
class UcfScalar:
    """Uniformly continuous function on a rational interval [lo, hi].

    approx(a, n) evaluates the n-th rational approximation at a rational
    point a; conv_modulus is alpha, cont_modulus is omega, both weakly
    increasing.
    """

    lo: Fraction
    hi: Fraction
    approx: Callable[[Fraction, int], Fraction]
    conv_modulus: Callable[[int], int]
    cont_modulus: Callable[[int], int]

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("domain interval is empty")


@dataclass(frozen=True)
class UcfVector:
    """Uniformly continuous map on a 1-norm ball around ``center``.

    Input convention: the first coordinate is time, the remaining dim_out
    coordinates are state, so dim_in = dim_out + 1.  approx(point, n) takes
    the full rational input tuple.
    """

    center: tuple[Fraction, ...]
    radius: Fraction
    dim_in: int
    dim_out: int
    approx: Callable[[tuple[Fraction, ...], int], tuple[Fraction, ...]]
    conv_modulus: Callable[[int], int]
    cont_modulus: Callable[[int], int]

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")
        if self.dim_in != self.dim_out + 1:
            raise ValueError("expected dim_in = dim_out + 1 (time plus state)")
        if len(self.center) != self.dim_in:
            raise ValueError("center dimension does not match dim_in")


@dataclass(frozen=True)
class DerivativeWitness:
    """Certificate data that ``derivative`` is the time derivative of ``base``.

    diff_modulus(p) gives the time-step exponent below which the linear
    approximation error is at most 2**-p per unit step.
    """

    base: UcfVector
    derivative: UcfVector
    diff_modulus: Callable[[int], int]


def _clamp_scalar(a: Fraction, lo: Fraction, hi: Fraction) -> Fraction:
    if a < lo:
        return lo
    if a > hi:
        return hi
    return a


def apply_scalar(f: UcfScalar, x: ConstructiveReal) -> ConstructiveReal:
    """Apply f to a real in [lo, hi]; result sequence is h(a_n, n).

    The result modulus is max(alpha(p+2), M(max(omega(p+1) - 1, 1))); the
    inner term is clamped at 1 because omega(p+1) may already be 1.
    Approximants that overshoot the interval (legitimate for boundary
    reals) are clamped to the nearest endpoint; a probe approximant more
    than 2**-2 outside is a domain error.
    """
    probe = x.seq_at(x.modulus_at(2))
    quarter = Fraction(1, 4)
    if probe < f.lo - quarter - quarter or probe > f.hi + quarter + quarter:
        raise DomainError(
            f"real is outside [{format_rational(f.lo)}, {format_rational(f.hi)}]"
        )

    def seq(n: int) -> Fraction:
        return f.approx(_clamp_scalar(x.seq_at(n), f.lo, f.hi), n)

    def modulus(p: int) -> int:
        return max(f.conv_modulus(p + 2), x.modulus_at(max(f.cont_modulus(p + 1) - 1, 1)))

    return ConstructiveReal(seq, modulus)


def _project_into_ball(f: UcfVector, point: tuple[Fraction, ...], tol: Fraction) -> tuple[Fraction, ...]:
    # 1-norm distance to the center as one unreduced integer fraction; this
    # sits on the solver's innermost loop, so no intermediate Fractions.
    num = 0
    den = 1
    for a, c in zip(point, f.center):
        off = a.numerator * c.denominator - c.numerator * a.denominator
        scale = a.denominator * c.denominator
        num = num * scale + abs(off) * den
        den *= scale
    if num * f.radius.denominator <= f.radius.numerator * den:
        return point
    dist = Fraction(num, den)
    if dist <= f.radius + tol:
        # project onto the sphere: scaling the offset is exact and 1-norm sound
        scale = f.radius / dist
        return tuple(c + (a - c) * scale for a, c in zip(point, f.center))
    raise DomainError(
        f"point at 1-norm distance {format_rational(dist)} from center exceeds "
        f"radius {format_rational(f.radius)} by more than {format_rational(tol)}"
    )


def apply_vector(
    f: UcfVector,
    t: Fraction,
    x: Sequence[Fraction],
    p: int,
    compress: bool = True,
) -> tuple[Fraction, ...]:
    """Rational vector within 2**-p (1-norm) of the real vector f(t, x).

    Each component of n -> h((t, x), n) is a constructive real with modulus
    alpha; the result extracts them at the split precision pq (so the
    per-component errors sum to at most 2**-p), after compression when
    ``compress`` is on (the default), which caps the denominators of the
    result at 2**(pq + 2).  The wrapper objects are unfolded here for
    speed; ``_apply_vector_via_reals`` is the definitional route and the
    two are pinned equal by tests.
    """
    check_precision(p)
    if len(x) != f.dim_out:
        raise ValueError(f"state dimension {len(x)} does not match rhs dimension {f.dim_out}")
    point = _project_into_ball(f, (t, *x), Fraction(1, 1 << p))
    pq = vec_split_precision(f.dim_out, p)
    if compress:
        n_c = pq + 2  # compressed approx index: floor(a 2^n_c) / 2^n_c
        stage = f.approx(point, f.conv_modulus(n_c))
        scale = 1 << n_c
        return tuple(
            Fraction((c.numerator * scale) // c.denominator, scale) for c in stage
        )
    stage = f.approx(point, f.conv_modulus(pq))
    return tuple(Fraction(c) for c in stage)


def _apply_vector_via_reals(
    f: UcfVector,
    t: Fraction,
    x: Sequence[Fraction],
    p: int,
    compress: bool = True,
) -> tuple[Fraction, ...]:
    """Definitional form of :func:`apply_vector` through ConstructiveReal."""
    check_precision(p)
    if len(x) != f.dim_out:
        raise ValueError(f"state dimension {len(x)} does not match rhs dimension {f.dim_out}")
    point = _project_into_ball(f, (t, *x), Fraction(1, 1 << p))

    stage_cache: dict[int, tuple[Fraction, ...]] = {}

    def stage(n: int) -> tuple[Fraction, ...]:
        v = stage_cache.get(n)
        if v is None:
            v = tuple(f.approx(point, n))
            stage_cache[n] = v
        return v

    pq = vec_split_precision(f.dim_out, p)
    out = []
    for i in range(f.dim_out):
        comp = ConstructiveReal(lambda n, _i=i: stage(n)[_i], f.conv_modulus)
        if compress:
            comp = compress_real(comp)
        out.append(real_approx(comp, pq))
    return tuple(out)


# ---------------------------------------------------------------------------
# sampling checkers


def _rand_fraction(rng: random.Random, lo: Fraction, hi: Fraction, grain: int = 1 << 12) -> Fraction:
    return lo + (hi - lo) * Fraction(rng.randrange(grain + 1), grain)


def _ball_point(rng: random.Random, f: UcfVector) -> tuple[Fraction, ...]:
    # random direction in the 1-norm ball: random weights, random signed radius
    weights = [Fraction(rng.randrange(1, 64), 1) for _ in range(f.dim_in)]
    total = sum(weights)
    r = f.radius * Fraction(rng.randrange(1 << 10), 1 << 10)
    return tuple(
        c + (w / total) * r * (1 if rng.random() < 0.5 else -1)
        for c, w in zip(f.center, weights)
    )


def validate_ucf(f: UcfVector, samples: int, p_max: int, seed: int = 0) -> list[Violation]:
    """Search for counterexamples to the UcfVector clauses by sampling.

    Checks, for p up to p_max: the Cauchy clause of (h(a, n))_n under
    alpha, the continuity clause under omega, and weak monotonicity of
    both moduli.  An empty report means no counterexample was found.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = random.Random(seed)
    report: list[Violation] = []

    for p in range(1, p_max):
        if f.conv_modulus(p) > f.conv_modulus(p + 1):
            report.append(Violation("modulus", f"alpha decreases between p={p} and p={p + 1}"))
        if f.cont_modulus(p) > f.cont_modulus(p + 1):
            report.append(Violation("modulus", f"omega decreases between p={p} and p={p + 1}"))

    for p in range(1, p_max + 1):
        tol = Fraction(1, 1 << p)
        n0 = f.conv_modulus(p)
        thr = Fraction(2, 1 << f.cont_modulus(p))  # 2**(-omega(p) + 1)
        for k in range(samples):
            a = _ball_point(rng, f)
            va = f.approx(a, n0)
            # Cauchy clause: stages at and beyond alpha(p) agree to 2**-p
            for dn in (1, 2, 8):
                vb = f.approx(a, n0 + dn)
                gap = rat_norm1([u - v for u, v in zip(va, vb)])
                if gap > tol:
                    report.append(Violation(
                        "cauchy",
                        f"p={p} point={[format_rational(c) for c in a]} stages "
                        f"{n0},{n0 + dn}: gap {format_rational(gap)} > 2^-{p}",
                    ))
                    break
            # continuity clause: perturb within the omega threshold, project back
            b = list(a)
            j = rng.randrange(f.dim_in)
            direction = 1 if rng.random() < 0.5 else -1
            mag = thr if k % 2 == 0 else _rand_fraction(rng, Fraction(0), thr)
            b[j] = b[j] + direction * mag
            try:
                b_t = _project_into_ball(f, tuple(b), f.radius)
            except DomainError:
                continue
            shift = rat_norm1([u - v for u, v in zip(a, b_t)])
            if shift > thr or shift == 0:
                continue
            vb = f.approx(b_t, n0)
            gap = rat_norm1([u - v for u, v in zip(va, vb)])
            if gap > tol:
                report.append(Violation(
                    "continuity",
                    f"p={p} |a-b|_1={format_rational(shift)} <= 2^(1-omega) but "
                    f"output gap {format_rational(gap)} > 2^-{p}",
                ))
    return report


def validate_scalar_ucf(f: UcfScalar, samples: int, p_max: int, seed: int = 0) -> list[Violation]:
    """Scalar counterpart of :func:`validate_ucf` on [lo, hi]."""
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = random.Random(seed)
    report: list[Violation] = []

    for p in range(1, p_max):
        if f.conv_modulus(p) > f.conv_modulus(p + 1):
            report.append(Violation("modulus", f"alpha decreases between p={p} and p={p + 1}"))
        if f.cont_modulus(p) > f.cont_modulus(p + 1):
            report.append(Violation("modulus", f"omega decreases between p={p} and p={p + 1}"))

    width = f.hi - f.lo
    for p in range(1, p_max + 1):
        tol = Fraction(1, 1 << p)
        n0 = f.conv_modulus(p)
        thr = Fraction(2, 1 << f.cont_modulus(p))
        # endpoint-anchored pairs catch Lipschitz-style violations at the
        # steep end of the interval; random pairs cover the rest
        pairs = []
        if width > 0:
            step = min(thr, width)
            pairs.append((f.hi, f.hi - step))
            pairs.append((f.lo, f.lo + step))
        for _ in range(samples):
            a = _rand_fraction(rng, f.lo, f.hi)
            delta = _rand_fraction(rng, Fraction(0), min(thr, width)) if width > 0 else Fraction(0)
            b = _clamp_scalar(a + delta, f.lo, f.hi)
            pairs.append((a, b))
        for a, b in pairs:
            va = f.approx(a, n0)
            for dn in (1, 2, 8):
                if abs(va - f.approx(a, n0 + dn)) > tol:
                    report.append(Violation("cauchy", f"p={p} a={format_rational(a)}"))
                    break
            if abs(a - b) > thr or a == b:
                continue
            if abs(va - f.approx(b, n0)) > tol:
                report.append(Violation(
                    "continuity",
                    f"p={p} a={format_rational(a)} b={format_rational(b)}: "
                    f"|h(a)-h(b)| > 2^-{p}",
                ))
    return report


def validate_derivative(
    witness: DerivativeWitness,
    t_lo: Fraction,
    t_hi: Fraction,
    samples: int,
    p_max: int,
    approx_p: int = 24,
    seed: int = 0,
) -> list[Violation]:
    """Sampled check of the time-derivative inequality on [t_lo, t_hi].

    For sampled t1 < t2 <= t1 + 2**-delta(p) it checks
    |phi1(t2) - phi1(t1) - phi2(t1, x)(t2 - t1)|_1 <= 2**-p (t2 - t1),
    with an allowance for the evaluation precision of both functions.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = random.Random(seed)
    report: list[Violation] = []
    base, deriv = witness.base, witness.derivative
    state = tuple(base.center[1:])
    slack = Fraction(3, 1 << approx_p)
    for p in range(1, p_max + 1):
        h_max = Fraction(1, 1 << witness.diff_modulus(p))
        for _ in range(samples):
            t1 = _rand_fraction(rng, t_lo, max(t_lo, t_hi - h_max))
            h = _rand_fraction(rng, Fraction(0), h_max)
            if h == 0:
                continue
            t2 = t1 + h
            v1 = apply_vector(base, t1, state, approx_p)
            v2 = apply_vector(base, t2, state, approx_p)
            dv = apply_vector(deriv, t1, state, approx_p)
            residual = rat_norm1([b - a - d * h for a, b, d in zip(v1, v2, dv)])
            if residual > Fraction(1, 1 << p) * h + slack:
                report.append(Violation(
                    "derivative",
                    f"p={p} t1={format_rational(t1)} h={format_rational(h)}: "
                    f"residual {format_rational(residual)} > 2^-{p} * h",
                ))
    return report
