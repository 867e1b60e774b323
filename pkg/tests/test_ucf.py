import random
from fractions import Fraction

import pytest

from certeuler.creal import check_regularity, real_approx, real_eq_up_to, real_from_rational
from certeuler.systems import get_system
from certeuler.ucf import (
    DerivativeWitness,
    DomainError,
    UcfScalar,
    UcfVector,
    _apply_vector_via_reals,
    apply_scalar,
    apply_vector,
    validate_derivative,
    validate_scalar_ucf,
    validate_ucf,
)

from oracles import SQRT2, sqrt2_newton_real

F = Fraction


def square_scalar(omega=None) -> UcfScalar:
    # x^2 on [0, 2]: |a^2 - b^2| <= 4 |a - b|, so omega(p) = p + 3 suffices
    return UcfScalar(
        lo=F(0),
        hi=F(2),
        approx=lambda a, n: a * a,
        conv_modulus=lambda p: 0,
        cont_modulus=omega or (lambda p: p + 3),
    )


def identity_scalar() -> UcfScalar:
    return UcfScalar(
        lo=F(-8),
        hi=F(8),
        approx=lambda a, n: a,
        conv_modulus=lambda p: 0,
        cont_modulus=lambda p: p,
    )


def square_vector() -> UcfVector:
    # (t, x) -> (x^2,) for x in a ball covering [0, 2]
    return UcfVector(
        center=(F(0), F(1)),
        radius=F(4),
        dim_in=2,
        dim_out=1,
        approx=lambda pt, n: (pt[1] * pt[1],),
        conv_modulus=lambda p: 0,
        cont_modulus=lambda p: p + 4,
    )


def test_apply_scalar_square_const():
    out = apply_scalar(square_scalar(), real_from_rational(F(3, 2)))
    assert real_approx(out, 10) == F(9, 4)
    check_regularity(out)


def test_apply_scalar_identity_is_identity():
    f = identity_scalar()
    for q in (F(0), F(1, 3), F(-7, 2)):
        x = real_from_rational(q)
        y = apply_scalar(f, x)
        assert all(real_eq_up_to(x, y, p) for p in range(1, 13))


def test_apply_scalar_sqrt2_squares_to_two():
    out = apply_scalar(square_scalar(), sqrt2_newton_real())
    got = real_approx(out, 10)
    assert abs(got - 2) <= F(1, 1 << 10)
    # tighter cross-check against the frozen sqrt(2) oracle
    assert abs(got - SQRT2 * SQRT2) <= F(1, 1 << 10)


def test_apply_scalar_modulus_monotone():
    out = apply_scalar(square_scalar(), sqrt2_newton_real())
    mods = [out.modulus_at(p) for p in range(1, 13)]
    assert mods == sorted(mods)


def test_apply_scalar_clamps_boundary_overshoot():
    from certeuler.creal import ConstructiveReal

    # represents 2 from above: approximants overshoot the domain edge
    x = ConstructiveReal(lambda n: F(2) + F(1, 1 << (n + 1)), lambda p: p)
    out = apply_scalar(square_scalar(), x)
    assert abs(real_approx(out, 8) - 4) <= F(1, 1 << 8)


def test_apply_scalar_rejects_far_outside():
    with pytest.raises(DomainError):
        apply_scalar(square_scalar(), real_from_rational(F(3)))


def test_apply_vector_circle_point():
    circle = get_system("circle").rhs
    assert apply_vector(circle, F(0), (F(1), F(0)), 10) == (F(0), F(1))


def test_apply_vector_exp_point():
    exp_rhs = get_system("exp").rhs
    assert apply_vector(exp_rhs, F(0), (F(1),), 5) == (F(1),)


def test_apply_vector_zero_function():
    zero = UcfVector(
        center=(F(0), F(0)),
        radius=F(4),
        dim_in=2,
        dim_out=1,
        approx=lambda pt, n: (F(0),),
        conv_modulus=lambda p: 0,
        cont_modulus=lambda p: 1,
    )
    for p in (1, 6, 14):
        assert apply_vector(zero, F(1, 3), (F(1),), p) == (F(0),)


def test_apply_vector_precision_consistency():
    circle = get_system("circle").rhs
    rng = random.Random(3)
    for _ in range(40):
        t = F(rng.randrange(0, 32), 32)
        x = (F(rng.randrange(-32, 32), 32), F(rng.randrange(-32, 32), 32))
        p = rng.randrange(1, 14)
        a = apply_vector(circle, t, x, p)
        b = apply_vector(circle, t, x, p + 1)
        gap = sum(abs(u - v) for u, v in zip(a, b))
        assert gap <= F(1, 1 << p) + F(1, 1 << (p + 1))


def test_apply_vector_square_contract():
    f = square_vector()
    rng = random.Random(41)
    for _ in range(100):
        a = F(rng.randrange(0, 2 * 256 + 1), 256)
        p = rng.randrange(1, 13)
        (got,) = apply_vector(f, F(0), (a,), p)
        assert abs(got - a * a) <= F(1, 1 << p)


def test_apply_vector_matches_definitional_route():
    rng = random.Random(7)
    systems = [get_system("circle").rhs, get_system("exp").rhs, square_vector()]
    for _ in range(300):
        f = systems[rng.randrange(len(systems))]
        x = tuple(F(rng.randrange(-48, 48), 64) for _ in range(f.dim_out))
        t = F(rng.randrange(0, 64), 64)
        p = rng.randrange(1, 22)
        flag = rng.random() < 0.5
        assert apply_vector(f, t, x, p, flag) == _apply_vector_via_reals(f, t, x, p, flag)


def test_apply_vector_rejects_far_outside():
    circle = get_system("circle").rhs
    with pytest.raises(DomainError):
        apply_vector(circle, F(40), (F(0), F(0)), 8)


def test_apply_vector_projects_near_boundary():
    f = square_vector()  # radius 4 around (0, 1)
    # 1-norm distance 4 + 2^-9 <= 4 + 2^-8: projected onto the sphere,
    # which lands the state coordinate exactly at 1 + 4 = 5
    out = apply_vector(f, F(0), (F(5) + F(1, 512),), 8)
    assert out == (F(25),)


def test_validate_ucf_builtins_clean():
    assert validate_ucf(get_system("circle").rhs, samples=8, p_max=8) == []
    assert validate_ucf(get_system("exp").rhs, samples=8, p_max=8) == []


def test_validate_ucf_flags_bad_omega():
    # claims omega(p) = 1: inputs a whole unit apart must agree to 2^-p; false
    bad = UcfVector(
        center=(F(0), F(1)),
        radius=F(4),
        dim_in=2,
        dim_out=1,
        approx=lambda pt, n: (pt[1] * pt[1],),
        conv_modulus=lambda p: 0,
        cont_modulus=lambda p: 1,
    )
    report = validate_ucf(bad, samples=40, p_max=6)
    assert any(v.kind == "continuity" for v in report)


def test_validate_ucf_flags_bad_modulus_monotonicity():
    wobbly = UcfVector(
        center=(F(0), F(0)),
        radius=F(2),
        dim_in=2,
        dim_out=1,
        approx=lambda pt, n: (F(0),),
        conv_modulus=lambda p: 5 - p if p <= 4 else 1,
        cont_modulus=lambda p: p,
    )
    report = validate_ucf(wobbly, samples=2, p_max=6)
    assert any(v.kind == "modulus" for v in report)


def test_validate_scalar_square_clean():
    assert validate_scalar_ucf(square_scalar(), samples=20, p_max=8) == []


def test_validate_scalar_square_wrong_omega():
    report = validate_scalar_ucf(square_scalar(omega=lambda p: 1), samples=20, p_max=8)
    assert any(v.kind == "continuity" for v in report)


def test_validate_scalar_constant_clean():
    const = UcfScalar(
        lo=F(0), hi=F(1),
        approx=lambda a, n: F(5, 7),
        conv_modulus=lambda p: 0,
        cont_modulus=lambda p: 1,
    )
    assert validate_scalar_ucf(const, samples=10, p_max=8) == []


def _parabola_witness(delta):
    # phi1(t) = (t^2,) with phi2(t, x) = (2t,): the linear-step residual is
    # (t2 - t1)^2, so delta(p) = p is exactly tight
    base = UcfVector(
        center=(F(1, 2), F(0)),
        radius=F(4),
        dim_in=2,
        dim_out=1,
        approx=lambda pt, n: (pt[0] * pt[0],),
        conv_modulus=lambda p: 0,
        cont_modulus=lambda p: p + 4,
    )
    deriv = UcfVector(
        center=(F(1, 2), F(0)),
        radius=F(4),
        dim_in=2,
        dim_out=1,
        approx=lambda pt, n: (2 * pt[0],),
        conv_modulus=lambda p: 0,
        cont_modulus=lambda p: p + 3,
    )
    return DerivativeWitness(base=base, derivative=deriv, diff_modulus=delta)


def test_derivative_witness_clean():
    w = _parabola_witness(lambda p: p)
    assert validate_derivative(w, F(0), F(1), samples=20, p_max=8) == []


def test_derivative_witness_bad_modulus():
    w = _parabola_witness(lambda p: max(p - 5, 1))
    report = validate_derivative(w, F(0), F(1), samples=40, p_max=8)
    assert any(v.kind == "derivative" for v in report)
