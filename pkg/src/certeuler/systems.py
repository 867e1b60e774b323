"""Built-in right-hand sides with hand-derived moduli and problem data.

Both systems are 1-Lipschitz in the joint (t, x) 1-norm, so the tightest
valid modulus of continuity is omega(p) = p + 1 (inputs within 2**-p give
outputs within 2**-p).  Their approximating maps are exact, hence alpha = 0.

The circle ships with x_b = 1/2 rather than the full unit box: along the
whole trajectory |(x, y)|_1 stays below sqrt(2) + 0.01, so |f|_1 <= 2
remains valid on every restart box of radius 1/2 and the stated C = 2
survives arbitrarily long continuation around the circle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .euler import ConfigurationError, EulerProblem
from .rational import format_rational
from .ucf import UcfVector

__all__ = ["SystemSpec", "BUILTIN_SYSTEMS", "get_system", "registry_metadata", "registry_json"]


@dataclass(frozen=True)
class SystemSpec:
    """A named rhs plus default problem data for the solver."""

    name: str
    description: str
    rhs: UcfVector
    x0: tuple[Fraction, ...]
    t_a: Fraction
    x_b: Fraction
    bound_c: Fraction
    lipschitz_l: Fraction
    alpha_doc: str
    omega_doc: str

    def problem(self, x0: tuple[Fraction, ...] | None = None, **overrides) -> EulerProblem:
        data = dict(
            rhs=self.rhs,
            x0=self.x0 if x0 is None else tuple(x0),
            t_a=self.t_a,
            x_b=self.x_b,
            bound_c=self.bound_c,
            lipschitz_l=self.lipschitz_l,
        )
        data.update({k: v for k, v in overrides.items() if v is not None})
        return EulerProblem(**data)


def _exp_rhs() -> UcfVector:
    # x' = x: input (t, x), output (x,)
    return UcfVector(
        center=(Fraction(0), Fraction(1)),
        radius=Fraction(8),
        dim_in=2,
        dim_out=1,
        approx=lambda pt, n: (pt[1],),
        conv_modulus=lambda p: 0,
        cont_modulus=lambda p: p + 1,
    )


def _circle_rhs() -> UcfVector:
    # x' = -y, y' = x: input (t, x, y), output (-y, x)
    return UcfVector(
        center=(Fraction(0), Fraction(0), Fraction(0)),
        radius=Fraction(16),
        dim_in=3,
        dim_out=2,
        approx=lambda pt, n: (-pt[2], pt[1]),
        conv_modulus=lambda p: 0,
        cont_modulus=lambda p: p + 1,
    )


BUILTIN_SYSTEMS: dict[str, SystemSpec] = {
    "exp": SystemSpec(
        name="exp",
        description="x' = x, x(0) = 1; exact solution e^t",
        rhs=_exp_rhs(),
        x0=(Fraction(1),),
        t_a=Fraction(1),
        x_b=Fraction(1),
        bound_c=Fraction(2),
        lipschitz_l=Fraction(1),
        alpha_doc="0",
        omega_doc="p + 1",
    ),
    "circle": SystemSpec(
        name="circle",
        description="x' = -y, y' = x, (x, y)(0) = (1, 0); exact solution (cos t, sin t)",
        rhs=_circle_rhs(),
        x0=(Fraction(1), Fraction(0)),
        t_a=Fraction(1),
        x_b=Fraction(1, 2),
        bound_c=Fraction(2),
        lipschitz_l=Fraction(1),
        alpha_doc="0",
        omega_doc="p + 1",
    ),
}


def get_system(name: str) -> SystemSpec:
    try:
        return BUILTIN_SYSTEMS[name]
    except KeyError:
        known = ", ".join(sorted(BUILTIN_SYSTEMS))
        raise ConfigurationError(f"unknown system {name!r}; built-ins: {known}") from None


def registry_metadata() -> list[dict]:
    """Serializable description of every registered system."""
    out = []
    for spec in BUILTIN_SYSTEMS.values():
        out.append({
            "name": spec.name,
            "description": spec.description,
            "dim": spec.rhs.dim_out,
            "ball_center": [format_rational(c) for c in spec.rhs.center],
            "ball_radius": format_rational(spec.rhs.radius),
            "alpha": spec.alpha_doc,
            "omega": spec.omega_doc,
            "defaults": {
                "x0": [format_rational(c) for c in spec.x0],
                "t_a": format_rational(spec.t_a),
                "x_b": format_rational(spec.x_b),
                "C": format_rational(spec.bound_c),
                "L": format_rational(spec.lipschitz_l),
            },
        })
    return out


def registry_json() -> str:
    return json.dumps(registry_metadata(), indent=2)
