"""certeuler: certified exact-rational Euler integration for IVPs.

Constructive real numbers (rational Cauchy sequences with explicit moduli),
uniformly continuous functions as data, and a Cauchy-Euler solver whose
piecewise-linear output carries a by-construction defect bound 2**-p and a
Gronwall-type global error bound against the exact solution.
"""

from .creal import (
    ConstructiveReal,
    RealVector,
    compress,
    check_regularity,
    is_nonneg_up_to,
    is_pos_up_to,
    real_abs,
    real_add,
    real_approx,
    real_eq_up_to,
    real_from_rational,
    real_mul,
    real_sub,
    real_vec_approx,
)
from .euler import (
    ConfigurationError,
    EulerProblem,
    EulerSolution,
    defect_certificate,
    euler_map,
    euler_map_fast,
    eval_solution,
    exp_upper_bound,
    global_error_bound,
    solve,
    solve_chained,
    validate_problem,
)
from .expr import RhsExpr, derive_ucf, parse_rhs, pretty
from .partition import Partition, mesh, unif_p, unif_p_core
from .rational import (
    PrecisionExp,
    Rational,
    format_rational,
    parse_rational,
    rat_add,
    rat_div,
    rat_floor,
    rat_le_abs_bound,
    rat_mul,
    rat_norm1,
    rat_sub,
)
from .systems import BUILTIN_SYSTEMS, get_system
from .ucf import (
    DerivativeWitness,
    DomainError,
    UcfScalar,
    UcfVector,
    Violation,
    apply_scalar,
    apply_vector,
    validate_scalar_ucf,
    validate_ucf,
)

__version__ = "0.1.0"
