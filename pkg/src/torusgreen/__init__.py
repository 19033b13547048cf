"""Numerical toolkit for Green functions of flat tori.

Builds the first Jacobi theta function into a Weierstrass layer, the torus
Green function and its derivatives, critical point finding and Morse
classification, moduli space scans for the three-versus-five critical point
count, and explicit mean field solutions at the two special strengths.
"""

from .critical import (
    CriticalPoint,
    CriticalSet,
    HalfPeriodComparison,
    Kind,
    Morse,
    classify,
    compare_half_periods,
    find_critical_points,
    locate_z0_on_rhombus_line,
)
from .errors import TorusGreenError
from .green import (
    GreenEval,
    Hessian2,
    evaluate,
    green_constant,
    green_grad,
    green_hessian,
    green_rel,
)
from .lattice import LatticeCoords, Torus, make_torus, reduce_modulus, wrap_point
from .mfe import (
    MfeSolution,
    ResidualReport,
    developing_map_8pi,
    extra_branch_point,
    four_pi_diagnostics,
    solution_4pi,
    solution_8pi,
    verify_solution,
)
from .moduli import (
    InequalityReport,
    ScanCell,
    ThresholdReport,
    flip_edges,
    functional_equation_residual,
    lambda_circle_residual,
    scan,
    thresholds,
    verify_fundamental_inequalities,
)

__all__ = [
    "CriticalPoint",
    "CriticalSet",
    "GreenEval",
    "HalfPeriodComparison",
    "Hessian2",
    "InequalityReport",
    "Kind",
    "LatticeCoords",
    "MfeSolution",
    "Morse",
    "ResidualReport",
    "ScanCell",
    "ThresholdReport",
    "Torus",
    "TorusGreenError",
    "classify",
    "compare_half_periods",
    "developing_map_8pi",
    "evaluate",
    "extra_branch_point",
    "find_critical_points",
    "flip_edges",
    "four_pi_diagnostics",
    "functional_equation_residual",
    "green_constant",
    "green_grad",
    "green_hessian",
    "green_rel",
    "lambda_circle_residual",
    "locate_z0_on_rhombus_line",
    "make_torus",
    "reduce_modulus",
    "scan",
    "solution_4pi",
    "solution_8pi",
    "thresholds",
    "verify_fundamental_inequalities",
    "verify_solution",
    "wrap_point",
]

__version__ = "0.1.0"
