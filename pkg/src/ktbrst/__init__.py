"""Graded jet calculus and KT-BRST verification for degenerate Lagrangian systems."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .algebra import (
    ANTIFIELD,
    FIELD,
    GHOST,
    GHOST_ANTIFIELD,
    MIXED,
    AlgebraError,
    Density,
    FieldDecl,
    GradedPoly,
    JetVar,
    Monomial,
    MultiIndex,
    antifield_for,
    jet,
    mul,
    normalize,
    partial_left,
    partial_right,
    prolong,
)
from .brst import (
    EQUIVALENCE_CHECKS,
    Model,
    ModelError,
    NoetherStage,
    antibracket,
    antibracket_equivalence_suite,
    build_brst_operator,
    build_extended_lagrangian,
    build_gauge_operator,
    build_kt_operator,
    build_proper_solution,
    check_gauge_symmetry_conditions,
    check_master_equation,
    check_noether_identity,
    check_stage_identity,
)
from .derivations import (
    LEFT,
    RIGHT,
    Derivation,
    apply,
    compose_on_components,
    is_nilpotent,
    is_variational_symmetry,
)
from .jets import (
    EulerLagrange,
    LinearDiffOp,
    Verdict,
    adjoint,
    adjoint_closed_form,
    euler_lagrange,
    is_dH_exact,
    total_derivative,
    total_derivative_multi,
    variational_derivative,
    variational_derivative_right,
)
from .models import (
    BUILTIN_MODELS,
    BFSpec,
    LieSuperAlgebraSpec,
    abelian,
    build_bf,
    build_gravity,
    build_yang_mills,
    builtin_model,
    su2,
)
from .dsl import DslError, parse_model, render_model
from .report import emit_report, run_checks
