"""jetlie: exact symbolic toolkit for Lie point symmetries of ODEs.

Construct and certify equations uniquely determined by a prescribed Lie
algebra of point vector fields: prolong the algebra to jet spaces, build the
prolongation matrix, compute Lie determinants, generic ranks and singular
loci, verify (relative) differential invariants and point symmetries, and
assemble first integrals from symmetry determinants.  All arithmetic is
exact over the rationals, with formal "differential atoms" standing in for
transcendental functions.
"""

from .catalog import (
    AlgebraSpec,
    UnknownAlgebraIdError,
    UnsupportedDimensionError,
    primitive_algebra,
    resolve_algebra,
    space_algebra,
)
from .exprcore import (
    AtomDef,
    DenominatorVanishesError,
    Monomial,
    NotDivisibleError,
    Poly,
    RatExpr,
    VarId,
    apply_derivation,
    arith,
    canonical_string,
    differentiate,
    exact_divide,
    make_atom,
    poly_gcd,
    substitute,
    try_exact_divide,
)
from .integrals import (
    DegenerateDenominatorError,
    FlowField,
    NormalFormODE,
    NotASymmetryError,
    NotNormalFormError,
    check_point_symmetry,
    first_integral,
    flow_field,
    tangency_residuals,
    verify_first_integral,
)
from .jetspace import (
    DependentGeneratorsError,
    JetContext,
    OrderOverflowError,
    ProlongedField,
    SpanSolver,
    StructureReport,
    VectorField,
    closure_check,
    lie_bracket,
    prolong,
    total_derivative,
)
from .linalg import NotSquareError, det_poly, det_rational
from .parsing import (
    ExprSyntaxError,
    ParseEnv,
    ParsedAlgebraFile,
    SourceSpan,
    UnknownVariableError,
    dump_algebra_file,
    parse_algebra_file,
    parse_expression,
)
from .remarkable import (
    Certificate,
    OrderMismatchError,
    ProlMatrix,
    RankReport,
    WrongArityError,
    ZeroBaseError,
    check_invariant,
    check_relative_invariant,
    certify_hypersurface,
    certify_system,
    certify_total_derivative,
    generic_rank,
    lie_determinant,
    maximal_minors,
    prolongation_matrix,
)

__version__ = "0.1.0"
