"""Built-in normal-form systems used by the reproduction scripts and the
acceptance suite: straight lines, the circle systems, the order-5 system
determined by the affine algebra and the order-6 system determined by the
projective algebra (both in two dependent variables), and the exponential
cubic family of scalar second-order equations.

The two high-order systems are stored as exponent tables: one row per term,
columns ``(coeff, e(u1_2), e(u1_3), e(u1_4), e(u1_5), e(u2_2), e(u2_3),
e(u2_4), e(u2_5))``.  Both right-hand sides share the denominator
``c * (u1_2*u2_3 - u1_3*u2_2)^p`` (p = 3 for the affine system, 4 for the
projective one).
"""

from __future__ import annotations

from fractions import Fraction

from .exprcore import Poly, RatExpr, VarId, make_atom, mono_from_pairs
from .integrals import NormalFormODE

_TABLE_VARS = tuple(
    VarId.jet(i, k) for i in (1, 2) for k in (2, 3, 4, 5)
)


def _poly_from_table(table) -> Poly:
    terms = {}
    for coeff, *exps in table:
        mono = mono_from_pairs(
            (v.key, e) for v, e in zip(_TABLE_VARS, exps) if e
        )
        terms[mono] = coeff
    return Poly(terms)


def straight_lines(m: int) -> NormalFormODE:
    """u^k_2 = 0 for k = 1..m."""
    zero = RatExpr.const(0)
    return NormalFormODE(2, (zero,) * m)


def circles(m: int) -> NormalFormODE:
    """(1 + sum_j (u^j_1)^2) u^k_3 = 3 u^k_2 sum_j u^j_1 u^j_2."""
    one = RatExpr.const(1)
    s0 = RatExpr.const(0)
    s1 = RatExpr.const(0)
    for j in range(1, m + 1):
        uj1 = RatExpr.var(VarId.jet(j, 1))
        uj2 = RatExpr.var(VarId.jet(j, 2))
        s0 = s0 + uj1 * uj1
        s1 = s1 + uj1 * uj2
    rhs = tuple(
        3 * RatExpr.var(VarId.jet(k, 2)) * s1 / (one + s0) for k in range(1, m + 1)
    )
    return NormalFormODE(3, rhs)


def exponential_cubic_ode() -> NormalFormODE:
    """The family u1_2 = u1_1/2 + K*w*u1_1^3, with atom w' = -2w and a
    symbolic coefficient K."""
    x = VarId.x()
    w_var = VarId.atom(0, "w")
    w = make_atom("w", 0, {x: RatExpr.var(w_var) * (-2)})
    K = RatExpr.var(VarId.param("K"))
    u1 = RatExpr.var(VarId.jet(1, 1))
    rhs = u1 * Fraction(1, 2) + K * RatExpr.var(w_var) * u1 ** 3
    return NormalFormODE(2, (rhs,), (w,))


# -- order-5 system of the affine algebra (two dependents) --------------------

_AFFINE_U_NUM = (
    (-1, 4, 0, 0, 0, 0, 0, 3, 0),
    (6, 3, 1, 0, 0, 0, 1, 2, 0),
    (3, 3, 0, 1, 0, 1, 0, 2, 0),
    (36, 3, 0, 1, 0, 0, 2, 1, 0),
    (-6, 2, 2, 0, 0, 1, 0, 2, 0),
    (-72, 2, 2, 0, 0, 0, 2, 1, 0),
    (-84, 2, 1, 1, 0, 1, 1, 1, 0),
    (72, 2, 1, 1, 0, 0, 3, 0, 0),
    (-3, 2, 0, 2, 0, 2, 0, 1, 0),
    (-36, 2, 0, 2, 0, 1, 2, 0, 0),
    (144, 1, 3, 0, 0, 1, 1, 1, 0),
    (48, 1, 2, 1, 0, 2, 0, 1, 0),
    (-144, 1, 2, 1, 0, 1, 2, 0, 0),
    (78, 1, 1, 2, 0, 2, 1, 0, 0),
    (1, 1, 0, 3, 0, 3, 0, 0, 0),
    (-72, 0, 4, 0, 0, 2, 0, 1, 0),
    (72, 0, 3, 1, 0, 2, 1, 0, 0),
    (-42, 0, 2, 2, 0, 3, 0, 0, 0),
)

_AFFINE_V_NUM = (
    (-1, 3, 0, 0, 0, 1, 0, 3, 0),
    (42, 3, 0, 0, 0, 0, 2, 2, 0),
    (-78, 2, 1, 0, 0, 1, 1, 2, 0),
    (-72, 2, 1, 0, 0, 0, 3, 1, 0),
    (3, 2, 0, 1, 0, 2, 0, 2, 0),
    (-48, 2, 0, 1, 0, 1, 2, 1, 0),
    (72, 2, 0, 1, 0, 0, 4, 0, 0),
    (36, 1, 2, 0, 0, 2, 0, 2, 0),
    (144, 1, 2, 0, 0, 1, 2, 1, 0),
    (84, 1, 1, 1, 0, 2, 1, 1, 0),
    (-144, 1, 1, 1, 0, 1, 3, 0, 0),
    (-3, 1, 0, 2, 0, 3, 0, 1, 0),
    (6, 1, 0, 2, 0, 2, 2, 0, 0),
    (-72, 0, 3, 0, 0, 2, 1, 1, 0),
    (-36, 0, 2, 1, 0, 3, 0, 1, 0),
    (72, 0, 2, 1, 0, 2, 2, 0, 0),
    (-6, 0, 1, 2, 0, 3, 1, 0, 0),
    (1, 0, 0, 3, 0, 4, 0, 0, 0),
)


def _wronskian2() -> RatExpr:
    """u1_2*u2_3 - u1_3*u2_2, the second-order Wronskian of the two
    dependents."""
    u2 = RatExpr.var(VarId.jet(1, 2))
    u3 = RatExpr.var(VarId.jet(1, 3))
    v2 = RatExpr.var(VarId.jet(2, 2))
    v3 = RatExpr.var(VarId.jet(2, 3))
    return u2 * v3 - u3 * v2


def affine_system() -> NormalFormODE:
    """The order-5 system in two dependents uniquely determined by the
    affine algebra; both right-hand sides are reported as differential
    invariants of that algebra."""
    den = 144 * _wronskian2() ** 3
    f1 = 5 * RatExpr.from_poly(_poly_from_table(_AFFINE_U_NUM)) / den
    f2 = 5 * RatExpr.from_poly(_poly_from_table(_AFFINE_V_NUM)) / den
    return NormalFormODE(5, (f1, f2))


# -- order-6 system of the projective algebra (two dependents) ----------------

_PROJECTIVE_U_NUM = (
    (-144, 5, 0, 0, 0, 0, 2, 0, 2),
    (360, 5, 0, 0, 0, 0, 1, 2, 1),
    (-225, 5, 0, 0, 0, 0, 0, 4, 0),
    (288, 4, 1, 0, 0, 1, 1, 0, 2),
    (-360, 4, 1, 0, 0, 1, 0, 2, 1),
    (-480, 4, 1, 0, 0, 0, 2, 1, 1),
    (600, 4, 1, 0, 0, 0, 1, 3, 0),
    (-720, 4, 0, 1, 0, 1, 1, 1, 1),
    (900, 4, 0, 1, 0, 1, 0, 3, 0),
    (960, 4, 0, 1, 0, 0, 3, 0, 1),
    (-1200, 4, 0, 1, 0, 0, 2, 2, 0),
    (288, 4, 0, 0, 1, 1, 2, 0, 1),
    (-360, 4, 0, 0, 1, 1, 1, 2, 0),
    (240, 4, 0, 0, 1, 0, 3, 1, 0),
    (-144, 3, 2, 0, 0, 2, 0, 0, 2),
    (960, 3, 2, 0, 0, 1, 1, 1, 1),
    (-600, 3, 2, 0, 0, 1, 0, 3, 0),
    (-640, 3, 2, 0, 0, 0, 3, 0, 1),
    (400, 3, 2, 0, 0, 0, 2, 2, 0),
    (720, 3, 1, 1, 0, 2, 0, 1, 1),
    (-2400, 3, 1, 1, 0, 1, 2, 0, 1),
    (600, 3, 1, 1, 0, 1, 1, 2, 0),
    (400, 3, 1, 1, 0, 0, 3, 1, 0),
    (-576, 3, 1, 0, 1, 2, 1, 0, 1),
    (360, 3, 1, 0, 1, 2, 0, 2, 0),
    (-240, 3, 1, 0, 1, 1, 2, 1, 0),
    (640, 3, 1, 0, 1, 0, 4, 0, 0),
    (360, 3, 0, 2, 0, 2, 1, 0, 1),
    (-1350, 3, 0, 2, 0, 2, 0, 2, 0),
    (2400, 3, 0, 2, 0, 1, 2, 1, 0),
    (-800, 3, 0, 2, 0, 0, 4, 0, 0),
    (720, 3, 0, 1, 1, 2, 1, 1, 0),
    (-1200, 3, 0, 1, 1, 1, 3, 0, 0),
    (-144, 3, 0, 0, 2, 2, 2, 0, 0),
    (-480, 2, 3, 0, 0, 2, 0, 1, 1),
    (1920, 2, 3, 0, 0, 1, 2, 0, 1),
    (-800, 2, 3, 0, 0, 1, 1, 2, 0),
    (1920, 2, 2, 1, 0, 2, 1, 0, 1),
    (600, 2, 2, 1, 0, 2, 0, 2, 0),
    (-2000, 2, 2, 1, 0, 1, 2, 1, 0),
    (288, 2, 2, 0, 1, 3, 0, 0, 1),
    (-240, 2, 2, 0, 1, 2, 1, 1, 0),
    (-1920, 2, 2, 0, 1, 1, 3, 0, 0),
    (-360, 2, 1, 2, 0, 3, 0, 0, 1),
    (-3000, 2, 1, 2, 0, 2, 1, 1, 0),
    (2800, 2, 1, 2, 0, 1, 3, 0, 0),
    (-720, 2, 1, 1, 1, 3, 0, 1, 0),
    (3120, 2, 1, 1, 1, 2, 2, 0, 0),
    (288, 2, 1, 0, 2, 3, 1, 0, 0),
    (900, 2, 0, 3, 0, 3, 0, 1, 0),
    (-1200, 2, 0, 3, 0, 2, 2, 0, 0),
    (-360, 2, 0, 2, 1, 3, 1, 0, 0),
    (-1920, 1, 4, 0, 0, 2, 1, 0, 1),
    (400, 1, 4, 0, 0, 2, 0, 2, 0),
    (-480, 1, 3, 1, 0, 3, 0, 0, 1),
    (2800, 1, 3, 1, 0, 2, 1, 1, 0),
    (240, 1, 3, 0, 1, 3, 0, 1, 0),
    (1920, 1, 3, 0, 1, 2, 2, 0, 0),
    (600, 1, 2, 2, 0, 3, 0, 1, 0),
    (-3200, 1, 2, 2, 0, 2, 2, 0, 0),
    (-2640, 1, 2, 1, 1, 3, 1, 0, 0),
    (-144, 1, 2, 0, 2, 4, 0, 0, 0),
    (1800, 1, 1, 3, 0, 3, 1, 0, 0),
    (360, 1, 1, 2, 1, 4, 0, 0, 0),
    (-225, 1, 0, 4, 0, 4, 0, 0, 0),
    (640, 0, 5, 0, 0, 3, 0, 0, 1),
    (-1200, 0, 4, 1, 0, 3, 0, 1, 0),
    (-640, 0, 4, 0, 1, 3, 1, 0, 0),
    (1200, 0, 3, 2, 0, 3, 1, 0, 0),
    (720, 0, 3, 1, 1, 4, 0, 0, 0),
    (-600, 0, 2, 3, 0, 4, 0, 0, 0),
)

_PROJECTIVE_V_NUM = (
    (-144, 4, 0, 0, 0, 1, 2, 0, 2),
    (360, 4, 0, 0, 0, 1, 1, 2, 1),
    (-225, 4, 0, 0, 0, 1, 0, 4, 0),
    (720, 4, 0, 0, 0, 0, 3, 1, 1),
    (-600, 4, 0, 0, 0, 0, 2, 3, 0),
    (288, 3, 1, 0, 0, 2, 1, 0, 2),
    (-360, 3, 1, 0, 0, 2, 0, 2, 1),
    (-2640, 3, 1, 0, 0, 1, 2, 1, 1),
    (1800, 3, 1, 0, 0, 1, 1, 3, 0),
    (-640, 3, 1, 0, 0, 0, 4, 0, 1),
    (1200, 3, 1, 0, 0, 0, 3, 2, 0),
    (-720, 3, 0, 1, 0, 2, 1, 1, 1),
    (900, 3, 0, 1, 0, 2, 0, 3, 0),
    (240, 3, 0, 1, 0, 1, 3, 0, 1),
    (600, 3, 0, 1, 0, 1, 2, 2, 0),
    (-1200, 3, 0, 1, 0, 0, 4, 1, 0),
    (288, 3, 0, 0, 1, 2, 2, 0, 1),
    (-360, 3, 0, 0, 1, 2, 1, 2, 0),
    (-480, 3, 0, 0, 1, 1, 3, 1, 0),
    (640, 3, 0, 0, 1, 0, 5, 0, 0),
    (-144, 2, 2, 0, 0, 3, 0, 0, 2),
    (3120, 2, 2, 0, 0, 2, 1, 1, 1),
    (-1200, 2, 2, 0, 0, 2, 0, 3, 0),
    (1920, 2, 2, 0, 0, 1, 3, 0, 1),
    (-3200, 2, 2, 0, 0, 1, 2, 2, 0),
    (720, 2, 1, 1, 0, 3, 0, 1, 1),
    (-240, 2, 1, 1, 0, 2, 2, 0, 1),
    (-3000, 2, 1, 1, 0, 2, 1, 2, 0),
    (2800, 2, 1, 1, 0, 1, 3, 1, 0),
    (-576, 2, 1, 0, 1, 3, 1, 0, 1),
    (360, 2, 1, 0, 1, 3, 0, 2, 0),
    (1920, 2, 1, 0, 1, 2, 2, 1, 0),
    (-1920, 2, 1, 0, 1, 1, 4, 0, 0),
    (360, 2, 0, 2, 0, 3, 1, 0, 1),
    (-1350, 2, 0, 2, 0, 3, 0, 2, 0),
    (600, 2, 0, 2, 0, 2, 2, 1, 0),
    (400, 2, 0, 2, 0, 1, 4, 0, 0),
    (720, 2, 0, 1, 1, 3, 1, 1, 0),
    (-480, 2, 0, 1, 1, 2, 3, 0, 0),
    (-144, 2, 0, 0, 2, 3, 2, 0, 0),
    (-1200, 1, 3, 0, 0, 3, 0, 1, 1),
    (-1920, 1, 3, 0, 0, 2, 2, 0, 1),
    (2800, 1, 3, 0, 0, 2, 1, 2, 0),
    (-240, 1, 2, 1, 0, 3, 1, 0, 1),
    (2400, 1, 2, 1, 0, 3, 0, 2, 0),
    (-2000, 1, 2, 1, 0, 2, 2, 1, 0),
    (288, 1, 2, 0, 1, 4, 0, 0, 1),
    (-2400, 1, 2, 0, 1, 3, 1, 1, 0),
    (1920, 1, 2, 0, 1, 2, 3, 0, 0),
    (-360, 1, 1, 2, 0, 4, 0, 0, 1),
    (600, 1, 1, 2, 0, 3, 1, 1, 0),
    (-800, 1, 1, 2, 0, 2, 3, 0, 0),
    (-720, 1, 1, 1, 1, 4, 0, 1, 0),
    (960, 1, 1, 1, 1, 3, 2, 0, 0),
    (288, 1, 1, 0, 2, 4, 1, 0, 0),
    (900, 1, 0, 3, 0, 4, 0, 1, 0),
    (-600, 1, 0, 3, 0, 3, 2, 0, 0),
    (-360, 1, 0, 2, 1, 4, 1, 0, 0),
    (640, 0, 4, 0, 0, 3, 1, 0, 1),
    (-800, 0, 4, 0, 0, 3, 0, 2, 0),
    (240, 0, 3, 1, 0, 4, 0, 0, 1),
    (400, 0, 3, 1, 0, 3, 1, 1, 0),
    (960, 0, 3, 0, 1, 4, 0, 1, 0),
    (-640, 0, 3, 0, 1, 3, 2, 0, 0),
    (-1200, 0, 2, 2, 0, 4, 0, 1, 0),
    (400, 0, 2, 2, 0, 3, 2, 0, 0),
    (-480, 0, 2, 1, 1, 4, 1, 0, 0),
    (-144, 0, 2, 0, 2, 5, 0, 0, 0),
    (600, 0, 1, 3, 0, 4, 1, 0, 0),
    (360, 0, 1, 2, 1, 5, 0, 0, 0),
    (-225, 0, 0, 4, 0, 5, 0, 0, 0),
)


def projective_system() -> NormalFormODE:
    """The order-6 system in two dependents uniquely determined by the
    projective algebra."""
    den = 160 * _wronskian2() ** 4
    f1 = RatExpr.from_poly(_poly_from_table(_PROJECTIVE_U_NUM)) / den
    f2 = RatExpr.from_poly(_poly_from_table(_PROJECTIVE_V_NUM)) / den
    return NormalFormODE(6, (f1, f2))
