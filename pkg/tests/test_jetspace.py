import random
from fractions import Fraction

import pytest

from jetlie import (
    DependentGeneratorsError,
    JetContext,
    OrderOverflowError,
    RatExpr,
    SpanSolver,
    VarId,
    VectorField,
    canonical_string,
    closure_check,
    lie_bracket,
    make_atom,
    primitive_algebra,
    prolong,
    total_derivative,
)

from oracles import eval_equal

x = VarId.x()
u = VarId.jet(1, 0)
X = RatExpr.var(x)
U = RatExpr.var(u)
U1 = RatExpr.var(VarId.jet(1, 1))
U2 = RatExpr.var(VarId.jet(1, 2))
U3 = RatExpr.var(VarId.jet(1, 3))
one = RatExpr.const(1)
zero = RatExpr.const(0)


def sl2_realization():
    return (
        VectorField(zero, (one,)),
        VectorField(one, (U,)),
        VectorField(U, (U * U * Fraction(1, 2),)),
    )


class TestTotalDerivative:
    def test_square(self):
        ctx = JetContext(1, 2)
        assert total_derivative(U1 * U1, ctx) == 2 * U1 * U2

    def test_independent_variable(self):
        assert total_derivative(X, JetContext(1, 0)) == one

    def test_atom_chain(self):
        w_def = make_atom("w", 0, {x: RatExpr.var(VarId.atom(0, "w")) * (-2)})
        w = RatExpr.var(VarId.atom(0, "w"))
        ctx = JetContext(1, 2, (w_def,))
        got = total_derivative(w * U1 ** 3, ctx)
        expect = -2 * w * U1 ** 3 + 3 * w * U1 * U1 * U2
        assert got == expect
        assert eval_equal(got, expect, random.Random(5))

    def test_order_overflow(self):
        ctx = JetContext(1, 2)
        with pytest.raises(OrderOverflowError):
            total_derivative(U2, ctx)

    def test_raises_order_by_one(self):
        ctx = JetContext(1, 4)
        for e, k in ((U, 1), (U1 * U1, 2), (U3 + U1, 4)):
            d = total_derivative(e, ctx)
            assert d.max_jet_order() == k


class TestProlong:
    def test_sl2_third_generator(self):
        ctx = JetContext(1, 1)
        pf = prolong(sl2_realization()[2], 1, ctx)
        assert pf.coefficient(1, 1) == U * U1 - U1 * U1

    def test_scaling_field(self):
        ctx = JetContext(1, 2)
        pf = prolong(VectorField(one, (U,)), 2, ctx)
        assert pf.coefficient(1, 1) == U1
        assert pf.coefficient(1, 2) == U2

    def test_rotation_family_row(self):
        # third generator of plane algebra I with symbolic coefficient
        a = RatExpr.var(VarId.param("alpha"))
        field = VectorField(U + a * X, (a * U - X,))
        pf = prolong(field, 2, JetContext(1, 2))
        assert pf.coefficient(1, 1) == -(one + U1 * U1)
        assert pf.coefficient(1, 2) == -(U2 * (3 * U1 + a))

    def test_base_coefficients_preserved(self):
        for ident in ("IV", "VII"):
            alg = primitive_algebra(ident)
            for X_ in alg.generators:
                pf = prolong(X_, 3, JetContext(1, 3))
                assert pf.coefficient(1, 0) == X_.phis[0]
                assert pf.base.xi == X_.xi

    def test_linearity(self):
        rng = random.Random(17)
        gens = sl2_realization()
        ctx = JetContext(1, 3)
        for _ in range(10):
            a = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
            b = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
            Xa, Xb = rng.sample(gens, 2)
            combo = Xa.scale(a) + Xb.scale(b)
            pf = prolong(combo, 3, ctx)
            pa = prolong(Xa, 3, ctx)
            pb = prolong(Xb, 3, ctx)
            for k in range(4):
                assert pf.coefficient(1, k) == (
                    pa.coefficient(1, k).scale(a) + pb.coefficient(1, k).scale(b))


class TestLieBracket:
    def test_translation_scaling(self):
        A = VectorField(zero, (one,))
        B = VectorField(one, (U,))
        W = lie_bracket(A, B)
        assert W.xi.is_zero() and W.phis[0] == one

    def test_exponential_realization(self):
        E = RatExpr.var(VarId.atom(0, "E"))
        E_def = make_atom("E", 0, {u: E})
        W = lie_bracket(VectorField(zero, (E,)), VectorField(zero, (-one,)),
                        atoms=(E_def,))
        assert W.xi.is_zero() and W.phis[0] == E

    def test_sl2_bracket(self):
        _, B, C = sl2_realization()
        W = lie_bracket(B, C)
        assert W.xi == C.xi and W.phis[0] == C.phis[0]

    def test_antisymmetry_and_jacobi(self):
        rng = random.Random(29)
        gens = list(primitive_algebra("VIII").generators)
        for _ in range(10):
            A, B, C = rng.sample(gens, 3)
            AB = lie_bracket(A, B)
            BA = lie_bracket(B, A)
            assert (AB + BA).is_zero()
            jac = (lie_bracket(A, lie_bracket(B, C))
                   + lie_bracket(B, lie_bracket(C, A))
                   + lie_bracket(C, lie_bracket(A, B)))
            assert jac.is_zero()

    def test_prolongation_commutes_with_bracket(self):
        # coefficients of prolong([X, Y]) match the commutator of the
        # prolonged derivations applied to each jet coordinate
        rng = random.Random(31)
        gens = list(primitive_algebra("VII").generators)
        ctx = JetContext(1, 3)
        for _ in range(4):
            A, B = rng.sample(gens, 2)
            W = lie_bracket(A, B)
            pw = prolong(W, 3, ctx)
            pa = prolong(A, 3, ctx)
            pb = prolong(B, 3, ctx)
            for k in range(4):
                z = RatExpr.var(VarId.jet(1, k))
                commutator = pa.apply_to(pb.apply_to(z)) - pb.apply_to(pa.apply_to(z))
                assert pw.coefficient(1, k) == commutator


class TestClosure:
    def test_sl2_constants(self):
        rep = closure_check(sl2_realization())
        assert rep.closed
        assert rep.constant(0, 1, 0) == one
        assert rep.constant(0, 2, 1) == one
        assert rep.constant(1, 2, 2) == one
        assert rep.constant(1, 0, 0) == -one

    def test_eight_dimensional_projective(self):
        rep = primitive_algebra("VIII").closure()
        assert rep.closed
        assert rep.rational_constants() is not None

    def test_not_closed_witness(self):
        gens = [VectorField(one, (zero,)), VectorField(zero, (X * X,))]
        rep = closure_check(gens)
        assert not rep.closed
        a, b, W = rep.witness
        assert (a, b) == (0, 1)
        assert W.phis[0] == 2 * X

    def test_dependent_generators(self):
        A = VectorField(one, (U,))
        with pytest.raises(DependentGeneratorsError):
            closure_check([A, A.scale(Fraction(3, 2))])

    def test_jacobi_on_structure_constants(self):
        rep = closure_check(sl2_realization())
        k = 3
        for a in range(k):
            for b in range(k):
                for c in range(k):
                    for e in range(k):
                        s = RatExpr.const(0)
                        for d in range(k):
                            s = s + rep.constant(b, c, d) * rep.constant(a, d, e)
                            s = s + rep.constant(c, a, d) * rep.constant(b, d, e)
                            s = s + rep.constant(a, b, d) * rep.constant(c, d, e)
                        assert s.is_zero()

    def test_symbolic_parameter_closure(self):
        rep = primitive_algebra("I").closure()
        assert rep.closed
        assert rep.rational_constants() is None  # alpha enters the constants

    def test_span_solver_membership(self):
        solver = SpanSolver(primitive_algebra("VI").generators)
        inside = VectorField(X + U, (2 * X,))
        outside = VectorField(X * X, (zero,))
        assert solver.contains(inside)
        assert not solver.contains(outside)
