import random
from fractions import Fraction

import pytest

from jetlie import (
    DenominatorVanishesError,
    NotDivisibleError,
    Poly,
    RatExpr,
    VarId,
    arith,
    canonical_string,
    differentiate,
    exact_divide,
    make_atom,
    poly_gcd,
    substitute,
    try_exact_divide,
)

from oracles import eval_equal

x = VarId.x()
u = VarId.jet(1, 0)
u1 = VarId.jet(1, 1)
u2 = VarId.jet(1, 2)
X = RatExpr.var(x)
U = RatExpr.var(u)
U1 = RatExpr.var(u1)
U2 = RatExpr.var(u2)
one = RatExpr.const(1)


def exp_decay_atom():
    w = VarId.atom(0, "w")
    return make_atom("w", 0, {x: RatExpr.var(w) * (-2)}), RatExpr.var(w)


def arctan_atom(index=0):
    a = VarId.atom(index, "a")
    return make_atom("a", index, {u1: one / (one + U1 * U1)}), RatExpr.var(a)


class TestArith:
    def test_difference_of_squares(self):
        assert arith("mul", one + U1, one - U1) == one - U1 * U1

    def test_exact_cancellation(self):
        e = arith("div", U2 * (one + U1 * U1), U2)
        assert e == one + U1 * U1

    def test_atom_scalar_scaling(self):
        w_def, w = exp_decay_atom()
        K = RatExpr.var(VarId.param("K"))
        e = arith("mul", K * w * U1 ** 3, RatExpr.const(2), atoms=(w_def,))
        assert e == 2 * K * w * U1 ** 3

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            arith("div", one, RatExpr.const(0))

    def test_normalized_denominator_sign(self):
        e = U1 / (RatExpr.const(-2) * U)
        assert canonical_string(e.denominator) == "u1"
        assert e * (RatExpr.const(-2) * U) == U1


class TestExactDivide:
    def test_simple_quotient(self):
        a = (U2 * U2 * (one + U1 * U1)).as_poly()
        assert exact_divide(a, U2.as_poly()) == (U2 * (one + U1 * U1)).as_poly()

    def test_degree_obstruction(self):
        with pytest.raises(NotDivisibleError):
            exact_divide((one + U1 * U1).as_poly(), U2.as_poly())

    def test_zero_divisor(self):
        with pytest.raises(ZeroDivisionError):
            exact_divide(U2.as_poly(), Poly.zero())

    def test_soundness_on_random_products(self):
        rng = random.Random(7)
        vars_ = [x, u, u1, u2]
        for _ in range(25):
            a = _random_poly(rng, vars_)
            b = _random_poly(rng, vars_)
            if b.is_zero():
                continue
            q = exact_divide(a * b, b)
            assert q * b == a * b

    def test_rational_coefficient_quotient(self):
        a = (U1 * Fraction(3, 4)).as_poly()
        b = (U1 * Fraction(1, 2)).as_poly()
        q = exact_divide(a, b)
        assert q == Poly.const(Fraction(3, 2))


class TestGcd:
    def test_common_monomial_factor(self):
        g = poly_gcd((U2 * (one + U1 * U1)).as_poly(), (U2 * U1).as_poly())
        assert g == U2.as_poly()

    def test_gcd_with_zero(self):
        p = (U2 * (one + U1 * U1)).as_poly()
        assert poly_gcd(p, Poly.zero()) == p.primitive()
        assert poly_gcd(Poly.zero(), Poly.zero()) == Poly.zero()

    def test_gcd_divides_both(self):
        rng = random.Random(11)
        vars_ = [x, u, u1]
        for _ in range(20):
            g = _random_poly(rng, vars_, max_terms=2)
            a = g * _random_poly(rng, vars_)
            b = g * _random_poly(rng, vars_)
            if a.is_zero() or b.is_zero():
                continue
            d = poly_gcd(a, b)
            assert try_exact_divide(a, d) is not None
            assert try_exact_divide(b, d) is not None
            if not g.is_const():
                assert try_exact_divide(d, g.primitive()) is not None

    def test_normalization(self):
        g = poly_gcd((-2 * U2 * U1).as_poly(), (RatExpr.const(4) * U2).as_poly())
        assert g == U2.as_poly()  # positive leading coefficient, content 1


class TestDifferentiate:
    def test_power_rule(self):
        assert differentiate(U1 * U1, u1) == 2 * U1

    def test_exp_decay_rule(self):
        w_def, w = exp_decay_atom()
        assert differentiate(w, x, atoms=(w_def,)) == -2 * w

    def test_arctan_rule(self):
        a_def, a = arctan_atom()
        assert differentiate(a, u1, atoms=(a_def,)) == one / (one + U1 * U1)

    def test_parameter_derivative(self):
        K = VarId.param("K")
        e = RatExpr.var(K) * U1
        assert differentiate(e, K) == U1
        assert differentiate(e, x).is_zero()

    def test_leibniz_with_atoms(self):
        w_def, w = exp_decay_atom()
        rng = random.Random(3)
        a = w * U1 ** 2 + X * U
        b = w * w - U1
        for v in (x, u1, u):
            lhs = differentiate(a * b, v, atoms=(w_def,))
            rhs = (differentiate(a, v, atoms=(w_def,)) * b
                   + a * differentiate(b, v, atoms=(w_def,)))
            assert lhs == rhs
            assert eval_equal(lhs, rhs, rng)

    def test_quotient(self):
        e = U2 / (one + U1 * U1)
        d = differentiate(e, u1)
        assert d == -2 * U1 * U2 / ((one + U1 * U1) ** 2)


class TestSubstitute:
    def test_residual_vanishes(self):
        f = U1 * Fraction(1, 2)
        assert substitute(U2 - f, {u2: f}).is_zero()

    def test_multi_binding(self):
        e = U1 * U1 + X
        assert substitute(e, {u1: RatExpr.const(0), x: one}) == one

    def test_denominator_vanishes(self):
        e = one / U1
        with pytest.raises(DenominatorVanishesError):
            substitute(e, {u1: RatExpr.const(0)})

    def test_rational_binding(self):
        e = U2 ** 2 + U2
        b = U1 / (one + U)
        got = substitute(e, {u2: b})
        assert got == b * b + b


class TestCanonicalString:
    def test_difference_of_squares(self):
        assert canonical_string(one - U1 * U1) == "1 - u1_1^2"

    def test_expanded_product(self):
        assert canonical_string(-(U2 * (one + U1 * U1))) == "-u1_2 - u1_1^2*u1_2"

    def test_rational_rendering(self):
        e = one / (one + U1 * U1)
        assert canonical_string(e) == "(1)/(1 + u1_1^2)"

    def test_zero(self):
        assert canonical_string(RatExpr.const(0)) == "0"

    def test_coefficients(self):
        e = U1 * Fraction(1, 2) - 3 * U
        assert canonical_string(e) == "1/2*u1_1 - 3*u1"


class TestAtomRelations:
    def test_square_root_relation(self):
        s_def, s, rel = self._sqrt_atom()
        sq = arith("mul", s, s, atoms=(s_def,))
        assert sq == one + U1 * U1

    def test_relation_reduces_higher_powers(self):
        s_def, s, rel = self._sqrt_atom()
        cube = arith("mul", arith("mul", s, s, atoms=(s_def,)), s, atoms=(s_def,))
        assert cube == (one + U1 * U1) * s

    def test_chain_rule_through_relation(self):
        s_def, s, rel = self._sqrt_atom()
        d = differentiate(arith("mul", s, s, atoms=(s_def,)), u1, atoms=(s_def,))
        assert d == 2 * U1

    @staticmethod
    def _sqrt_atom():
        s_var = VarId.atom(0, "s")
        s = RatExpr.var(s_var)
        rel = (s * s - one - U1 * U1).as_poly()
        s_def = make_atom("s", 0, {u1: U1 * s / (one + U1 * U1)}, relation=rel)
        return s_def, s, rel


class TestNormalizationIdempotence:
    def test_rebuild_is_identity(self):
        rng = random.Random(23)
        vars_ = [x, u, u1, u2]
        for _ in range(30):
            num = _random_poly(rng, vars_)
            den = _random_poly(rng, vars_)
            if den.is_zero():
                continue
            e = RatExpr(num, den)
            again = RatExpr(e.numerator, e.denominator)
            assert again.numerator == e.numerator
            assert again.denominator == e.denominator


def _random_poly(rng, vars_, max_terms=4, max_exp=3, coeff_range=6):
    terms = {}
    p = Poly.zero()
    for _ in range(rng.randint(0, max_terms)):
        t = Poly.const(Fraction(rng.randint(-coeff_range, coeff_range),
                                rng.randint(1, 3)))
        for v in vars_:
            e = rng.randint(0, max_exp)
            if e:
                t = t * Poly.var(v, e)
        p = p + t
    return p
