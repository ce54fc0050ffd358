"""Randomized property suites with fixed seeds; each suite runs a stated
number of independent instances and returns the count checked.  Shared by the
granular property tests and the acceptance runner."""

from __future__ import annotations

import random
from fractions import Fraction

from jetlie import (
    AlgebraSpec,
    JetContext,
    ParseEnv,
    Poly,
    RatExpr,
    VarId,
    VectorField,
    canonical_string,
    certify_hypersurface,
    generic_rank,
    lie_bracket,
    make_atom,
    parse_expression,
    poly_gcd,
    primitive_algebra,
    prolong,
    prolongation_matrix,
    exact_divide,
    try_exact_divide,
)

X_ = VarId.x()
U_ = VarId.jet(1, 0)
U1_ = VarId.jet(1, 1)
U2_ = VarId.jet(1, 2)
KERNEL_VARS = (X_, U_, U1_, U2_)


def random_poly(rng: random.Random, vars_=KERNEL_VARS, max_terms=4, max_exp=3) -> Poly:
    p = Poly.zero()
    for _ in range(rng.randint(0, max_terms)):
        t = Poly.const(Fraction(rng.randint(-6, 6), rng.randint(1, 3)))
        for v in vars_:
            e = rng.randint(0, max_exp)
            if e:
                t = t * Poly.var(v, e)
        p = p + t
    return p


def random_expr(rng: random.Random, vars_=KERNEL_VARS) -> RatExpr:
    num = random_poly(rng, vars_)
    den = Poly.zero()
    while den.is_zero():
        den = random_poly(rng, vars_, max_terms=2, max_exp=2)
    return RatExpr(num, den)


def suite_ring_laws(count=100, seed=101) -> int:
    rng = random.Random(seed)
    for _ in range(count):
        a, b, c = (random_poly(rng) for _ in range(3))
        assert (a + b) * c == a * c + b * c
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)
        assert a + b == b + a
        assert (a + b) + c == a + (b + c)
    return count


def suite_leibniz(count=100, seed=102) -> int:
    from jetlie import differentiate

    w_def = make_atom("w", 0, {X_: RatExpr.var(VarId.atom(0, "w")) * (-2)})
    w_var = VarId.atom(0, "w")
    rng = random.Random(seed)
    vars_ = KERNEL_VARS + (w_var,)
    targets = KERNEL_VARS + (w_var,)
    for i in range(count):
        a = random_expr(rng, vars_)
        b = random_expr(rng, vars_)
        v = targets[i % len(targets)]
        lhs = differentiate(a * b, v, atoms=(w_def,))
        rhs = (differentiate(a, v, atoms=(w_def,)) * b
               + a * differentiate(b, v, atoms=(w_def,)))
        assert lhs == rhs
    return count


def suite_divide_gcd(count=100, seed=103) -> int:
    rng = random.Random(seed)
    done = 0
    while done < count:
        a = random_poly(rng)
        b = random_poly(rng)
        if b.is_zero():
            continue
        q = exact_divide(a * b, b)
        assert q * b == a * b
        g = poly_gcd(a, b) if not a.is_zero() else b.primitive()
        if not a.is_zero():
            ca = try_exact_divide(a, g)
            cb = try_exact_divide(b, g)
            assert ca is not None and cb is not None
            # cofactors are coprime: a*b = g * (a/g) * b exactly
            assert g * ca * b == a * b
            assert poly_gcd(ca, cb).is_const()
        done += 1
    return count


def suite_prolongation_linearity(count=100, seed=104) -> int:
    rng = random.Random(seed)
    gens = list(primitive_algebra("VIII").generators)
    ctx = JetContext(1, 3)
    for _ in range(count):
        a = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        b = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        Xa, Xb = rng.sample(gens, 2)
        combo = Xa.scale(a) + Xb.scale(b)
        pc = prolong(combo, 3, ctx)
        pa = prolong(Xa, 3, ctx)
        pb = prolong(Xb, 3, ctx)
        for k in range(4):
            assert pc.coefficient(1, k) == (
                pa.coefficient(1, k).scale(a) + pb.coefficient(1, k).scale(b))
    return count


def suite_bracket_laws(count=100, seed=105) -> int:
    rng = random.Random(seed)
    pool = (list(primitive_algebra("VIII").generators)
            + list(primitive_algebra("VII").generators))
    for _ in range(count):
        A, B, C = rng.sample(pool, 3)
        assert (lie_bracket(A, B) + lie_bracket(B, A)).is_zero()
        jac = (lie_bracket(A, lie_bracket(B, C))
               + lie_bracket(B, lie_bracket(C, A))
               + lie_bracket(C, lie_bracket(A, B)))
        assert jac.is_zero()
    return count


def suite_parse_round_trip(count=100, seed=106) -> int:
    rng = random.Random(seed)
    env = ParseEnv(1, 3, (), ("K",))
    vars_ = KERNEL_VARS + (VarId.param("K"),)
    for _ in range(count):
        e = random_expr(rng, vars_)
        assert parse_expression(canonical_string(e), env) == e
    return count


def unimodular_mix(gens, rng):
    gens = list(gens)
    for _ in range(6):
        i, j = rng.sample(range(len(gens)), 2)
        gens[i] = gens[i] + gens[j].scale(Fraction(rng.randint(-3, 3)))
        if rng.random() < 0.3:
            gens[i] = gens[i].scale(-1)
    return tuple(gens)


def suite_basis_invariance(count=100, seed=107) -> int:
    rng = random.Random(seed)
    u2 = RatExpr.var(U2_)
    u1 = RatExpr.var(U1_)
    u3 = RatExpr.var(VarId.jet(1, 3))
    one = RatExpr.const(1)
    circles = ((one + u1 * u1) * u3 - 3 * u1 * u2 * u2).as_poly()
    cases = [
        ("IV", 2, u2.as_poly(), "Certified", 4),
        ("VII", 3, circles, "Certified", 5),
        ("I", 1, u1.as_poly(), "Failed", 3),
    ]
    for i in range(count):
        ident, order, eq, verdict, rank = cases[i % len(cases)]
        alg = primitive_algebra(ident) if ident != "I" else primitive_algebra("I", 2)
        mixed = AlgebraSpec("mixed", unimodular_mix(alg.generators, rng), alg.dim)
        rep = generic_rank(prolongation_matrix(mixed, order))
        assert rep.generic_rank == rank
        cert = certify_hypersurface(mixed, order, eq)
        assert cert.verdict == verdict
    return count


ALL_SUITES = (
    ("kernel ring laws", suite_ring_laws),
    ("Leibniz rule (with atoms)", suite_leibniz),
    ("exact division and gcd soundness", suite_divide_gcd),
    ("prolongation linearity", suite_prolongation_linearity),
    ("bracket antisymmetry and Jacobi", suite_bracket_laws),
    ("parse/print round trip", suite_parse_round_trip),
    ("basis invariance of ranks and verdicts", suite_basis_invariance),
)
