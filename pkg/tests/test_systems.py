"""The built-in high-order systems against an independent derivation: at
random rational jet points, solve for the top derivatives at which the
prolonged algebra's rank drops below the full column count, and compare with
the stored right-hand sides."""

import random
from fractions import Fraction

import pytest

from jetlie import (
    RatExpr,
    VarId,
    check_invariant,
    check_point_symmetry,
    prolongation_matrix,
    space_algebra,
)
from jetlie.systems import (
    affine_system,
    circles,
    exponential_cubic_ode,
    projective_system,
    straight_lines,
)

from oracles import rank_drop_rhs_at_point


def _oracle_matches(kind, order, ode, seed, trials=5):
    alg = space_algebra(kind, 2)
    Mx = prolongation_matrix(alg, order)
    colvars = Mx.column_vars()
    rng = random.Random(seed)
    done = 0
    guard = 0
    while done < trials:
        guard += 1
        assert guard < 100, "too many degenerate points"
        point = {v.key: Fraction(rng.randint(-9, 9), rng.randint(1, 7)) for v in colvars}
        try:
            expect = tuple(f.eval_at(point) for f in ode.rhs)
        except ZeroDivisionError:
            continue
        got = rank_drop_rhs_at_point(Mx, order, 2, point)
        if got is None:
            continue
        assert got == expect
        done += 1


class TestLinesAndCircles:
    def test_lines_shape(self):
        ode = straight_lines(3)
        assert ode.order == 2 and ode.m == 3
        assert all(f.is_zero() for f in ode.rhs)

    def test_circles_tangent_for_all_supported_m(self):
        for m in (2, 3, 4):
            ode = circles(m)
            alg = space_algebra("conformal", m)
            assert all(check_point_symmetry(ode, X) for X in alg.generators)

    def test_scalar_circle_reduces_to_curvature_flow(self):
        ode = circles(1)
        u1 = RatExpr.var(VarId.jet(1, 1))
        u2 = RatExpr.var(VarId.jet(1, 2))
        assert ode.rhs[0] == 3 * u1 * u2 * u2 / (RatExpr.const(1) + u1 * u1)


class TestAffineSystem:
    def test_matches_rank_drop_derivation(self):
        _oracle_matches("affine", 5, affine_system(), seed=12345)

    def test_all_generators_tangent(self):
        ode = affine_system()
        alg = space_algebra("affine", 2)
        assert all(check_point_symmetry(ode, X) for X in alg.generators)

    def test_rhs_not_annihilated_by_stretchings(self):
        # the right-hand sides carry nonzero weights under the dilations, so
        # they are tangency-compatible but not absolute invariants
        ode = affine_system()
        alg = space_algebra("affine", 2)
        assert not check_invariant(alg, 5, ode.rhs[0])
        assert not check_invariant(alg, 5, ode.rhs[1])

    def test_rhs_annihilated_by_translations_and_shears(self):
        from jetlie import JetContext, prolong

        ode = affine_system()
        alg = space_algebra("affine", 2)
        ctx = JetContext(2, 5)
        # generators fixing both the x-weight and the u-weight of the ratio
        annihilators = [0, 1, 2, 4, 5, 8, 11]
        for idx in annihilators:
            pf = prolong(alg.generators[idx], 5, ctx)
            assert pf.apply_to(ode.rhs[0]).is_zero()


class TestProjectiveSystem:
    def test_matches_rank_drop_derivation(self):
        _oracle_matches("projective", 6, projective_system(), seed=999)

    def test_swap_symmetry_of_the_two_equations(self):
        # relabeling the dependents is itself a projective transformation, so
        # the second right-hand side is the first under u <-> v
        ode = projective_system()
        f1, f2 = ode.rhs
        swap = {}
        for k in range(2, 7):
            swap[VarId.jet(1, k)] = RatExpr.var(VarId.jet(2, k))
            swap[VarId.jet(2, k)] = RatExpr.var(VarId.jet(1, k))
        from jetlie import substitute

        assert substitute(f1, swap) == f2


class TestExponentialCubic:
    def test_structure(self):
        ode = exponential_cubic_ode()
        assert ode.order == 2
        assert len(ode.atoms) == 1
        assert ode.atoms[0].name == "w"
