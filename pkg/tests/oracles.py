"""Independent oracles for the test suite: cofactor-expansion determinants,
exact random-point evaluation, small Fraction linear algebra, and derivation
of rank-drop normal forms.  Everything here is deliberately separate from the
implementations under test."""

from __future__ import annotations

import random
from fractions import Fraction

from jetlie import Poly, RatExpr, VarId


def cofactor_det(rows):
    """Determinant by Laplace expansion along the first row (RatExpr or Poly
    entries)."""
    n = len(rows)
    if n == 0:
        return RatExpr.const(1)
    if n == 1:
        return rows[0][0]
    total = RatExpr.const(0)
    for j in range(n):
        entry = rows[0][j]
        if isinstance(entry, Poly):
            entry = RatExpr.from_poly(entry)
        if entry.is_zero():
            continue
        sub = [[r[k] for k in range(n) if k != j] for r in rows[1:]]
        minor = cofactor_det(sub)
        term = entry * minor
        total = total + (term if j % 2 == 0 else -term)
    return total


def random_point(keys, rng, num_range=9, den_range=5):
    return {
        k: Fraction(rng.randint(-num_range, num_range), rng.randint(1, den_range))
        for k in keys
    }


def eval_equal(a, b, rng, trials=5):
    """Exact evaluation agreement of two expressions at random points that
    avoid denominator zeros."""
    if isinstance(a, Poly):
        a = RatExpr.from_poly(a)
    if isinstance(b, Poly):
        b = RatExpr.from_poly(b)
    keys = (a.numerator.variables() | a.denominator.variables()
            | b.numerator.variables() | b.denominator.variables())
    done = 0
    guard = 0
    while done < trials:
        guard += 1
        assert guard < 200, "could not find enough non-degenerate points"
        point = random_point(keys, rng)
        try:
            va = a.eval_at(point)
            vb = b.eval_at(point)
        except ZeroDivisionError:
            continue
        if va != vb:
            return False
        done += 1
    return True


def left_kernel(rows):
    """Left kernel basis of an exact numeric matrix (list of Fraction rows)."""
    k = len(rows)
    n = len(rows[0]) if rows else 0
    A = [list(r) + [Fraction(int(i == j)) for j in range(k)] for i, r in enumerate(rows)]
    pr = 0
    for col in range(n):
        sel = None
        for r in range(pr, k):
            if A[r][col]:
                sel = r
                break
        if sel is None:
            continue
        A[pr], A[sel] = A[sel], A[pr]
        inv = 1 / A[pr][col]
        A[pr] = [v * inv for v in A[pr]]
        for r in range(k):
            if r != pr and A[r][col]:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[pr])]
        pr += 1
    return [A[r][n:] for r in range(pr, k) if all(v == 0 for v in A[r][:n])]


def rank_drop_rhs_at_point(Mx, order, m, point):
    """Solve, at one evaluated point, for the top derivatives that make the
    prolongation-matrix rank drop below the full column count; returns the
    tuple of right-hand side values or None at a degenerate point."""
    colvars = Mx.column_vars()
    top = [VarId.jet(i, order) for i in range(1, m + 1)]
    low_cols = [j for j, v in enumerate(colvars) if v not in top]
    top_cols = [colvars.index(t) for t in top]
    W = [[Mx.entry(a, j).eval_at(point) for j in low_cols] for a in range(Mx.rows)]
    kern = left_kernel(W)
    if len(kern) != Mx.rows - len(low_cols):
        return None

    def entry_affine(a, j):
        base = dict(point)
        for t in top:
            base[t.key] = Fraction(0)
        c0 = Mx.entry(a, j).eval_at(base)
        coefs = []
        for t in top:
            base[t.key] = Fraction(1)
            coefs.append(Mx.entry(a, j).eval_at(base) - c0)
            base[t.key] = Fraction(0)
        return c0, coefs

    eqs = []
    for y in kern:
        for tc in top_cols:
            c0 = Fraction(0)
            cs = [Fraction(0)] * m
            for a in range(Mx.rows):
                if y[a]:
                    e0, ec = entry_affine(a, tc)
                    c0 += y[a] * e0
                    for i in range(m):
                        cs[i] += y[a] * ec[i]
            eqs.append((c0, cs))
    # solve the first independent m x m subsystem, check the rest
    sol = _solve_affine(eqs, m)
    if sol is None:
        return None
    for c0, cs in eqs:
        if c0 + sum(c * s for c, s in zip(cs, sol)) != 0:
            return None
    return tuple(sol)


def _solve_affine(eqs, m):
    import itertools

    for combo in itertools.combinations(range(len(eqs)), m):
        mat = [list(eqs[i][1]) for i in combo]
        rhs = [-eqs[i][0] for i in combo]
        sol = _solve_square(mat, rhs)
        if sol is not None:
            return sol
    return None


def _solve_square(mat, rhs):
    n = len(mat)
    A = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for k in range(n):
        sel = None
        for r in range(k, n):
            if A[r][k]:
                sel = r
                break
        if sel is None:
            return None
        A[k], A[sel] = A[sel], A[k]
        inv = 1 / A[k][k]
        A[k] = [v * inv for v in A[k]]
        for r in range(n):
            if r != k and A[r][k]:
                f = A[r][k]
                A[r] = [a - f * b for a, b in zip(A[r], A[k])]
    return [A[i][n] for i in range(n)]
