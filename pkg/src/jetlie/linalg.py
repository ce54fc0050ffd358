"""Fraction-free exact determinants for matrices of polynomials or rational
expressions; shared by the rank/certificate machinery and the first-integral
construction."""

from __future__ import annotations

from typing import Sequence

from .exprcore import Poly, RatExpr, exact_divide, poly_gcd


class NotSquareError(ValueError):
    pass


def det_poly(rows: Sequence[Sequence[Poly]]) -> Poly:
    """Exact determinant of a square polynomial matrix by fraction-free
    Bareiss elimination with full pivoting (fewest-terms pivot)."""
    n = len(rows)
    if n == 0:
        return Poly.const(1)
    M = [list(r) for r in rows]
    if any(len(r) != n for r in M):
        raise NotSquareError("determinant of a non-square matrix")
    sign = 1
    prev = Poly.const(1)
    for k in range(n - 1):
        best = None
        for i in range(k, n):
            for j in range(k, n):
                if not M[i][j].is_zero():
                    w = len(M[i][j].terms)
                    if best is None or w < best[0]:
                        best = (w, i, j)
        if best is None:
            return Poly()
        _, pi, pj = best
        if pi != k:
            M[k], M[pi] = M[pi], M[k]
            sign = -sign
        if pj != k:
            for row in M:
                row[k], row[pj] = row[pj], row[k]
            sign = -sign
        piv = M[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = exact_divide(piv * M[i][j] - M[i][k] * M[k][j], prev)
            M[i][k] = Poly()
        prev = piv
    out = M[n - 1][n - 1]
    return -out if sign < 0 else out


def clear_row_denominators(
    rows: Sequence[Sequence[RatExpr]],
) -> tuple[list[list[Poly]], RatExpr]:
    """Scale each row to polynomial entries; returns the cleared matrix and
    the product of the factors taken out (so det(original) =
    det(cleared) / factor)."""
    cleared: list[list[Poly]] = []
    factor = RatExpr.const(1)
    for row in rows:
        den = Poly.const(1)
        for e in row:
            if not e.denominator.is_const():
                g = poly_gcd(den, e.denominator)
                den = exact_divide(den * e.denominator, g)
        if den.is_const():
            cleared.append([e.as_poly() for e in row])
        else:
            den_expr = RatExpr.from_poly(den)
            cleared.append([(e * den_expr).as_poly() for e in row])
            factor = factor * den_expr
    return cleared, factor


def det_rational(rows: Sequence[Sequence[RatExpr]]) -> RatExpr:
    """Exact determinant of a square matrix with rational-expression entries."""
    cleared, factor = clear_row_denominators(rows)
    d = det_poly(cleared)
    return RatExpr.from_poly(d) / factor
