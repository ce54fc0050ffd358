"""Jet spaces over one independent variable: total derivative, prolongation
of point vector fields, Lie brackets and Lie-algebra closure.

A context fixes the number of dependent variables ``m`` and a maximum jet
order; the space has coordinates ``x, u^i, u^i_1, ..., u^i_r`` of dimension
``1 + m(r+1)``.  Prolongation follows the classical recursion

    X^i_0 = phi_i,      X^i_{k+1} = D_x(X^i_k) - u^i_{k+1} * D_x(xi),

where ``D_x`` is the total derivative.  All operations are pure functions on
immutable data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .exprcore import (
    AtomDef,
    Fraction,
    Poly,
    RatExpr,
    VarId,
    apply_derivation,
    canonical_string,
)

ONE = RatExpr.const(1)
ZERO = RatExpr.const(0)


class OrderOverflowError(ValueError):
    """Raised when an operation would need jet variables beyond the context's
    maximum order."""


class DependentGeneratorsError(ValueError):
    """Raised when an algebra basis is linearly dependent over Q."""


@dataclass(frozen=True)
class JetContext:
    """Ambient jet space: ``m`` dependent variables up to ``max_order``."""

    m: int
    max_order: int
    atoms: tuple[AtomDef, ...] = ()

    def __post_init__(self):
        if self.m < 1 or self.max_order < 0:
            raise ValueError("need m >= 1 and max_order >= 0")

    @property
    def dim(self) -> int:
        return 1 + self.m * (self.max_order + 1)

    def coordinates(self) -> list[VarId]:
        """Jet coordinates in matrix column order: x, then all u^i_k grouped
        by order k ascending, i ascending within each order."""
        out = [VarId.x()]
        for k in range(self.max_order + 1):
            for i in range(1, self.m + 1):
                out.append(VarId.jet(i, k))
        return out

    def jet(self, i: int, k: int) -> VarId:
        if not (1 <= i <= self.m and 0 <= k <= self.max_order):
            raise OrderOverflowError(f"u{i}_{k} outside context (m={self.m}, r={self.max_order})")
        return VarId.jet(i, k)

    def with_order(self, max_order: int) -> "JetContext":
        return JetContext(self.m, max_order, self.atoms)


@dataclass(frozen=True)
class VectorField:
    """Point vector field ``xi * d/dx + sum_i phi_i * d/du^i`` on the space of
    independent and dependent variables; coefficients may involve atoms and
    parameters but no jet variable of order >= 1."""

    xi: RatExpr
    phis: tuple[RatExpr, ...]

    def __post_init__(self):
        for comp in (self.xi, *self.phis):
            for v in comp.var_ids():
                if v.is_jet() and v.jet_order >= 1:
                    raise ValueError(f"point vector field must not involve {v.name}")

    @property
    def m(self) -> int:
        return len(self.phis)

    def components(self) -> tuple[RatExpr, ...]:
        return (self.xi, *self.phis)

    def apply_to(self, e: RatExpr, atoms: Sequence[AtomDef] = ()) -> RatExpr:
        """Apply the field as a derivation in the order-0 variables."""
        coeffs = {VarId.x(): self.xi}
        for i, phi in enumerate(self.phis, start=1):
            coeffs[VarId.jet(i, 0)] = phi
        return apply_derivation(coeffs, e, atoms)

    def scale(self, c) -> "VectorField":
        return VectorField(self.xi.scale(c), tuple(p.scale(c) for p in self.phis))

    def __add__(self, other: "VectorField") -> "VectorField":
        if self.m != other.m:
            raise ValueError("vector fields live on different spaces")
        return VectorField(self.xi + other.xi,
                           tuple(a + b for a, b in zip(self.phis, other.phis)))

    def is_zero(self) -> bool:
        return self.xi.is_zero() and all(p.is_zero() for p in self.phis)

    def __str__(self) -> str:
        parts = [f"[{canonical_string(self.xi)}] dx"]
        parts += [f"[{canonical_string(p)}] du{i}" for i, p in enumerate(self.phis, 1)]
        return " + ".join(parts)


@dataclass(frozen=True)
class ProlongedField:
    """A point vector field together with its prolonged coefficients
    ``X^i_k`` for ``1 <= i <= m``, ``0 <= k <= order``."""

    base: VectorField
    order: int
    coeffs: tuple[tuple[RatExpr, ...], ...]  # coeffs[i-1][k]

    def coefficient(self, i: int, k: int) -> RatExpr:
        return self.coeffs[i - 1][k]

    def components(self) -> list[RatExpr]:
        """All components in jet coordinate order (x first, then by order)."""
        out = [self.base.xi]
        for k in range(self.order + 1):
            for i in range(1, self.base.m + 1):
                out.append(self.coeffs[i - 1][k])
        return out

    def derivation_coeffs(self) -> dict[VarId, RatExpr]:
        d = {VarId.x(): self.base.xi}
        for i in range(1, self.base.m + 1):
            for k in range(self.order + 1):
                d[VarId.jet(i, k)] = self.coeffs[i - 1][k]
        return d

    def apply_to(self, e: RatExpr, atoms: Sequence[AtomDef] = ()) -> RatExpr:
        return apply_derivation(self.derivation_coeffs(), e, atoms)


@lru_cache(maxsize=None)
def _dx_coeffs(m: int, max_order: int) -> dict:
    coeffs = {VarId.x(): ONE}
    for i in range(1, m + 1):
        for k in range(max_order):
            coeffs[VarId.jet(i, k)] = RatExpr.var(VarId.jet(i, k + 1))
    return coeffs


def _needed_order(e: RatExpr, atoms: Sequence[AtomDef]) -> int:
    """Smallest max_order a context needs so that D_x(e) fits."""
    need = 0
    support = e.var_ids()
    for v in support:
        if v.is_jet():
            need = max(need, v.jet_order + 1)
    for atom in atoms:
        if atom.var_id() in support:
            for rv, rule in atom.rules:
                if rv.is_jet():
                    need = max(need, rv.jet_order + 1)
                need = max(need, rule.max_jet_order(atoms))
    return need


def total_derivative(e: RatExpr, ctx: JetContext) -> RatExpr:
    """Total derivative ``D_x(e)``; raises :class:`OrderOverflowError` when
    the result would need order beyond the context."""
    need = _needed_order(e, ctx.atoms)
    if need > ctx.max_order:
        raise OrderOverflowError(
            f"total derivative needs order {need}, context allows {ctx.max_order}"
        )
    return apply_derivation(_dx_coeffs(ctx.m, ctx.max_order), e, ctx.atoms)


def prolong(X: VectorField, r: int, ctx: JetContext) -> ProlongedField:
    """Prolong a point vector field to jet order ``r``."""
    if r > ctx.max_order:
        raise OrderOverflowError(f"prolongation order {r} exceeds context max_order={ctx.max_order}")
    if X.m != ctx.m:
        raise ValueError("vector field and context disagree on the number of dependents")
    dxi = total_derivative(X.xi, ctx) if r >= 1 else ZERO
    rows = []
    for i in range(1, ctx.m + 1):
        row = [X.phis[i - 1]]
        for k in range(r):
            row.append(total_derivative(row[k], ctx) - RatExpr.var(VarId.jet(i, k + 1)) * dxi)
        rows.append(tuple(row))
    return ProlongedField(X, r, tuple(rows))


def lie_bracket(X: VectorField, Y: VectorField, atoms: Sequence[AtomDef] = ()) -> VectorField:
    """Commutator ``[X, Y]`` computed component-wise as ``X(Y^k) - Y(X^k)``."""
    if X.m != Y.m:
        raise ValueError("vector fields live on different spaces")
    xi = X.apply_to(Y.xi, atoms) - Y.apply_to(X.xi, atoms)
    phis = tuple(
        X.apply_to(Y.phis[i], atoms) - Y.apply_to(X.phis[i], atoms) for i in range(X.m)
    )
    return VectorField(xi, phis)


# ---------------------------------------------------------------------------
# Exact linear algebra for span and closure questions.  Vector fields are
# flattened on the monomial basis of their polynomial components; scalars live
# in the rational-function field of the symbolic parameters, so an algebra
# like {dx, du, u dx - x du + alpha(x dx + u du)} closes with
# parameter-dependent structure coefficients.

_KIND_PARAM = 3


def _split_term(mono) -> tuple:
    func = tuple((k, e) for k, e in mono if k[0] != _KIND_PARAM)
    par = tuple((k, e) for k, e in mono if k[0] == _KIND_PARAM)
    return func, par


def _field_vector(X: VectorField, basis: dict) -> list[RatExpr]:
    vec = [ZERO] * len(basis)
    acc: dict[int, dict] = {}
    for ci, comp in enumerate(X.components()):
        p = comp.as_poly()
        for m, c in p.terms.items():
            func, par = _split_term(m)
            col = basis[(ci, func)]
            acc.setdefault(col, {})
            acc[col][par] = acc[col].get(par, 0) + c
    for col, terms in acc.items():
        vec[col] = RatExpr.from_poly(Poly(terms))
    return vec


def _component_basis(fields: Iterable[VectorField]) -> dict:
    basis: dict = {}
    for X in fields:
        for ci, comp in enumerate(X.components()):
            if not comp.is_poly():
                raise ValueError(
                    "closure and span checks need polynomial generator components"
                )
            for m in comp.as_poly().terms:
                func, _ = _split_term(m)
                basis.setdefault((ci, func), len(basis))
    return basis


def _rref(rows: list[list[RatExpr]]) -> tuple[list, list, list[int]]:
    """Reduced row echelon form with a transform: returns (R, E, pivots) with
    R = E @ rows; exact over the parameter function field."""
    k = len(rows)
    n = len(rows[0]) if rows else 0
    R = [list(r) for r in rows]
    E = [[ONE if i == j else ZERO for j in range(k)] for i in range(k)]
    pivots: list[int] = []
    pr = 0
    for col in range(n):
        sel = None
        for r in range(pr, k):
            if not R[r][col].is_zero():
                sel = r
                break
        if sel is None:
            continue
        R[pr], R[sel] = R[sel], R[pr]
        E[pr], E[sel] = E[sel], E[pr]
        inv = ONE / R[pr][col]
        R[pr] = [v * inv for v in R[pr]]
        E[pr] = [v * inv for v in E[pr]]
        for r in range(k):
            if r != pr and not R[r][col].is_zero():
                f = R[r][col]
                R[r] = [a - f * b for a, b in zip(R[r], R[pr])]
                E[r] = [a - f * b for a, b in zip(E[r], E[pr])]
        pivots.append(col)
        pr += 1
        if pr == k:
            break
    return R, E, pivots


class SpanSolver:
    """Decides membership of a vector field in the span of a generator list
    (coefficients in the parameter function field) and returns exact
    coordinates."""

    def __init__(self, gens: Sequence[VectorField]):
        self.gens = list(gens)
        self.basis = _component_basis(self.gens)
        rows = [_field_vector(X, self.basis) for X in self.gens]
        self.R, self.E, self.pivots = _rref(rows)
        self.rank = len(self.pivots)

    def independent(self) -> bool:
        return self.rank == len(self.gens)

    def coordinates(self, X: VectorField) -> Optional[list[RatExpr]]:
        """Coefficients ``c`` with ``X = sum c_a gens[a]``, or None."""
        try:
            for ci, comp in enumerate(X.components()):
                for m in comp.as_poly().terms:
                    func, _ = _split_term(m)
                    if (ci, func) not in self.basis:
                        return None
        except ValueError:
            return None
        w = _field_vector(X, self.basis)
        y = [ZERO] * len(self.gens)
        for r, col in enumerate(self.pivots):
            y[r] = w[col]
        # consistency: y @ R must reproduce w
        for col in range(len(w)):
            s = ZERO
            for r in range(self.rank):
                if not y[r].is_zero() and not self.R[r][col].is_zero():
                    s = s + y[r] * self.R[r][col]
            if s != w[col]:
                return None
        c = [ZERO] * len(self.gens)
        for j in range(len(self.gens)):
            s = ZERO
            for r in range(self.rank):
                if not y[r].is_zero() and not self.E[r][j].is_zero():
                    s = s + y[r] * self.E[r][j]
            c[j] = s
        return c

    def contains(self, X: VectorField) -> bool:
        return self.coordinates(X) is not None


@dataclass(frozen=True)
class StructureReport:
    """Outcome of a Lie-closure check on a generator list."""

    closed: bool
    constants: Optional[tuple] = None  # constants[a][b][k] with [X_a,X_b] = sum_k c_k X_k
    witness: Optional[tuple] = None    # (a, b, VectorField) for the offending bracket

    def constant(self, a: int, b: int, k: int) -> RatExpr:
        return self.constants[a][b][k]

    def rational_constants(self) -> Optional[tuple]:
        """Structure constants as plain rationals, or None when any of them
        depends on a symbolic parameter."""
        if not self.closed:
            return None
        out = []
        for plane in self.constants:
            rows = []
            for row in plane:
                vals = []
                for c in row:
                    if not c.is_const():
                        return None
                    vals.append(c.const_value())
                rows.append(tuple(vals))
            out.append(tuple(rows))
        return tuple(out)


def closure_check(gens: Sequence[VectorField], atoms: Sequence[AtomDef] = ()) -> StructureReport:
    """Verify that pairwise brackets stay in the span of the generators and
    extract the structure constants."""
    gens = list(gens)
    solver = SpanSolver(gens)
    if not solver.independent():
        raise DependentGeneratorsError("generators are linearly dependent over Q")
    k = len(gens)
    constants = [[[ZERO] * k for _ in range(k)] for _ in range(k)]
    for a in range(k):
        for b in range(a + 1, k):
            W = lie_bracket(gens[a], gens[b], atoms)
            coords = solver.coordinates(W)
            if coords is None:
                return StructureReport(False, None, (a, b, W))
            for idx, c in enumerate(coords):
                constants[a][b][idx] = c
                constants[b][a][idx] = -c
    frozen = tuple(tuple(tuple(row) for row in plane) for plane in constants)
    return StructureReport(True, frozen, None)
