"""Normal-form ODE systems, the direct symmetry (tangency) check, and first
integrals of scalar ODEs built from determinants of symmetry components.

A point vector field ``X`` is a symmetry of the system ``u^i_r = f^i`` when
``X^(r)(u^i_r - f^i)`` vanishes identically after the top derivatives are
replaced by the right-hand sides.  For a scalar equation of order ``n`` with
symmetries ``X_1..X_n`` and ``Y_1..Y_n``, the ratio of the two
``(n+1) x (n+1)`` determinants whose rows are the components of the flow
field of the equation followed by the ``(n-1)``-prolonged symmetries is a
first integral; with exactly ``n`` distinct symmetries the ratio degenerates
to a constant, so nontrivial integrals need at least ``n + 1``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

from .exprcore import (
    AtomDef,
    RatExpr,
    VarId,
    apply_derivation,
    canonical_string,
    substitute,
)
from .jetspace import JetContext, VectorField, prolong
from .linalg import det_rational


class NotNormalFormError(ValueError):
    pass


class NotASymmetryError(ValueError):
    pass


class DegenerateDenominatorError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class NormalFormODE:
    """System ``u^i_r = f^i(x, lower jets)`` for ``i = 1..m``."""

    order: int
    rhs: tuple[RatExpr, ...]
    atoms: tuple[AtomDef, ...] = ()

    def __post_init__(self):
        if self.order < 1 or not self.rhs:
            raise NotNormalFormError("need order >= 1 and at least one equation")
        for i, f in enumerate(self.rhs, start=1):
            if f.max_jet_order(self.atoms) > self.order - 1:
                raise NotNormalFormError(
                    f"right-hand side #{i} involves derivatives of order >= {self.order}"
                )

    @property
    def m(self) -> int:
        return len(self.rhs)

    def top_bindings(self) -> dict[VarId, RatExpr]:
        return {VarId.jet(i, self.order): self.rhs[i - 1] for i in range(1, self.m + 1)}

    def describe(self) -> str:
        eqs = [
            f"u{i}_{self.order} = {canonical_string(f)}"
            for i, f in enumerate(self.rhs, start=1)
        ]
        return "; ".join(eqs)


def merge_atoms(a: Sequence[AtomDef], b: Sequence[AtomDef]) -> tuple[AtomDef, ...]:
    by_index: dict[int, AtomDef] = {}
    for atom in (*a, *b):
        prev = by_index.get(atom.index)
        if prev is not None and prev != atom:
            raise ValueError(f"conflicting atom definitions at index {atom.index}")
        by_index[atom.index] = atom
    return tuple(by_index[i] for i in sorted(by_index))


def check_point_symmetry(
    ode: NormalFormODE, X: VectorField, atoms: Optional[Sequence[AtomDef]] = None
) -> bool:
    """Exact tangency test of a point vector field to a normal-form system."""
    active = merge_atoms(ode.atoms, atoms or ())
    r = ode.order
    if X.m != ode.m:
        raise NotNormalFormError("vector field and system disagree on the dependents")
    ctx = JetContext(ode.m, r, active)
    pf = prolong(X, r, ctx)
    bindings = ode.top_bindings()
    for i in range(1, ode.m + 1):
        residual = pf.coefficient(i, r) - pf.apply_to(ode.rhs[i - 1], active)
        if not substitute(residual, bindings, active).is_zero():
            return False
    return True


def tangency_residuals(
    ode: NormalFormODE, X: VectorField, atoms: Optional[Sequence[AtomDef]] = None
) -> tuple[RatExpr, ...]:
    """The per-equation residuals of the tangency test (zero iff symmetry)."""
    active = merge_atoms(ode.atoms, atoms or ())
    ctx = JetContext(ode.m, ode.order, active)
    pf = prolong(X, ode.order, ctx)
    bindings = ode.top_bindings()
    out = []
    for i in range(1, ode.m + 1):
        residual = pf.coefficient(i, ode.order) - pf.apply_to(ode.rhs[i - 1], active)
        out.append(substitute(residual, bindings, active))
    return tuple(out)


@dataclass(frozen=True)
class FlowField:
    """The vector field on the order ``r-1`` jet space whose integral curves
    are prolonged solutions: x-component 1, each ``u^i_k`` moves by
    ``u^i_{k+1}``, and the top layer moves by the right-hand sides."""

    ode: NormalFormODE

    def coefficients(self) -> dict[VarId, RatExpr]:
        n = self.ode.order
        coeffs = {VarId.x(): RatExpr.const(1)}
        for i in range(1, self.ode.m + 1):
            for k in range(n - 1):
                coeffs[VarId.jet(i, k)] = RatExpr.var(VarId.jet(i, k + 1))
            coeffs[VarId.jet(i, n - 1)] = self.ode.rhs[i - 1]
        return coeffs

    def components(self) -> list[RatExpr]:
        """Components in the coordinate order x, u^1..u^m, u^1_1, ..."""
        coeffs = self.coefficients()
        out = [coeffs[VarId.x()]]
        for k in range(self.ode.order):
            for i in range(1, self.ode.m + 1):
                out.append(coeffs[VarId.jet(i, k)])
        return out

    def apply_to(self, e: RatExpr) -> RatExpr:
        return apply_derivation(self.coefficients(), e, self.ode.atoms)


def flow_field(ode: NormalFormODE) -> FlowField:
    return FlowField(ode)


def _distinct_fields(fields: Sequence[VectorField]) -> int:
    seen = []
    for X in fields:
        if not any(X == Y for Y in seen):
            seen.append(X)
    return len(seen)


def first_integral(
    ode: NormalFormODE,
    num_rows: Sequence[VectorField],
    den_rows: Sequence[VectorField],
    atoms: Optional[Sequence[AtomDef]] = None,
) -> RatExpr:
    """First integral of a scalar order-``n`` equation as the ratio of two
    symmetry determinants.

    Each determinant has ``n + 1`` rows: the flow-field components first,
    then the components of the ``(n-1)``-prolongations of the listed
    symmetries.  All listed fields must pass the tangency test.
    """
    if ode.m != 1:
        raise NotNormalFormError("first integrals are implemented for scalar equations")
    n = ode.order
    if len(num_rows) != n or len(den_rows) != n:
        raise ValueError(f"need exactly {n} symmetry rows per determinant")
    active = merge_atoms(ode.atoms, atoms or ())
    for X in (*num_rows, *den_rows):
        if not check_point_symmetry(ode, X, active):
            raise NotASymmetryError(f"field {X} is not a symmetry of the system")
    if _distinct_fields((*num_rows, *den_rows)) < n + 1:
        warnings.warn(
            "fewer than order+1 distinct symmetries: the integral is a constant",
            stacklevel=2,
        )
    ctx = JetContext(1, n, active)
    z_row = flow_field(ode).components()

    def matrix(fields: Sequence[VectorField]) -> list[list[RatExpr]]:
        rows = [z_row]
        for X in fields:
            rows.append(prolong(X, n - 1, ctx).components())
        return rows

    den = det_rational(matrix(den_rows))
    if den.is_zero():
        raise DegenerateDenominatorError("denominator determinant vanishes identically")
    num = det_rational(matrix(num_rows))
    return num / den


def verify_first_integral(ode: NormalFormODE, integral: RatExpr) -> bool:
    """Whether the flow field annihilates the expression exactly."""
    if integral.max_jet_order(ode.atoms) > ode.order - 1:
        raise ValueError("first integrals live on the order r-1 jet space")
    return flow_field(ode).apply_to(integral).is_zero()
