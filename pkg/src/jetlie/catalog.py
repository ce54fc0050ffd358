"""Built-in generator tables: the eight primitive Lie algebras of vector
fields on the plane and the isometry / affine / conformal / projective
algebras of the space of one independent plus ``m`` dependent variables.

Every catalog algebra is constructed with exact rational (or symbolic
parameter) coefficients and validated: the stated dimension must match the
generator count and the generators must close under the Lie bracket.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

from .exprcore import AtomDef, RatExpr, VarId
from .jetspace import SpanSolver, StructureReport, VectorField, closure_check

MAX_SPACE_DEPENDENTS = 4

PRIMITIVE_IDS = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII")
PRIMITIVE_DIMS = dict(zip(PRIMITIVE_IDS, (3, 3, 3, 4, 5, 6, 6, 8)))
PRIMITIVE_STRUCTURE = {
    "I": "R x| R^2",
    "II": "sl(2)",
    "III": "so(3)",
    "IV": "R^2 x| R^2",
    "V": "sa(2)",
    "VI": "a(2)",
    "VII": "so(3,1)",
    "VIII": "sl(3)",
}

SPACE_KINDS = ("isometry", "affine", "conformal", "projective")


class UnknownAlgebraIdError(ValueError):
    pass


class UnsupportedDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class AlgebraSpec:
    """A named, parameterized basis of point vector fields."""

    name: str
    generators: tuple[VectorField, ...]
    expected_dim: int
    params: tuple[tuple[str, RatExpr], ...] = ()
    atoms: tuple[AtomDef, ...] = ()
    structure: str = ""

    def __post_init__(self):
        if len(self.generators) != self.expected_dim:
            raise ValueError(
                f"{self.name}: {len(self.generators)} generators, expected {self.expected_dim}"
            )

    @property
    def dim(self) -> int:
        return len(self.generators)

    @property
    def m(self) -> int:
        return self.generators[0].m

    def closure(self) -> StructureReport:
        return closure_check(self.generators, self.atoms)

    def spans(self, other: "AlgebraSpec") -> bool:
        """Exact span inclusion: every generator of ``other`` lies in the
        span of this algebra's generators."""
        solver = SpanSolver(self.generators)
        return all(solver.contains(X) for X in other.generators)


def _check_closed(spec: AlgebraSpec) -> AlgebraSpec:
    report = spec.closure()
    if not report.closed:
        a, b, W = report.witness
        raise ValueError(f"catalog algebra {spec.name} does not close at bracket ({a},{b}): {W}")
    return spec


# -- plane primitives ---------------------------------------------------------


def _plane_field(xi, phi) -> VectorField:
    return VectorField(xi, (phi,))


def primitive_algebra(ident: str, alpha: Union[None, int, Fraction, RatExpr] = None) -> AlgebraSpec:
    """One of the eight primitive algebras of the plane, by Roman numeral.

    ``alpha`` is accepted only for algebra I; omitted, it stays a symbolic
    parameter so that one computation covers the whole family.
    """
    ident = str(ident).upper()
    if ident not in PRIMITIVE_IDS:
        raise UnknownAlgebraIdError(f"unknown primitive algebra {ident!r} (use I..VIII)")
    if alpha is not None and ident != "I":
        raise ValueError("alpha is a parameter of algebra I only")
    if ident == "I":
        if alpha is None:
            a = RatExpr.var(VarId.param("alpha"))
            params = (("alpha", a),)
        else:
            a = alpha if isinstance(alpha, RatExpr) else RatExpr.const(Fraction(alpha))
            params = (("alpha", a),)
        return _check_closed(_algebra_I(a, params))
    return _primitive_fixed(ident)


def _algebra_I(a: RatExpr, params) -> AlgebraSpec:
    x = RatExpr.var(VarId.x())
    u = RatExpr.var(VarId.jet(1, 0))
    one = RatExpr.const(1)
    zero = RatExpr.const(0)
    gens = (
        _plane_field(one, zero),
        _plane_field(zero, one),
        _plane_field(u + a * x, -x + a * u),
    )
    return AlgebraSpec("I", gens, 3, params=params, structure=PRIMITIVE_STRUCTURE["I"])


@lru_cache(maxsize=None)
def _primitive_fixed(ident: str) -> AlgebraSpec:
    x = RatExpr.var(VarId.x())
    u = RatExpr.var(VarId.jet(1, 0))
    one = RatExpr.const(1)
    zero = RatExpr.const(0)
    f = _plane_field
    if ident == "II":
        gens = (
            f(one, zero),
            f(x, u),
            f(x * x - u * u, (x * u).scale(2)),
        )
    elif ident == "III":
        gens = (
            f(u, -x),
            f(one + x * x - u * u, (x * u).scale(2)),
            f((x * u).scale(2), one - x * x + u * u),
        )
    elif ident == "IV":
        gens = (f(one, zero), f(zero, one), f(x, u), f(u, -x))
    elif ident == "V":
        gens = (f(one, zero), f(zero, one), f(x, -u), f(u, zero), f(zero, x))
    elif ident == "VI":
        gens = (f(one, zero), f(zero, one), f(x, zero), f(zero, u), f(u, zero), f(zero, x))
    elif ident == "VII":
        gens = (
            f(one, zero),
            f(zero, one),
            f(u, -x),
            f(x, u),
            f(x * x - u * u, (x * u).scale(2)),
            f((x * u).scale(2), u * u - x * x),
        )
    else:  # VIII
        gens = (
            f(one, zero),
            f(zero, one),
            f(x, zero),
            f(zero, u),
            f(u, zero),
            f(zero, x),
            f(x * x, x * u),
            f(x * u, u * u),
        )
    spec = AlgebraSpec(ident, gens, PRIMITIVE_DIMS[ident], structure=PRIMITIVE_STRUCTURE[ident])
    return _check_closed(spec)


# -- space algebras on 1 + m variables ---------------------------------------


def space_dim(kind: str, m: int) -> int:
    if kind == "isometry":
        return (m + 1) + m * (m + 1) // 2
    if kind == "affine":
        return (m + 1) * (m + 2)
    if kind == "conformal":
        return (m + 2) * (m + 3) // 2
    if kind == "projective":
        return (m + 1) * (m + 3)
    raise UnknownAlgebraIdError(f"unknown space algebra kind {kind!r}")


def _space_coords(m: int) -> list[RatExpr]:
    """Coordinates y^0 = x, y^i = u^i."""
    out = [RatExpr.var(VarId.x())]
    out += [RatExpr.var(VarId.jet(i, 0)) for i in range(1, m + 1)]
    return out


def _space_field(m: int, comps: Sequence[RatExpr]) -> VectorField:
    return VectorField(comps[0], tuple(comps[1:]))


def _translations(m: int) -> list[VectorField]:
    zero = RatExpr.const(0)
    one = RatExpr.const(1)
    out = []
    for a in range(m + 1):
        comps = [zero] * (m + 1)
        comps[a] = one
        out.append(_space_field(m, comps))
    return out


def _rotations(m: int) -> list[VectorField]:
    """-u^i dx + x du^i, then u^i du^j - u^j du^i for i < j."""
    y = _space_coords(m)
    zero = RatExpr.const(0)
    out = []
    for i in range(1, m + 1):
        comps = [zero] * (m + 1)
        comps[0] = -y[i]
        comps[i] = y[0]
        out.append(_space_field(m, comps))
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            comps = [zero] * (m + 1)
            comps[j] = y[i]
            comps[i] = -y[j]
            out.append(_space_field(m, comps))
    return out


def _linear_fields(m: int) -> list[VectorField]:
    """a d/db for all coordinates a, b (includes the diagonal stretchings)."""
    y = _space_coords(m)
    zero = RatExpr.const(0)
    out = []
    for a in range(m + 1):
        for b in range(m + 1):
            comps = [zero] * (m + 1)
            comps[b] = y[a]
            out.append(_space_field(m, comps))
    return out


@lru_cache(maxsize=None)
def space_algebra(kind: str, m: int) -> AlgebraSpec:
    """Isometry, affine, conformal or projective algebra acting on one
    independent and ``m`` dependent variables."""
    if kind not in SPACE_KINDS:
        raise UnknownAlgebraIdError(f"unknown space algebra kind {kind!r}")
    if m < 1:
        raise UnsupportedDimensionError("need at least one dependent variable")
    if m > MAX_SPACE_DEPENDENTS:
        raise UnsupportedDimensionError(
            f"m={m} exceeds the configured bound {MAX_SPACE_DEPENDENTS}"
        )
    y = _space_coords(m)
    zero = RatExpr.const(0)
    gens: list[VectorField] = []
    if kind == "isometry":
        gens = _translations(m) + _rotations(m)
    elif kind == "affine":
        gens = _translations(m) + _linear_fields(m)
    elif kind == "projective":
        dil = [y[a] for a in range(m + 1)]
        gens = _translations(m) + _linear_fields(m)
        for a in range(m + 1):
            gens.append(_space_field(m, [y[a] * d for d in dil]))
    else:  # conformal
        gens = _translations(m) + _rotations(m)
        gens.append(_space_field(m, list(y)))  # dilation
        norm2 = zero
        for a in range(m + 1):
            norm2 = norm2 + y[a] * y[a]
        for j in range(m + 1):
            comps = []
            for i in range(m + 1):
                if i == j:
                    comps.append((y[j] * y[j]).scale(2) - norm2)
                else:
                    comps.append((y[j] * y[i]).scale(2))
            gens.append(_space_field(m, comps))
    spec = AlgebraSpec(f"{kind}(R^{1 + m})", tuple(gens), space_dim(kind, m))
    return _check_closed(spec)


def resolve_algebra(name: str, m: Optional[int] = None,
                    alpha: Union[None, int, Fraction, RatExpr] = None) -> AlgebraSpec:
    """Look up a catalog algebra by primitive numeral or space-algebra kind."""
    if name.upper() in PRIMITIVE_IDS:
        return primitive_algebra(name, alpha)
    if name in SPACE_KINDS:
        if m is None:
            raise ValueError(f"space algebra {name!r} needs the number of dependents m")
        return space_algebra(name, m)
    raise UnknownAlgebraIdError(f"unknown algebra {name!r}")
