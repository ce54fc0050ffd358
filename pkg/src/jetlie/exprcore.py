"""Exact arithmetic kernel: rationals, sparse multivariate polynomials and
normalized rational expressions over jet coordinates.

Everything is exact.  Coefficients are Python ints where possible and
``fractions.Fraction`` otherwise; the two interoperate transparently, so the
hot paths (polynomial products) run on plain integer arithmetic.

Variables are identified by :class:`VarId`, which covers the independent
variable ``x``, jet coordinates ``u^i_k`` (``k``-th derivative of the ``i``-th
dependent variable), *differential atoms* and named symbolic parameters.
A differential atom is a formal symbol standing for a transcendental function
(``exp``, ``arctan``, ...) whose derivatives are prescribed by rewrite rules;
see :class:`AtomDef`.  An atom may additionally carry an algebraic relation
(e.g. ``s^2 = 1 + u1_1^2`` for a square root), applied as a power-reduction
rewrite during normalization.

The term order is graded lexicographic over the fixed variable order
``x < u1 < u1_1 < ... < u2 < ... < atoms < parameters``; canonical strings
list terms in ascending order, which makes rendering deterministic and
bit-exact.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd as int_gcd
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

Coeff = Union[int, Fraction]
Rational = Union[int, Fraction]

_KIND_INDEP = 0
_KIND_JET = 1
_KIND_ATOM = 2
_KIND_PARAM = 3

# A variable key is a plain tuple so monomials hash and compare fast:
# (kind, i, k, name).
VarKey = tuple


class NotDivisibleError(ArithmeticError):
    """Raised when an exact polynomial quotient does not exist."""


class DenominatorVanishesError(ZeroDivisionError):
    """Raised when substitution sends a denominator to zero."""


@dataclass(frozen=True, order=True)
class VarId:
    """Identity of a variable; totally ordered by its key tuple."""

    key: VarKey

    @staticmethod
    def x() -> "VarId":
        return VarId((_KIND_INDEP, 0, 0, ""))

    @staticmethod
    def jet(i: int, k: int) -> "VarId":
        if i < 1 or k < 0:
            raise ValueError(f"invalid jet variable u{i}_{k}")
        return VarId((_KIND_JET, i, k, ""))

    @staticmethod
    def atom(index: int, name: str) -> "VarId":
        return VarId((_KIND_ATOM, index, 0, name))

    @staticmethod
    def param(name: str) -> "VarId":
        return VarId((_KIND_PARAM, 0, 0, name))

    @property
    def kind(self) -> int:
        return self.key[0]

    @property
    def dep_index(self) -> int:
        return self.key[1]

    @property
    def jet_order(self) -> int:
        return self.key[2]

    @property
    def name(self) -> str:
        return _var_name(self.key)

    def is_jet(self) -> bool:
        return self.key[0] == _KIND_JET

    def __repr__(self) -> str:
        return f"VarId({self.name})"


def _var_name(key: VarKey) -> str:
    kind, i, k, name = key
    if kind == _KIND_INDEP:
        return "x"
    if kind == _KIND_JET:
        return f"u{i}" if k == 0 else f"u{i}_{k}"
    return name


# ---------------------------------------------------------------------------
# Monomials.
#
# A monomial is a tuple of (VarKey, exponent) pairs, sorted by key, with all
# exponents positive.  The empty tuple is the constant monomial.

Monomial = tuple

_ONE_MONO: Monomial = ()


def mono_from_pairs(pairs: Iterable[tuple[VarKey, int]]) -> Monomial:
    items = [(k, e) for k, e in pairs if e != 0]
    for _, e in items:
        if e < 0:
            raise ValueError("negative exponent in monomial")
    items.sort()
    return tuple(items)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    ia = ib = 0
    na, nb = len(a), len(b)
    while ia < na and ib < nb:
        ka, ea = a[ia]
        kb, eb = b[ib]
        if ka == kb:
            out.append((ka, ea + eb))
            ia += 1
            ib += 1
        elif ka < kb:
            out.append(a[ia])
            ia += 1
        else:
            out.append(b[ib])
            ib += 1
    out.extend(a[ia:])
    out.extend(b[ib:])
    return tuple(out)


def mono_divides(a: Monomial, b: Monomial) -> bool:
    """Whether monomial ``a`` divides ``b``."""
    db = dict(b)
    for k, e in a:
        if db.get(k, 0) < e:
            return False
    return True


def mono_div(b: Monomial, a: Monomial) -> Monomial:
    """Quotient ``b / a``; assumes divisibility."""
    da = dict(a)
    out = []
    for k, e in b:
        r = e - da.get(k, 0)
        if r > 0:
            out.append((k, r))
        elif r < 0:
            raise NotDivisibleError("monomial quotient has negative exponent")
    return tuple(out)


def mono_gcd(a: Monomial, b: Monomial) -> Monomial:
    db = dict(b)
    out = []
    for k, e in a:
        eb = db.get(k, 0)
        if eb:
            out.append((k, min(e, eb)))
    return tuple(out)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_sort_key(m: Monomial):
    """Sort key under which the graded-lex *largest* monomial is minimal.

    Graded lex: higher total degree wins; ties go to the monomial with the
    larger exponent at the smallest variable where they differ.  Within equal
    degree no support can be a prefix of another, so comparing
    ``(key, -exp)`` pair sequences is a faithful encoding.
    """
    return (-mono_degree(m), tuple((k, -e) for k, e in m))


# ---------------------------------------------------------------------------
# Polynomials.


def _coeff(c: Rational) -> Coeff:
    if isinstance(c, Fraction):
        return int(c) if c.denominator == 1 else c
    return c


def _coeff_div(a: Coeff, b: Coeff) -> Coeff:
    return _coeff(Fraction(a) / Fraction(b))


class Poly:
    """Sparse multivariate polynomial with exact rational coefficients.

    Immutable by convention: no method mutates ``self``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Monomial, Rational]] = None):
        t = {}
        if terms:
            for m, c in terms.items():
                c = _coeff(c)
                if c:
                    t[m] = c
        self.terms = t

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "Poly":
        return Poly()

    @staticmethod
    def const(c: Rational) -> "Poly":
        c = _coeff(Fraction(c) if not isinstance(c, (int, Fraction)) else c)
        return Poly({_ONE_MONO: c}) if c else Poly()

    @staticmethod
    def var(v: VarId, exp: int = 1) -> "Poly":
        if exp < 0:
            raise ValueError("negative power")
        if exp == 0:
            return Poly.const(1)
        return Poly({((v.key, exp),): 1})

    # -- predicates and inspection ------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _ONE_MONO in self.terms)

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError("polynomial is not constant")
        return Fraction(self.terms.get(_ONE_MONO, 0))

    def variables(self) -> set[VarKey]:
        out: set[VarKey] = set()
        for m in self.terms:
            for k, _ in m:
                out.add(k)
        return out

    def var_ids(self) -> set[VarId]:
        return {VarId(k) for k in self.variables()}

    def total_degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def degree_in(self, v: VarId) -> int:
        key = v.key
        best = 0
        for m in self.terms:
            for k, e in m:
                if k == key and e > best:
                    best = e
        return best

    def depends_on(self, v: VarId) -> bool:
        key = v.key
        return any(k == key for m in self.terms for k, _ in m)

    def max_jet_order(self, atoms: Sequence["AtomDef"] = ()) -> int:
        """Highest derivative order appearing; atoms count with the order of
        the jet variables their rules involve."""
        atom_order = {a.var_id().key: a.max_jet_order() for a in atoms}
        best = 0
        for m in self.terms:
            for k, _ in m:
                if k[0] == _KIND_JET:
                    best = max(best, k[2])
                elif k[0] == _KIND_ATOM:
                    best = max(best, atom_order.get(k, 0))
        return best

    def leading(self) -> tuple[Monomial, Coeff]:
        """Leading term under graded lex."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        m = min(self.terms, key=mono_sort_key)
        return m, self.terms[m]

    def sorted_terms(self, ascending: bool = True) -> list[tuple[Monomial, Coeff]]:
        ms = sorted(self.terms, key=mono_sort_key, reverse=ascending)
        return [(m, self.terms[m]) for m in ms]

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        t = dict(self.terms)
        for m, c in other.terms.items():
            nc = t.get(m, 0) + c
            if nc:
                t[m] = nc
            elif m in t:
                del t[m]
        p = Poly.__new__(Poly)
        p.terms = t
        return p

    def __neg__(self) -> "Poly":
        p = Poly.__new__(Poly)
        p.terms = {m: -c for m, c in self.terms.items()}
        return p

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.terms or not other.terms:
            return Poly()
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        t: dict = {}
        get = t.get
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = mono_mul(ma, mb)
                nc = get(m, 0) + ca * cb
                if nc:
                    t[m] = nc
                elif m in t:
                    del t[m]
        p = Poly.__new__(Poly)
        p.terms = t
        return p

    def scale(self, c: Rational) -> "Poly":
        c = _coeff(c if isinstance(c, (int, Fraction)) else Fraction(c))
        if not c:
            return Poly()
        if c == 1:
            return self
        p = Poly.__new__(Poly)
        p.terms = {m: _coeff(v * c) for m, v in self.terms.items()}
        return p

    def mul_mono(self, mono: Monomial, c: Rational = 1) -> "Poly":
        c = _coeff(c)
        if not c:
            return Poly()
        p = Poly.__new__(Poly)
        p.terms = {mono_mul(m, mono): _coeff(v * c) for m, v in self.terms.items()}
        return p

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset((m, Fraction(c)) for m, c in self.terms.items()))

    def __repr__(self) -> str:
        return f"Poly({poly_string(self)})"

    # -- calculus and evaluation ---------------------------------------------

    def diff_formal(self, v: VarId) -> "Poly":
        """Formal partial derivative, atoms treated as independent symbols."""
        key = v.key
        t: dict = {}
        for m, c in self.terms.items():
            for idx, (k, e) in enumerate(m):
                if k == key:
                    nm = m[:idx] + ((k, e - 1),) + m[idx + 1:] if e > 1 else m[:idx] + m[idx + 1:]
                    nc = t.get(nm, 0) + c * e
                    if nc:
                        t[nm] = nc
                    elif nm in t:
                        del t[nm]
                    break
        return Poly(t)

    def eval_at(self, point: Mapping[VarKey, Rational]) -> Fraction:
        """Exact full evaluation; every variable must be assigned."""
        total = Fraction(0)
        for m, c in self.terms.items():
            v = Fraction(c)
            for k, e in m:
                if k not in point:
                    raise KeyError(f"no value for variable {_var_name(k)}")
                v *= Fraction(point[k]) ** e
            total += v
        return total

    # -- normal forms ----------------------------------------------------------

    def content(self) -> Fraction:
        """Positive rational content: gcd of numerators over lcm of denominators."""
        if not self.terms:
            return Fraction(0)
        ng = 0
        dl = 1
        for c in self.terms.values():
            f = Fraction(c)
            ng = int_gcd(ng, abs(f.numerator))
            dl = dl * f.denominator // int_gcd(dl, f.denominator)
        return Fraction(ng, dl)

    def primitive(self) -> "Poly":
        """Integer-primitive multiple with positive leading coefficient."""
        if not self.terms:
            return self
        c = self.content()
        if self.leading()[1] < 0:
            c = -c
        return self.scale(1 / c)


def poly_add(*ps: Poly) -> Poly:
    out = Poly()
    for p in ps:
        out = out + p
    return out


# ---------------------------------------------------------------------------
# Exact division and gcd.


def exact_divide(a: Poly, b: Poly) -> Poly:
    """Exact polynomial quotient ``q`` with ``a = q*b``.

    Raises :class:`NotDivisibleError` if no such quotient exists and
    ``ZeroDivisionError`` if ``b`` is zero.
    """
    if b.is_zero():
        raise ZeroDivisionError("division of polynomial by zero")
    if a.is_zero():
        return Poly()
    bm, bc = b.leading()
    rest_b = [(m, c) for m, c in b.terms.items() if m != bm]
    q: dict = {}
    rest = dict(a.terms)
    heap = [(mono_sort_key(m), m) for m in rest]
    heapq.heapify(heap)
    while heap:
        _, m = heapq.heappop(heap)
        c = rest.pop(m, 0)
        if not c:
            continue
        if not mono_divides(bm, m):
            raise NotDivisibleError("leading term not divisible")
        qm = mono_div(m, bm)
        qc = _coeff_div(c, bc)
        q[qm] = qc
        for m2, c2 in rest_b:
            mm = mono_mul(qm, m2)
            if mm in rest:
                nv = rest[mm] - qc * c2
                if nv:
                    rest[mm] = nv
                else:
                    del rest[mm]
            else:
                rest[mm] = _coeff(-qc * c2)
                heapq.heappush(heap, (mono_sort_key(mm), mm))
    return Poly(q)


def try_exact_divide(a: Poly, b: Poly) -> Optional[Poly]:
    try:
        return exact_divide(a, b)
    except NotDivisibleError:
        return None


def _mono_content(p: Poly) -> Monomial:
    it = iter(p.terms)
    g = next(it)
    for m in it:
        if not g:
            break
        g = mono_gcd(g, m)
    return g


def _coeffs_wrt(p: Poly, key: VarKey) -> dict[int, Poly]:
    """View ``p`` as a polynomial in one variable; returns degree -> coefficient."""
    out: dict[int, dict] = {}
    for m, c in p.terms.items():
        e = 0
        rest = m
        for idx, (k, ee) in enumerate(m):
            if k == key:
                e = ee
                rest = m[:idx] + m[idx + 1:]
                break
        out.setdefault(e, {})[rest] = c
    return {e: Poly(t) for e, t in out.items()}


def _from_coeffs_wrt(coeffs: Mapping[int, Poly], key: VarKey) -> Poly:
    t: dict = {}
    for e, p in coeffs.items():
        for m, c in p.terms.items():
            mm = mono_mul(m, ((key, e),)) if e else m
            t[mm] = t.get(mm, 0) + c
    return Poly(t)


def _prem(f: Poly, g: Poly, key: VarKey) -> Poly:
    """Strict pseudo-remainder: the ``r`` with ``lc(g)^(deg f - deg g + 1) f
    = q g + r`` and ``deg_v(r) < deg_v(g)``.  The exact scaling power matters:
    the subresultant divisor sequence divides it back out."""
    cg = _coeffs_wrt(g, key)
    dg = max(cg)
    lg = cg[dg]
    df = f.degree_in(VarId(key))
    e = df - dg + 1
    r = f
    while True:
        if r.is_zero():
            break
        cr = _coeffs_wrt(r, key)
        dr = max(cr)
        if dr < dg:
            break
        lr = cr[dr]
        shift = ((key, dr - dg),) if dr > dg else _ONE_MONO
        r = r * lg - g.mul_mono(shift) * lr
        e -= 1
    if e > 0 and not r.is_zero():
        r = r * lg ** e
    return r


_SCREEN_RNG_SEED = 0x1E71
_SCREEN_PRIME = (1 << 61) - 1


def _gcd_degree_mod(fa: list[int], fb: list[int], p: int) -> int:
    """Degree of the gcd of two dense nonzero polynomials over GF(p)."""

    def trim(v: list[int]) -> list[int]:
        while v and not v[-1]:
            v.pop()
        return v

    fa, fb = trim(list(fa)), trim(list(fb))
    while fb:
        if len(fa) < len(fb):
            fa, fb = fb, fa
            continue
        inv = pow(fb[-1], -1, p)
        while fa and len(fa) >= len(fb):
            q = fa[-1] * inv % p
            off = len(fa) - len(fb)
            for i, c in enumerate(fb):
                fa[i + off] = (fa[i + off] - q * c) % p
            trim(fa)
        fa, fb = fb, fa
    return len(fa) - 1


def _image_mod(
    poly: Poly, key: VarKey, point: dict, p: int
) -> Optional[list[int]]:
    """Univariate image of ``poly`` in ``key`` with the other variables
    evaluated mod p; None when a coefficient denominator vanishes mod p."""
    deg = 0
    buckets: dict[int, int] = {}
    for m, c in poly.terms.items():
        if isinstance(c, Fraction):
            den = c.denominator % p
            if den == 0:
                return None
            v = c.numerator % p * pow(den, -1, p) % p
        else:
            v = c % p
        e = 0
        for k, ee in m:
            if k == key:
                e = ee
            else:
                v = v * pow(point[k], ee, p) % p
        buckets[e] = (buckets.get(e, 0) + v) % p
        if e > deg:
            deg = e
    out = [0] * (deg + 1)
    for e, v in buckets.items():
        out[e] = v
    return out


def _screen_variable_trivial(a: Poly, b: Poly, key: VarKey, rng: random.Random) -> bool:
    """True when modular evaluation proves gcd(a, b) has degree 0 in ``key``.

    Specializes every other variable at random points of GF(p) and takes the
    modular univariate gcd; sound because for primes not collapsing either
    leading coefficient the modular image of the gcd divides the gcd of the
    images, so a degree-0 image certifies a variable-free gcd.
    """
    p = _SCREEN_PRIME
    others = (a.variables() | b.variables()) - {key}
    da, db = a.degree_in(VarId(key)), b.degree_in(VarId(key))
    for _ in range(3):
        point = {k: rng.randrange(1, p) for k in others}
        ia = _image_mod(a, key, point, p)
        ib = _image_mod(b, key, point, p)
        if ia is None or ib is None:
            continue
        if len(ia) - 1 != da or len(ib) - 1 != db or not ia[-1] or not ib[-1]:
            continue  # leading coefficient collapsed; retry
        if _gcd_degree_mod(ia, ib, p) == 0:
            return True
        return False
    return False


def _poly_maxnorm(p: Poly) -> int:
    return max(abs(int(c)) for c in p.terms.values())


def _eval_var_int(p: Poly, key: VarKey, xi: int) -> Poly:
    """Exact substitution of one variable by a (large) integer."""
    out: dict = {}
    for m, c in p.terms.items():
        e = 0
        rest = []
        for k, ee in m:
            if k == key:
                e = ee
            else:
                rest.append((k, ee))
        v = c * xi ** e if e else c
        mm = tuple(rest)
        nv = out.get(mm, 0) + v
        if nv:
            out[mm] = nv
        elif mm in out:
            del out[mm]
    return Poly(out)


def _balanced_digit(p: Poly, xi: int) -> Poly:
    half = xi // 2
    t = {}
    for m, c in p.terms.items():
        d = (int(c) + half) % xi - half
        if d:
            t[m] = d
    return Poly(t)


def _heu_lift(f: Poly, g: Poly, keys: list, xi: int) -> Optional[Poly]:
    """Evaluation/reconstruction gcd candidate: evaluate the first variable
    at the big integer, recurse, then read the variable back off the
    balanced base-xi digits."""
    if not keys:
        fa = abs(int(f.const_value()))
        ga = abs(int(g.const_value()))
        return Poly.const(int_gcd(fa, ga))
    key = keys[0]
    fe = _eval_var_int(f, key, xi)
    ge = _eval_var_int(g, key, xi)
    if fe.is_zero() or ge.is_zero():
        return None
    sub = _heu_lift(fe, ge, keys[1:], xi)
    if sub is None:
        return None
    dmax = min(f.degree_in(VarId(key)), g.degree_in(VarId(key)))
    acc: dict = {}
    cur = sub
    power = 0
    while not cur.is_zero():
        if power > dmax:
            return None
        digit = _balanced_digit(cur, xi)
        for m, c in digit.terms.items():
            mm = mono_mul(m, ((key, power),)) if power else m
            acc[mm] = c
        diff = cur - digit
        t = {}
        for m, c in diff.terms.items():
            q, r = divmod(int(c), xi)
            if r:
                return None
            if q:
                t[m] = q
        cur = Poly(t)
        power += 1
    return Poly(acc)


def _gcd_heuristic(a: Poly, b: Poly) -> Optional[Poly]:
    """Verified heuristic gcd of integer-primitive polynomials; None when six
    evaluation points fail to produce a nonconstant verified divisor."""
    keys = sorted(a.variables() | b.variables())
    xi = 2 * min(_poly_maxnorm(a), _poly_maxnorm(b)) + 29
    for _ in range(6):
        h = _heu_lift(a, b, keys, xi)
        if h is not None and not h.is_zero():
            h = h.primitive()
            if not h.is_const():
                if try_exact_divide(a, h) is not None and try_exact_divide(b, h) is not None:
                    return h
        xi = xi * 73794 // 27011 + 1
    return None


def _gcd_primitive(a: Poly, b: Poly, rng: random.Random) -> Poly:
    """gcd of two integer-primitive, monomial-content-free polynomials."""
    if a == b:
        return a
    if a.terms == {m: -c for m, c in b.terms.items()}:
        return a if a.leading()[1] > 0 else b
    if a.is_const() or b.is_const():
        return Poly.const(1)
    common = a.variables() & b.variables()
    if not common:
        return Poly.const(1)
    # Cheap divisibility wins: frequent in normalization.
    if len(a.terms) <= len(b.terms) and try_exact_divide(b, a) is not None:
        return a if a.leading()[1] > 0 else -a
    if len(b.terms) < len(a.terms) and try_exact_divide(a, b) is not None:
        return b if b.leading()[1] > 0 else -b
    # Random-evaluation screen: discard variables provably absent from the gcd.
    live = []
    for key in sorted(common):
        if not _screen_variable_trivial(a, b, key, rng):
            live.append(key)
    if not live:
        return Poly.const(1)
    # Heuristic evaluation gcd first; the verified divisor is split off and
    # the (normally coprime) cofactors are finished recursively.
    heur = _gcd_heuristic(a, b)
    if heur is not None:
        rest = poly_gcd(exact_divide(a, heur), exact_divide(b, heur))
        return (heur * rest).primitive()
    # Main variable: the live one appearing in the most terms.
    def frequency(key: VarKey) -> int:
        return sum(1 for m in a.terms for k, _ in m if k == key) + sum(
            1 for m in b.terms for k, _ in m if k == key
        )

    key = max(live, key=frequency)
    ca = _coeffs_wrt(a, key)
    cb = _coeffs_wrt(b, key)
    cont_a = _gcd_many(list(ca.values()), rng)
    cont_b = _gcd_many(list(cb.values()), rng)
    pa = exact_divide(a, cont_a)
    pb = exact_divide(b, cont_b)
    cont = poly_gcd(cont_a, cont_b)
    # Subresultant remainder sequence in the main variable (Brown's divisor
    # bookkeeping): every division below is exact and no gcds are needed
    # inside the loop, which keeps coefficient growth polynomial.
    f, g = (pa, pb) if pa.degree_in(VarId(key)) >= pb.degree_in(VarId(key)) else (pb, pa)
    hp = Poly.const(1)
    gp = Poly.const(1)
    first = True
    while True:
        df = f.degree_in(VarId(key))
        dg = g.degree_in(VarId(key))
        delta = df - dg
        r = _prem(f, g, key)
        if r.is_zero():
            res = _primitive_wrt(g, key, rng)
            break
        if r.degree_in(VarId(key)) == 0:
            res = Poly.const(1)
            break
        if first:
            divisor = Poly.const((-1) ** (delta + 1))
            first = False
        else:
            divisor = (-gp) * hp ** delta
        f, g = g, exact_divide(r, divisor)
        gp = _coeffs_wrt(f, key)[f.degree_in(VarId(key))]
        if delta == 0:
            pass  # h unchanged
        elif delta == 1:
            hp = gp
        else:
            hp = exact_divide(gp ** delta, hp ** (delta - 1))
    out = (res * cont).primitive()
    return out


def _primitive_wrt(p: Poly, key: VarKey, rng: random.Random) -> Poly:
    coeffs = list(_coeffs_wrt(p, key).values())
    cont = _gcd_many(coeffs, rng)
    if cont.is_const() and cont.const_value() == 1:
        return p.primitive()
    return exact_divide(p, cont).primitive()


def _gcd_many(ps: list[Poly], rng: random.Random) -> Poly:
    g = ps[0]
    for p in ps[1:]:
        if g.is_const() and not g.is_zero():
            break
        g = poly_gcd(g, p)
    return g.primitive() if not g.is_zero() else g


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Greatest common divisor, integer-primitive with positive leading
    coefficient; ``gcd(0, 0) = 0``."""
    if a.is_zero() and b.is_zero():
        return Poly()
    if a.is_zero():
        return b.primitive()
    if b.is_zero():
        return a.primitive()
    ma, mb = _mono_content(a), _mono_content(b)
    mg = mono_gcd(ma, mb)
    pa = Poly({mono_div(m, ma): c for m, c in a.terms.items()}).primitive()
    pb = Poly({mono_div(m, mb): c for m, c in b.terms.items()}).primitive()
    rng = random.Random(_SCREEN_RNG_SEED)
    core = _gcd_primitive(pa, pb, rng)
    return core.mul_mono(mg).primitive()


# ---------------------------------------------------------------------------
# Differential atoms.


@dataclass(frozen=True)
class AtomDef:
    """A formal transcendental symbol with prescribed derivative rules.

    ``rules`` maps base variables to the atom's partial derivative there,
    e.g. ``{x: -2*w}`` for ``w = exp(-2x)`` or ``{u1_1: 1/(1+u1_1^2)}`` for
    ``arctan(u1_1)``.  Rule expressions may involve the atom itself and
    lower-indexed atoms only.  ``relation``, when present, must be monic in
    the atom (constant coefficient on the top power) and is used to rewrite
    that power downwards.
    """

    name: str
    index: int
    rules: tuple[tuple[VarId, "RatExpr"], ...]
    relation: Optional[Poly] = None

    def var_id(self) -> VarId:
        return VarId.atom(self.index, self.name)

    def rule_for(self, v: VarId) -> Optional["RatExpr"]:
        for rv, expr in self.rules:
            if rv == v:
                return expr
        return None

    def max_jet_order(self) -> int:
        best = 0
        for rv, _ in self.rules:
            if rv.is_jet():
                best = max(best, rv.jet_order)
        return best

    def validate(self) -> None:
        me = self.var_id().key
        for rv, expr in self.rules:
            if rv.kind == _KIND_ATOM:
                raise ValueError("atom rules must be keyed by base variables")
            for k in expr.numerator.variables() | expr.denominator.variables():
                if k[0] == _KIND_ATOM and k[1] > self.index:
                    raise ValueError(
                        f"rule of atom {self.name} references higher-indexed atom {_var_name(k)}"
                    )
        if self.relation is not None:
            d = self.relation.degree_in(self.var_id())
            if d < 1:
                raise ValueError("atom relation does not involve the atom")
            lead = _coeffs_wrt(self.relation, me).get(d)
            if lead is None or not lead.is_const():
                raise ValueError("atom relation is not monic in the atom")


def make_atom(
    name: str,
    index: int,
    rules: Mapping[VarId, "RatExpr"],
    relation: Optional[Poly] = None,
) -> AtomDef:
    a = AtomDef(name, index, tuple(sorted(rules.items(), key=lambda kv: kv[0].key)), relation)
    a.validate()
    return a


def _reduce_relations(p: Poly, atoms: Sequence[AtomDef]) -> Poly:
    """Rewrite atom powers below their relation degree."""
    related = [(a.var_id().key, a) for a in atoms if a.relation is not None]
    if not related:
        return p
    changed = True
    while changed:
        changed = False
        for key, atom in related:
            d = atom.relation.degree_in(atom.var_id())
            coeffs = _coeffs_wrt(atom.relation, key)
            lead = coeffs[d].const_value()
            # a^d -> -(relation - lead*a^d)/lead
            repl = Poly()
            for e, c in coeffs.items():
                if e == d:
                    continue
                repl = repl + c.mul_mono(((key, e),) if e else _ONE_MONO).scale(Fraction(-1, 1) / lead)
            t: dict = {}
            for m, c in p.terms.items():
                e = dict(m).get(key, 0)
                if e >= d:
                    rest = mono_from_pairs([(k, ee) for k, ee in m if k != key] + [(key, e - d)])
                    q = repl.mul_mono(rest, c)
                    for mm, cc in q.terms.items():
                        nv = t.get(mm, 0) + cc
                        if nv:
                            t[mm] = nv
                        elif mm in t:
                            del t[mm]
                    changed = True
                else:
                    nv = t.get(m, 0) + c
                    if nv:
                        t[m] = nv
                    elif m in t:
                        del t[m]
            p = Poly(t)
    return p


# ---------------------------------------------------------------------------
# Rational expressions.


class RatExpr:
    """Normalized quotient of two polynomials.

    Invariants: denominator nonzero, gcd(numerator, denominator) = 1, the
    denominator is integer-primitive with a positive graded-lex leading
    coefficient, and active atom relations are fully applied.
    """

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: Poly, denominator: Optional[Poly] = None,
                 atoms: Sequence[AtomDef] = ()):
        den = denominator if denominator is not None else Poly.const(1)
        num, den = _normalize(numerator, den, atoms)
        self.numerator = num
        self.denominator = den

    @staticmethod
    def _raw(num: Poly, den: Poly) -> "RatExpr":
        e = RatExpr.__new__(RatExpr)
        e.numerator = num
        e.denominator = den
        return e

    @staticmethod
    def from_poly(p: Poly) -> "RatExpr":
        return RatExpr._raw(p, Poly.const(1))

    @staticmethod
    def const(c: Rational) -> "RatExpr":
        return RatExpr.from_poly(Poly.const(c))

    @staticmethod
    def var(v: VarId, exp: int = 1) -> "RatExpr":
        return RatExpr.from_poly(Poly.var(v, exp))

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def is_poly(self) -> bool:
        return self.denominator.is_const()

    def as_poly(self) -> Poly:
        if not self.denominator.is_const():
            raise ValueError("expression has a nontrivial denominator")
        return self.numerator.scale(1 / self.denominator.const_value())

    def is_const(self) -> bool:
        return self.numerator.is_const() and self.denominator.is_const()

    def const_value(self) -> Fraction:
        return self.numerator.const_value() / self.denominator.const_value()

    def var_ids(self) -> set[VarId]:
        return self.numerator.var_ids() | self.denominator.var_ids()

    def max_jet_order(self, atoms: Sequence[AtomDef] = ()) -> int:
        return max(self.numerator.max_jet_order(atoms), self.denominator.max_jet_order(atoms))

    def depends_on(self, v: VarId) -> bool:
        return self.numerator.depends_on(v) or self.denominator.depends_on(v)

    # Plain operators perform no atom-relation rewriting; use arith() or the
    # context-aware operations when relations are active.

    @staticmethod
    def _coerce(value) -> Optional["RatExpr"]:
        if isinstance(value, RatExpr):
            return value
        if isinstance(value, (int, Fraction)):
            return RatExpr.const(value)
        return None

    def __add__(self, other) -> "RatExpr":
        other = RatExpr._coerce(other)
        if other is None:
            return NotImplemented
        if self.denominator == other.denominator:
            return RatExpr(self.numerator + other.numerator, self.denominator)
        num = self.numerator * other.denominator + other.numerator * self.denominator
        return RatExpr(num, self.denominator * other.denominator)

    __radd__ = __add__

    def __sub__(self, other) -> "RatExpr":
        other = RatExpr._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "RatExpr":
        other = RatExpr._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __neg__(self) -> "RatExpr":
        return RatExpr._raw(-self.numerator, self.denominator)

    def __mul__(self, other) -> "RatExpr":
        other = RatExpr._coerce(other)
        if other is None:
            return NotImplemented
        return RatExpr(self.numerator * other.numerator, self.denominator * other.denominator)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RatExpr":
        other = RatExpr._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by zero expression")
        return RatExpr(self.numerator * other.denominator, self.denominator * other.numerator)

    def __rtruediv__(self, other) -> "RatExpr":
        other = RatExpr._coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, n: int) -> "RatExpr":
        if n < 0:
            if self.is_zero():
                raise ZeroDivisionError("negative power of zero")
            return RatExpr(self.denominator ** (-n), self.numerator ** (-n))
        return RatExpr(self.numerator ** n, self.denominator ** n)

    def scale(self, c: Rational) -> "RatExpr":
        return RatExpr(self.numerator.scale(c), self.denominator)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RatExpr)
            and self.numerator == other.numerator
            and self.denominator == other.denominator
        )

    def __hash__(self) -> int:
        return hash((self.numerator, self.denominator))

    def __repr__(self) -> str:
        return f"RatExpr({canonical_string(self)})"

    def eval_at(self, point: Mapping[VarKey, Rational]) -> Fraction:
        den = self.denominator.eval_at(point)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at evaluation point")
        return self.numerator.eval_at(point) / den


ZERO = RatExpr.from_poly(Poly())
ONE = RatExpr.from_poly(Poly.const(1))


def _squarefree_parts(p: Poly) -> list[Poly]:
    """Square-free parts of ``p`` at every multiplicity level.

    Only gcds of ``p``-sized polynomials are involved, so this is cheap for
    small ``p``; the parts need not be pairwise coprime, they only serve as
    trial divisors."""
    parts: list[Poly] = []
    p = p.primitive()
    for _ in range(64):
        if p.is_const():
            break
        g = p
        for v in sorted(p.variables()):
            g = poly_gcd(g, p.diff_formal(VarId(v)))
            if g.is_const():
                break
        if g.is_const():
            if not any(p == q for q in parts):
                parts.append(p)
            break
        sq = exact_divide(p, g).primitive()
        if not sq.is_const() and not any(sq == q for q in parts):
            parts.append(sq)
        p = g.primitive()
    return parts


def _peel_common_factors(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    """Cancel common factors found among the square-free parts of the
    denominator by trial division.  This removes the structured common
    factors that quotient-rule numerators share with their denominators
    without ever running a gcd on the large numerator."""
    for f in _squarefree_parts(den):
        if f.is_const():
            continue
        while True:
            qd = try_exact_divide(den, f)
            if qd is None:
                break
            qn = try_exact_divide(num, f)
            if qn is None:
                break
            num, den = qn, qd
        if den.is_const():
            break
    return num, den


def _normalize(num: Poly, den: Poly, atoms: Sequence[AtomDef] = ()) -> tuple[Poly, Poly]:
    if den.is_zero():
        raise ZeroDivisionError("zero denominator")
    if atoms:
        num = _reduce_relations(num, atoms)
        den = _reduce_relations(den, atoms)
        if den.is_zero():
            raise ZeroDivisionError("denominator reduces to zero under atom relations")
    if num.is_zero():
        return Poly(), Poly.const(1)
    if not den.is_const():
        if len(num.terms) > 40:
            num, den = _peel_common_factors(num, den)
    if not den.is_const():
        g = poly_gcd(num, den)
        if not (g.is_const() and g.const_value() == 1):
            num = exact_divide(num, g)
            den = exact_divide(den, g)
    # Scale so the denominator is integer-primitive with positive leading coefficient.
    c = den.content()
    if den.leading()[1] < 0:
        c = -c
    if c != 1:
        num = num.scale(1 / c)
        den = den.scale(1 / c)
    return num, den


def arith(op: str, a: RatExpr, b: RatExpr, atoms: Sequence[AtomDef] = ()) -> RatExpr:
    """Exact field arithmetic with atom relations applied to the result."""
    if op == "add":
        num = a.numerator * b.denominator + b.numerator * a.denominator
        den = a.denominator * b.denominator
    elif op == "sub":
        num = a.numerator * b.denominator - b.numerator * a.denominator
        den = a.denominator * b.denominator
    elif op == "mul":
        num = a.numerator * b.numerator
        den = a.denominator * b.denominator
    elif op == "div":
        if b.is_zero():
            raise ZeroDivisionError("division by zero expression")
        num = a.numerator * b.denominator
        den = a.denominator * b.numerator
    else:
        raise ValueError(f"unknown operation {op!r}")
    return RatExpr(num, den, atoms)


# ---------------------------------------------------------------------------
# Differentiation and substitution.


def apply_derivation(
    coeffs: Mapping[VarId, RatExpr],
    e: RatExpr,
    atoms: Sequence[AtomDef] = (),
) -> RatExpr:
    """Apply the derivation ``sum_v coeffs[v] * d/dv`` to ``e``.

    Atom variables appearing in ``e`` are differentiated through their rules:
    the derivation value on an atom is the rule-weighted combination of the
    given coefficients.
    """
    support = e.var_ids()
    ext: list[tuple[VarId, RatExpr]] = [
        (v, c) for v, c in coeffs.items() if not c.is_zero()
    ]
    for atom in atoms:
        av = atom.var_id()
        if av not in support:
            continue
        w = ZERO
        for rv, rule in atom.rules:
            c = coeffs.get(rv)
            if c is not None and not c.is_zero():
                w = arith("add", w, arith("mul", c, rule, atoms), atoms)
        if not w.is_zero():
            ext.append((av, w))

    p, q = e.numerator, e.denominator
    # Accumulate sum_z c_z * dP/dz and sum_z c_z * dQ/dz over one common
    # denominator, normalizing only once at the end.  Polynomial coefficients
    # (the overwhelmingly common case) are processed first so the running
    # denominator stays 1 for them.
    ext.sort(key=lambda vc: not vc[1].is_poly())
    n1, n2 = Poly(), Poly()
    dacc = Poly.const(1)
    dacc_is_one = True
    for v, c in ext:
        if not (p.depends_on(v) or q.depends_on(v)):
            continue
        dp = p.diff_formal(v)
        dq = q.diff_formal(v)
        cn, cd = c.numerator, c.denominator
        if cd.is_const():
            if not dacc_is_one:
                cn = cn * dacc
            n1 = n1 + dp * cn
            n2 = n2 + dq * cn
        else:
            n1 = n1 * cd + dp * cn * dacc
            n2 = n2 * cd + dq * cn * dacc
            dacc = dacc * cd
            dacc_is_one = False
    if n1.is_zero() and n2.is_zero():
        return ZERO
    num = n1 * q - p * n2
    den = dacc * q * q
    return RatExpr(num, den, atoms)


def differentiate(e: RatExpr, v: VarId, atoms: Sequence[AtomDef] = ()) -> RatExpr:
    """Exact partial derivative; atoms differentiate via their rules and
    parameters are constants unless ``v`` names one."""
    return apply_derivation({v: ONE}, e, atoms)


def substitute(
    e: RatExpr,
    bindings: Mapping[VarId, RatExpr],
    atoms: Sequence[AtomDef] = (),
) -> RatExpr:
    """Simultaneous substitution followed by normalization.

    Raises :class:`DenominatorVanishesError` when the substituted denominator
    is identically zero.
    """
    live = {v: b for v, b in bindings.items() if e.depends_on(v)}
    if not live:
        return e
    np_, dp_ = _substitute_poly(e.numerator, live)
    nq_, dq_ = _substitute_poly(e.denominator, live)
    if nq_.is_zero():
        raise DenominatorVanishesError("substitution sends the denominator to zero")
    try:
        return RatExpr(np_ * dq_, dp_ * nq_, atoms)
    except ZeroDivisionError as exc:
        raise DenominatorVanishesError(str(exc)) from exc


def _substitute_poly(p: Poly, bindings: Mapping[VarId, RatExpr]) -> tuple[Poly, Poly]:
    """Substitute into a polynomial; returns (numerator, denominator)."""
    keys = {v.key: v for v in bindings}
    degs = {k: 0 for k in keys}
    groups: dict[tuple, dict] = {}
    for m, c in p.terms.items():
        alpha = []
        rest = []
        for k, e in m:
            if k in keys:
                alpha.append((k, e))
                if e > degs[k]:
                    degs[k] = e
            else:
                rest.append((k, e))
        groups.setdefault(tuple(alpha), {})[tuple(rest)] = c
    # power tables
    pnum: dict[VarKey, list[Poly]] = {}
    pden: dict[VarKey, list[Poly]] = {}
    for k, v in keys.items():
        b = bindings[v]
        d = degs[k]
        pnum[k] = [Poly.const(1)]
        pden[k] = [Poly.const(1)]
        for _ in range(d):
            pnum[k].append(pnum[k][-1] * b.numerator)
            pden[k].append(pden[k][-1] * b.denominator)
    total = Poly()
    for alpha, terms in groups.items():
        factor = Poly.const(1)
        used = dict(alpha)
        for k in keys:
            e = used.get(k, 0)
            factor = factor * pnum[k][e] * pden[k][degs[k] - e]
        total = total + Poly(terms) * factor
    den = Poly.const(1)
    for k in keys:
        den = den * pden[k][degs[k]]
    return total, den


# ---------------------------------------------------------------------------
# Rendering.


def _coeff_string(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _term_string(m: Monomial, c: Coeff) -> str:
    c = Fraction(c)
    factors = []
    for k, e in m:
        factors.append(_var_name(k) if e == 1 else f"{_var_name(k)}^{e}")
    if not factors:
        return _coeff_string(abs(c))
    body = "*".join(factors)
    a = abs(c)
    return body if a == 1 else f"{_coeff_string(a)}*{body}"


def poly_string(p: Poly) -> str:
    """Deterministic rendering, terms in ascending graded-lex order."""
    if p.is_zero():
        return "0"
    parts = []
    for i, (m, c) in enumerate(p.sorted_terms(ascending=True)):
        neg = Fraction(c) < 0
        s = _term_string(m, c)
        if i == 0:
            parts.append(f"-{s}" if neg else s)
        else:
            parts.append(f" - {s}" if neg else f" + {s}")
    return "".join(parts)


def canonical_string(e: Union[RatExpr, Poly]) -> str:
    """Bit-exact canonical rendering of a polynomial or rational expression."""
    if isinstance(e, Poly):
        return poly_string(e)
    if e.denominator.is_const() and e.denominator.const_value() == 1:
        return poly_string(e.numerator)
    return f"({poly_string(e.numerator)})/({poly_string(e.denominator)})"
