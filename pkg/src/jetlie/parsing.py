"""Expression and algebra-file front end.

Expression grammar (precedence ``^`` > unary ``-`` > ``* /`` > ``+ -``)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" uint)?
    atom   := ident | integer | "(" expr ")"

``^`` takes nonnegative integer literals only.  Identifiers are ``x``, the
dependents ``u1..u9`` (``ui_k`` for the k-th derivative), and any atom or
parameter names declared in scope.

Algebra files are line oriented::

    m = <int>
    param <name>
    atom <name> : d/d<var> = <expr> [, d/d<var> = <expr> ...] [; relation = <expr>]
    VF <expr_x> | <expr_u1> | ... | <expr_um>

Blank lines and ``#`` comments are ignored.  Parsing a dumped file returns an
identical structure (dump and parse are mutually inverse on canonical files).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .catalog import AlgebraSpec
from .exprcore import AtomDef, Poly, RatExpr, VarId, canonical_string, make_atom
from .jetspace import DependentGeneratorsError, StructureReport, VectorField, closure_check


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}"


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{message} ({span})")
        self.message = message
        self.span = span


class UnknownVariableError(ExprSyntaxError):
    pass


@dataclass(frozen=True)
class ParseEnv:
    """Name-resolution scope for expressions."""

    m: int = 9
    max_order: int = 12
    atoms: tuple[AtomDef, ...] = ()
    params: tuple[str, ...] = ()

    def resolve(self, name: str, span: SourceSpan) -> VarId:
        if name == "x":
            return VarId.x()
        mm = re.fullmatch(r"u([1-9])(?:_([0-9]+))?", name)
        if mm:
            i = int(mm.group(1))
            k = int(mm.group(2) or 0)
            if i > self.m:
                raise UnknownVariableError(
                    f"dependent u{i} outside scope (m = {self.m})", span)
            if k > self.max_order:
                raise ExprSyntaxError(
                    f"jet order {k} exceeds maximum order {self.max_order}", span)
            return VarId.jet(i, k)
        for a in self.atoms:
            if a.name == name:
                return a.var_id()
        if name in self.params:
            return VarId.param(name)
        raise UnknownVariableError(f"unknown variable {name!r}", span)


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>[0-9]+)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # int | ident | op | end
    text: str
    span: SourceSpan


def _tokenize(text: str, line: int = 1, offset: int = 0) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            at = pos + (len(text[pos:]) - len(rest))
            span = SourceSpan(offset + at, offset + at + 1, line, at + 1)
            raise ExprSyntaxError(f"unexpected character {rest[0]!r}", span)
        kind = m.lastgroup
        span = SourceSpan(offset + m.start(kind), offset + m.end(kind), line, m.start(kind) + 1)
        tokens.append(_Token(kind, m.group(kind), span))
        pos = m.end()
    end_span = SourceSpan(offset + len(text), offset + len(text), line, len(text) + 1)
    tokens.append(_Token("end", "", end_span))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], env: ParseEnv):
        self.tokens = tokens
        self.pos = 0
        self.env = env

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            raise ExprSyntaxError(f"expected {op!r}", tok.span)
        return self.advance()

    def parse(self) -> RatExpr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.span)
        return e

    def expr(self) -> RatExpr:
        e = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> RatExpr:
        e = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance()
            rhs = self.unary()
            if op.text == "*":
                e = e * rhs
            else:
                if rhs.is_zero():
                    raise ExprSyntaxError("division by zero", op.span)
                e = e / rhs
        return e

    def unary(self) -> RatExpr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return -self.unary()
        return self.power()

    def power(self) -> RatExpr:
        base = self.primary()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            exp = self.peek()
            if exp.kind != "int":
                raise ExprSyntaxError("exponent must be a nonnegative integer literal", exp.span)
            self.advance()
            return base ** int(exp.text)
        return base

    def primary(self) -> RatExpr:
        tok = self.advance()
        if tok.kind == "int":
            return RatExpr.const(int(tok.text))
        if tok.kind == "ident":
            return RatExpr.var(self.env.resolve(tok.text, tok.span))
        if tok.kind == "op" and tok.text == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ExprSyntaxError(
            "expected a number, variable or parenthesized expression"
            if tok.kind == "end" else f"unexpected {tok.text!r}",
            tok.span,
        )


def parse_expression(text: str, env: Optional[ParseEnv] = None,
                     line: int = 1, offset: int = 0) -> RatExpr:
    """Parse an expression into an exact rational expression."""
    env = env or ParseEnv()
    return _Parser(_tokenize(text, line, offset), env).parse()


# ---------------------------------------------------------------------------
# Algebra files.


@dataclass
class ParsedAlgebraFile:
    m: int
    atoms: tuple[AtomDef, ...]
    params: tuple[str, ...]
    generators: tuple[VectorField, ...]
    algebra: AlgebraSpec
    closure: Optional[StructureReport]
    warnings: tuple[str, ...]


def parse_algebra_file(text: str, name: str = "file") -> ParsedAlgebraFile:
    m: Optional[int] = None
    atoms: list[AtomDef] = []
    params: list[str] = []
    gens: list[VectorField] = []
    warnings: list[str] = []
    offset = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        indent = raw.index(line) if line else 0
        base = offset + indent
        offset += len(raw) + 1
        if not line:
            continue

        def span(rel: int = 0, length: int = 1) -> SourceSpan:
            return SourceSpan(base + rel, base + rel + length, lineno, indent + rel + 1)

        env = ParseEnv(m or 9, 12, tuple(atoms), tuple(params))
        if line.startswith("m"):
            mm = re.fullmatch(r"m\s*=\s*([0-9]+)", line)
            if not mm:
                raise ExprSyntaxError("malformed m = <int> line", span(0, len(line)))
            if gens:
                raise ExprSyntaxError("header must precede generators", span(0, 1))
            m = int(mm.group(1))
        elif line.startswith("param"):
            mm = re.fullmatch(r"param\s+([A-Za-z][A-Za-z0-9_]*)", line)
            if not mm:
                raise ExprSyntaxError("malformed param line", span(0, len(line)))
            if gens:
                raise ExprSyntaxError("header must precede generators", span(0, 1))
            params.append(mm.group(1))
        elif line.startswith("atom"):
            if gens:
                raise ExprSyntaxError("header must precede generators", span(0, 1))
            head, _, rel = line.partition(";")
            mm = re.fullmatch(r"atom\s+([A-Za-z][A-Za-z0-9_]*)\s*:\s*(.+)", head.strip())
            if not mm:
                raise ExprSyntaxError("malformed atom line", span(0, len(line)))
            atom_name = mm.group(1)
            rule_env = ParseEnv(m or 9, 12, (*atoms, make_atom(atom_name, len(atoms), {})),
                                tuple(params))
            rules = {}
            for part in mm.group(2).split(","):
                rm = re.fullmatch(r"\s*d/d([A-Za-z][A-Za-z0-9_]*)\s*=\s*(.+?)\s*", part)
                if not rm:
                    raise ExprSyntaxError("malformed derivative rule", span(0, len(line)))
                v = rule_env.resolve(rm.group(1), span(0, len(line)))
                rules[v] = parse_expression(rm.group(2), rule_env, lineno)
            relation = None
            if rel.strip():
                rr = re.fullmatch(r"\s*relation\s*=\s*(.+?)\s*", rel)
                if not rr:
                    raise ExprSyntaxError("malformed relation clause", span(0, len(line)))
                relation = parse_expression(rr.group(1), rule_env, lineno).as_poly()
            atoms.append(make_atom(atom_name, len(atoms), rules, relation))
        elif line.startswith("VF"):
            if m is None:
                raise ExprSyntaxError("m must be declared before generators", span(0, 2))
            parts = line[2:].split("|")
            if len(parts) != m + 1:
                raise ExprSyntaxError(
                    f"generator needs {m + 1} components, got {len(parts)}", span(0, len(line)))
            comps = [parse_expression(p, env, lineno) for p in parts]
            gens.append(VectorField(comps[0], tuple(comps[1:])))
        else:
            raise ExprSyntaxError(f"unrecognized line {line.split()[0]!r}", span(0, len(line)))
    if not gens:
        last = SourceSpan(len(text), len(text), text.count("\n") + 1, 1)
        raise ExprSyntaxError("no generators (need at least one VF line)", last)
    if m is None:
        m = gens[0].m
    param_exprs = tuple((p, RatExpr.var(VarId.param(p))) for p in params)
    spec = AlgebraSpec(name, tuple(gens), len(gens), params=param_exprs, atoms=tuple(atoms))
    closure: Optional[StructureReport] = None
    try:
        closure = closure_check(gens, atoms)
        if not closure.closed:
            a, b, W = closure.witness
            warnings.append(
                f"generators do not close: [X{a + 1}, X{b + 1}] is outside the span")
    except DependentGeneratorsError:
        warnings.append("generators are linearly dependent over Q")
    except ValueError as exc:
        warnings.append(f"closure not checked: {exc}")
    return ParsedAlgebraFile(m, tuple(atoms), tuple(params), tuple(gens), spec,
                             closure, tuple(warnings))


def dump_algebra_file(parsed: ParsedAlgebraFile | AlgebraSpec) -> str:
    """Render an algebra in the file format; canonical output round-trips."""
    if isinstance(parsed, AlgebraSpec):
        spec = parsed
        m, atoms = spec.m, spec.atoms
        params = tuple(nm for nm, _ in spec.params)
        gens = spec.generators
    else:
        spec = parsed.algebra
        m, atoms, params, gens = parsed.m, parsed.atoms, parsed.params, parsed.generators
    lines = [f"m = {m}"]
    for p in params:
        lines.append(f"param {p}")
    for a in atoms:
        rules = ", ".join(
            f"d/d{v.name} = {canonical_string(e)}" for v, e in a.rules
        )
        rel = f" ; relation = {canonical_string(a.relation)}" if a.relation is not None else ""
        lines.append(f"atom {a.name} : {rules}{rel}")
    for X in gens:
        comps = " | ".join(canonical_string(c) for c in X.components())
        lines.append(f"VF {comps}")
    return "\n".join(lines) + "\n"
