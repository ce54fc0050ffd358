import pytest

from jetlie import (
    ExprSyntaxError,
    ParseEnv,
    RatExpr,
    UnknownVariableError,
    VarId,
    canonical_string,
    dump_algebra_file,
    make_atom,
    parse_algebra_file,
    parse_expression,
)

one = RatExpr.const(1)
U1 = RatExpr.var(VarId.jet(1, 1))
U2 = RatExpr.var(VarId.jet(1, 2))


class TestExpressions:
    def test_family_residual(self):
        env = ParseEnv(
            1, 3,
            (make_atom("w", 0, {VarId.x(): RatExpr.var(VarId.atom(0, "w")) * (-2)}),),
            ("K",),
        )
        e = parse_expression("u1_2 - (1/2)*u1_1 - K*w*u1_1^3", env)
        K = RatExpr.var(VarId.param("K"))
        w = RatExpr.var(VarId.atom(0, "w"))
        assert e == U2 - U1 / 2 - K * w * U1 ** 3

    def test_powers(self):
        assert parse_expression("x^2") == RatExpr.var(VarId.x()) ** 2

    def test_precedence(self):
        got = parse_expression("-u1_1^2 + 1")
        assert got == one - U1 * U1
        assert parse_expression("1/2*u1_1") == U1 / 2
        assert parse_expression("2*u1_1/4") == U1 / 2

    def test_trailing_operator(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse_expression("u1_1/")
        assert err.value.span.column == 6

    def test_unknown_variable(self):
        with pytest.raises(UnknownVariableError):
            parse_expression("q + 1")

    def test_order_bound(self):
        with pytest.raises(ExprSyntaxError):
            parse_expression("u1_7", ParseEnv(1, 3))

    def test_exponent_must_be_literal(self):
        with pytest.raises(ExprSyntaxError):
            parse_expression("x^u1")
        with pytest.raises(ExprSyntaxError):
            parse_expression("x^(2)")

    def test_division_by_zero_literal(self):
        with pytest.raises(ExprSyntaxError):
            parse_expression("x/0")

    def test_round_trip(self):
        env = ParseEnv(2, 4, (), ("K", "alpha"))
        samples = [
            one - U1 * U1,
            -(U2 * (one + U1 * U1)),
            U1 / (one + RatExpr.var(VarId.jet(2, 0)) ** 2),
            RatExpr.var(VarId.param("K")) * U2 / 3 - RatExpr.var(VarId.x()),
        ]
        for e in samples:
            assert parse_expression(canonical_string(e), env) == e


SL2_FILE = """\
# realization acting on the exponential cubic family
m = 1
param K
atom w : d/dx = -2*w
VF 0 | 1
VF 1 | u1
VF u1 | 1/2*u1^2
"""


class TestAlgebraFiles:
    def test_family_file(self):
        parsed = parse_algebra_file(SL2_FILE)
        assert parsed.m == 1
        assert parsed.params == ("K",)
        assert [a.name for a in parsed.atoms] == ["w"]
        assert len(parsed.generators) == 3
        assert parsed.closure is not None and parsed.closure.closed
        assert parsed.warnings == ()

    def test_stabilizing_file(self):
        text = "m = 1\nVF 1 | 0\nVF 0 | 1\nVF 0 | x\nVF x | 2*u1\n"
        parsed = parse_algebra_file(text)
        assert len(parsed.generators) == 4
        assert parsed.closure.closed

    def test_empty_generators(self):
        with pytest.raises(ExprSyntaxError):
            parse_algebra_file("m = 1\nparam K\n")

    def test_non_closing_accepted_with_warning(self):
        text = "m = 1\nVF 1 | 0\nVF 0 | x^2\n"
        parsed = parse_algebra_file(text)
        assert parsed.closure is not None and not parsed.closure.closed
        assert any("close" in w for w in parsed.warnings)

    def test_dependent_generators_warn(self):
        text = "m = 1\nVF 1 | 0\nVF 2 | 0\n"
        parsed = parse_algebra_file(text)
        assert any("dependent" in w for w in parsed.warnings)

    def test_header_after_generators_rejected(self):
        with pytest.raises(ExprSyntaxError):
            parse_algebra_file("m = 1\nVF 1 | 0\nparam K\n")

    def test_round_trip_dump_parse(self):
        parsed = parse_algebra_file(SL2_FILE)
        dumped = dump_algebra_file(parsed)
        again = parse_algebra_file(dumped)
        assert dump_algebra_file(again) == dumped
        assert again.generators == parsed.generators
        assert again.atoms == parsed.atoms

    def test_relation_clause(self):
        text = (
            "m = 1\n"
            "atom s : d/du1_1 = u1_1*s/(1 + u1_1^2) ; relation = s^2 - 1 - u1_1^2\n"
            "VF 1 | 0\n"
        )
        parsed = parse_algebra_file(text)
        assert parsed.atoms[0].relation is not None
        dumped = dump_algebra_file(parsed)
        assert "relation" in dumped
        assert parse_algebra_file(dumped).atoms == parsed.atoms
