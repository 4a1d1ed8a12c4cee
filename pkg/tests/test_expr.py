import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from measurecalc import ExprSyntaxError, MappingDomainError, UnboundVariable, eval_expr, parse_expr


class TestEval:
    def test_ratio(self):
        assert eval_expr(parse_expr("V/I"), {"V": 10, "I": 2}) == 5.0

    def test_log_e(self):
        assert eval_expr(parse_expr("log(T)"), {"T": math.e}) == 1.0

    def test_division_by_zero(self):
        with pytest.raises(MappingDomainError):
            eval_expr(parse_expr("V/I"), {"V": 10, "I": 0})

    @pytest.mark.parametrize("text, x", [("log(x)", -1.0), ("log(x)", 0.0), ("sqrt(x)", -4.0), ("exp(x)", 1e4)])
    def test_domain_errors(self, text, x):
        with pytest.raises(MappingDomainError):
            eval_expr(parse_expr(text), {"x": x})

    def test_unbound(self):
        with pytest.raises(UnboundVariable):
            eval_expr(parse_expr("a + b"), {"a": 1})

    @pytest.mark.parametrize(
        "text, value",
        [
            ("1 + 2 * 3", 7.0),
            ("(1 + 2) * 3", 9.0),
            ("-2^2", -4.0),
            ("2^-1", 0.5),
            ("2^3^2", 64.0),
            ("8 / 4 / 2", 1.0),
            ("10 - 4 - 3", 3.0),
            ("sqrt(16) + exp(0)", 5.0),
            ("1.5e1", 15.0),
            ("--3", 3.0),
        ],
    )
    def test_precedence_and_associativity(self, text, value):
        assert eval_expr(parse_expr(text), {}) == value

    def test_vectorised_error_reports_index(self):
        e = parse_expr("V/I")
        with pytest.raises(MappingDomainError) as info:
            e.evaluate({"V": np.ones(4), "I": np.array([1.0, 2.0, 0.0, 1.0])})
        assert info.value.index == 2

    def test_variables(self):
        assert parse_expr("a*log(b)+a").variables == {"a", "b"}


class TestSyntax:
    @pytest.mark.parametrize("text", ["", "1 +", "(1", "1)", "log 2", "2 ** 3", "foo(1)", "1 2", "@"])
    def test_rejects_with_location(self, text):
        with pytest.raises(ExprSyntaxError) as info:
            parse_expr(text)
        assert info.value.location.startswith("col ")

    @given(st.text(alphabet="0123456789.eE+-*/^()xyz logexpsqrt ", max_size=30))
    def test_total_over_ascii_fragments(self, text):
        try:
            e = parse_expr(text)
        except ExprSyntaxError:
            return
        try:
            v = eval_expr(e, {"x": 1.5, "y": 2.0, "z": 0.5})
        except (MappingDomainError, UnboundVariable):
            return
        assert math.isfinite(v)

    @given(st.binary(max_size=40))
    def test_arbitrary_bytes(self, raw):
        try:
            parse_expr(raw.decode("latin-1"))
        except ExprSyntaxError:
            pass
