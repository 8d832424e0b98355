from fractions import Fraction

import pytest

from rigidcoh.errors import ParseError
from rigidcoh.parsing import parse_form, parse_poly, parse_problem, tokenize
from rigidcoh.poly import PolyForm

V = ["x", "y"]


def test_polynomial_grammar():
    assert parse_poly("x^2", V) == parse_poly("x**2", V) == parse_poly("x*x", V)
    assert parse_poly("(x + y)^2", V) == parse_poly("x^2 + 2*x*y + y^2", V)
    assert parse_poly("-x + 3/2", V) == parse_poly("3/2 - x", V)
    assert parse_poly("p*x", V, p=5) == parse_poly("5*x", V)


def test_form_grammar():
    f = parse_form("x dy ^ dx", V)
    assert f == parse_form("-x dx^dy", V)
    assert f.degree == 2
    assert parse_form("dx + y dy", V).degree == 1


@pytest.mark.parametrize(
    "text, column",
    [("x*^2", 3), ("x + z", 5), ("(x + y", 7), ("2 x", 3)],
)
def test_error_positions(text, column):
    with pytest.raises(ParseError) as info:
        parse_poly(text, V)
    assert info.value.column == column
    assert info.value.line == 1


def test_literal_p_needs_a_prime():
    with pytest.raises(ParseError):
        parse_poly("p*x", V)


def test_tokens_carry_columns():
    toks = tokenize("x + 12")
    assert [t.text for t in toks][:3] == ["x", "+", "12"]
    assert [t.column for t in toks][:3] == [1, 3, 5]


PROBLEM = """\
# nodal cubic
p = 5
vars x, y
relations y^2 - x^2 - x^3
alt_vars x, y, u
alt_relations y^2 - x^2 - x^3, u - x - y
section u -> x + y
mode exact
oracle on
gamma = 1/3
D = 6, 8
nMax = 3
"""


def test_problem_file():
    spec = parse_problem(PROBLEM)
    assert spec.p == 5
    assert spec.variables == ["x", "y"]
    assert [r[0] for r in spec.relations] == ["y^2 - x^2 - x^3"]
    assert spec.alt_variables == ["x", "y", "u"]
    assert len(spec.alt_relations) == 2
    assert spec.section["u"][0] == "x + y"
    assert spec.mode == "exact" and spec.oracle
    assert spec.gamma == Fraction(1, 3)
    assert spec.schedule["D"] == [6, 8]
    assert spec.schedule["nMax"] == [3]


def test_problem_relation_positions():
    spec = parse_problem("p = 7\nvars x, y\nrelations x*y - 1, x^2\n")
    (_, line, col), (_, line2, col2) = spec.relations
    assert (line, col) == (3, 11)
    assert (line2, col2) == (3, 20)


@pytest.mark.parametrize(
    "text",
    [
        "vars x\n",
        "p = 5\n",
        "p = five\nvars x\n",
        "p = 5\nvars x, x\n",
        "p = 5\nvars x\nmode fast\n",
        "p = 5\nvars x\ngamma = -1\n",
        "p = 5\nvars x\nsection u x\n",
    ],
)
def test_problem_errors(text):
    with pytest.raises(ParseError):
        parse_problem(text)


def test_semicolons_separate_statements():
    spec = parse_problem("p = 3; vars t; relations none")
    assert spec.p == 3 and spec.variables == ["t"] and spec.relations == []


def test_parsed_forms_are_exact_rationals():
    f = parse_poly("1/3*x", ["x"])
    assert f.terms[((1,), ())] == Fraction(1, 3)
    assert isinstance(f, PolyForm)
