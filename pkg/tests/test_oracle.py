import pytest

from rigidcoh.errors import NotStabilized, ParseError
from rigidcoh.oracle import OracleProblem, algebraic_de_rham_betti, is_nonzero_class

# frozen reference values: Betti numbers of Q[x]/(g) at bounded degree


@pytest.mark.parametrize(
    "variables, relations, D, expected",
    [
        (("x",), (), 8, [1, 0]),
        (("x", "y"), (), 6, [1, 0, 0]),
        (("x", "y"), ("x*y - 1",), 8, [1, 1, 0]),
        (("x", "y"), ("y^2 - x^3 - x",), 12, [1, 2, 0]),
        (("x", "y"), ("y^2 - x^2 - x^3",), 8, [1, 1, 0]),
    ],
)
def test_frozen_betti(variables, relations, D, expected):
    res = algebraic_de_rham_betti(OracleProblem(variables, relations, D))
    assert res.stable
    assert res.betti == expected


def test_monomial_order_does_not_matter():
    a = algebraic_de_rham_betti(OracleProblem(("x", "y"), ("x*y - 1",), 6, order="grevlex"))
    b = algebraic_de_rham_betti(OracleProblem(("x", "y"), ("x*y - 1",), 6, order="lex"))
    assert a.betti == b.betti


def test_gm_class_of_y_dx():
    prob = OracleProblem(("x", "y"), ("x*y - 1",), 8)
    assert is_nonzero_class(prob, {(0,): "y"})
    assert not is_nonzero_class(prob, {(0,): "x"})
    assert not is_nonzero_class(prob, {(0,): "x^3"})


def test_non_closed_form_is_rejected():
    prob = OracleProblem(("x", "y"), (), 4)
    with pytest.raises(ValueError):
        is_nonzero_class(prob, {(0,): "y"})


def test_literal_prime_in_relations():
    prob = OracleProblem(("x",), ("p*x - 1",), 4, p=5)
    assert algebraic_de_rham_betti(prob).betti == [1, 0]


def test_strict_mode_reports_instability():
    # without boundary slack the caps 3 and 4 disagree
    prob = OracleProblem(("x", "y"), ("y^2 - x^3 - x",), 3, slack=0)
    res = algebraic_de_rham_betti(prob, step=1)
    assert not res.stable
    assert res.by_degree_cap == {3: [1, 6, 2], 4: [1, 7, 2]}
    with pytest.raises(NotStabilized):
        algebraic_de_rham_betti(prob, step=1, strict=True)


def test_bad_input():
    with pytest.raises(ParseError):
        OracleProblem(("x",), ("x +* 1",), 4).polys
    with pytest.raises(ValueError):
        OracleProblem(("x",), ("x^5",), 2)
