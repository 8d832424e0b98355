import pytest

from rigidcoh.errors import CertificateMissing, ContextError
from rigidcoh.parsing import parse_poly
from rigidcoh.poly import PolyForm, product
from rigidcoh.presentation import (
    Presentation,
    RingMap,
    TubeAlgebraPresentation,
    change_of_generators,
    check_certificate,
    ideal_membership,
    power_factorizations,
    power_generators,
)

GM = Presentation.parse(5, ["x", "y"], ["x*y - 1"])
NODE = Presentation.parse(5, ["x", "y"], ["y^2 - x^2 - x^3"])
NODE3 = Presentation.parse(5, ["x", "y", "u"], ["y^2 - x^2 - x^3", "u - x - y"])


def poly(text, names=("x", "y")):
    return parse_poly(text, list(names))


def test_power_generators_of_the_square():
    gens = power_generators(GM, 2)
    assert gens == [
        PolyForm.constant(2, 25),
        poly("5*x*y - 5"),
        poly("(x*y - 1)^2"),
    ]


def test_power_factorizations_multiply_out():
    for whole, *factors in power_factorizations(GM, 2):
        assert product(factors, 2) == whole


def test_tube_evaluation():
    tube = TubeAlgebraPresentation(GM, 2)
    assert tube.check_evaluation()
    assert tube.variables == ("x", "y", "z1", "z2", "z3")


def test_ideal_membership_mod_p():
    gens = GM.ideal_generators()
    f = poly("x^2*y - x + 10")
    cof = ideal_membership(f, gens, 2, 5, 4)
    assert cof is not None and check_certificate(f, gens, cof, 5)
    assert ideal_membership(poly("x"), gens, 2, 5, 4) is None


def test_identity_change_of_generators():
    ch = change_of_generators(NODE, NODE)
    ident = RingMap.identity(2)
    assert ch.f_map == ident and ch.g_map == ident
    assert ch.homotopy_at(0) == ident and ch.homotopy_at(1) == ident


def test_extra_generator_with_section():
    ch = change_of_generators(NODE, NODE3, {"u": "x + y"})
    assert ch.homotopy_at(1) == RingMap.identity(3)
    # at t = 0 the homotopy is f o g
    assert ch.homotopy_at(0) == ch.g_map.then(ch.f_map)
    assert all(k in ch.certificates for k in [("f", 0), ("g", 0), ("g", 1)])


def test_ring_map_substitution():
    square = RingMap((poly("x^2", ["x"]),), 1, 1)
    assert square(poly("x^3 + 1", ["x"])) == poly("x^6 + 1", ["x"])
    assert square.then(square)(poly("x", ["x"])) == poly("x^4", ["x"])


def test_missing_section():
    with pytest.raises(CertificateMissing):
        change_of_generators(NODE, NODE3)


def test_bad_section_has_no_certificate():
    # u -> x does not send u - x - y into the node ideal
    with pytest.raises(CertificateMissing):
        change_of_generators(NODE, NODE3, {"u": "x"})


def test_primes_must_agree():
    with pytest.raises(ContextError):
        change_of_generators(NODE, Presentation.parse(7, ["x", "y"], ["y^2 - x^2 - x^3"]))


def test_relations_must_be_integral():
    with pytest.raises(ValueError):
        Presentation.parse(5, ["x"], ["x/2"])
    with pytest.raises(ValueError):
        Presentation.parse(5, ["x", "x"])
