from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigidcoh.bornology import lattice_included
from rigidcoh.derham import TruncatedComplex, induced_map, integration_contraction, structure_map
from rigidcoh.errors import WindowMismatch
from rigidcoh.holim import level_window
from rigidcoh.linalg import PMatrix
from rigidcoh.padic import PadicContext
from rigidcoh.parsing import parse_form, parse_poly
from rigidcoh.presentation import Presentation, RingMap, change_of_generators

HALF = Fraction(1, 2)
AFFINE = Presentation.parse(5, ["x"], [])
GM = Presentation.parse(7, ["x", "y"], ["x*y - 1"])
NODE = Presentation.parse(5, ["x", "y"], ["y^2 - x^2 - x^3"])
NODE3 = Presentation.parse(5, ["x", "y", "u"], ["y^2 - x^2 - x^3", "u - x - y"])


def level(pres, m, D, nMax=3, mode="exact"):
    w = level_window(m, HALF, nMax, -(-D // nMax), 0, D)
    ctx = PadicContext(pres.p, 12) if mode == "padic" else None
    return TruncatedComplex(pres, w, mode=mode, ctx=ctx)


@pytest.mark.parametrize(
    "pres, D, expected",
    [(AFFINE, 8, [1, 0]), (GM, 8, [1, 1, 0]), (NODE, 6, [1, 1, 0])],
)
@pytest.mark.parametrize("mode", ["exact", "padic"])
def test_level_cohomology(pres, D, expected, mode):
    c = level(pres, 1, D, mode=mode)
    c.check()
    assert c.betti() == expected


@given(st.integers(2, 7), st.integers(1, 2))
def test_differential_squares_to_zero(D, m):
    c = level(GM, m, D, nMax=2)
    for k in range(GM.nvars - 1):
        for row in c.big_rows(k):
            assert not c.d(c.d(row, k), k + 1)


def test_structure_map_is_a_chain_map():
    c1, c2 = level(NODE, 1, 6), level(NODE, 2, 6)
    s = structure_map(c2, c1)
    assert s.commutes_with_d()
    assert s.cohomology_ranks() == [1, 1, 0]


def test_node_levels_shrink():
    c1, c2 = level(NODE, 1, 6), level(NODE, 2, 6)
    assert lattice_included(c2.lattice, c1.lattice)
    assert not lattice_included(c1.lattice, c2.lattice)


def test_affine_line_structure_maps_are_isomorphisms():
    c1, c2, c3 = (level(AFFINE, m, 8) for m in (1, 2, 3))
    assert structure_map(c2, c1).cohomology_ranks() == c1.betti() == [1, 0]
    assert structure_map(c3, c2).cohomology_ranks() == c2.betti()


def test_generator_change_is_a_homotopy_equivalence():
    ch = change_of_generators(NODE, NODE3, {"u": "x + y"})
    w = level_window(1, HALF, 3, 2, 0, 5)
    cs, ct = TruncatedComplex(NODE, w), TruncatedComplex(NODE3, w)
    f = induced_map(ch.f_map, cs, ct)
    g = induced_map(ch.g_map, ct, cs)
    assert f.commutes_with_d() and g.commutes_with_d()
    assert f.cohomology_ranks() == [1, 1, 0] and g.cohomology_ranks() == [1, 1, 0, 0]
    gf = induced_map(ch.f_map.then(ch.g_map), cs, cs)
    fg = induced_map(ch.g_map.then(ch.f_map), ct, ct)
    assert gf.minus(induced_map(RingMap.identity(2), cs, cs)).cohomology_ranks() == [0, 0, 0]
    assert fg.minus(induced_map(RingMap.identity(3), ct, ct)).cohomology_ranks() == [0, 0, 0, 0]


def test_squaring_map_follows_the_chain_rule():
    square = RingMap((parse_poly("x^2", ["x"]),), 1, 1)
    src, dst = level(AFFINE, 1, 3), level(AFFINE, 1, 8)
    phi = induced_map(square, src, dst)
    dx = src.basis(1).row(parse_form("dx", ["x"]))
    image = dst.basis(1).form(phi.apply(dx, 1))
    assert image == parse_form("2*x dx", ["x"])


def test_window_mismatch_is_reported():
    square = RingMap((parse_poly("x^2", ["x"]),), 1, 1)
    with pytest.raises(WindowMismatch):
        induced_map(square, level(AFFINE, 1, 6), level(AFFINE, 1, 6))


@pytest.mark.parametrize("ctx", [None, PadicContext(5, 10)])
def test_integration_contraction(ctx):
    h = integration_contraction(6, ctx)
    assert h.check() == (True, True)


def test_integration_values():
    h = integration_contraction(4)
    one = PMatrix.from_dense([[1], [0], [0], [0]])  # dx in C^1
    x2 = PMatrix.from_dense([[0], [0], [1], [0]])  # x^2 dx
    assert (h.i @ one).to_dense() == [[0], [1], [0], [0], [0]]
    assert (h.i @ x2).to_dense() == [[0], [0], [0], [Fraction(1, 3)], [0]]


def test_integration_contraction_needs_a_degree():
    with pytest.raises(ValueError):
        integration_contraction(0)
