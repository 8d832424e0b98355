from fractions import Fraction

import pytest

from rigidcoh.corpus import CORPUS, EXPECTED_BETTI
from rigidcoh.errors import ParseError
from rigidcoh.linalg import DEFAULT_SCHEDULE
from rigidcoh.pipeline import build_schedule, evaluate_point, independence_check, load_problem, run, same_betti


def test_default_schedule():
    assert build_schedule() == DEFAULT_SCHEDULE
    pts = build_schedule({"D": [8, 12, 16, 20]})
    assert [p.nMax for p in pts] == [3, 4, 5, 6]
    assert [p.mMax for p in pts] == [1, 2, 3, 4]


def test_schedule_broadcast_and_levels():
    pts = build_schedule({"D": [4, 6], "nMax": [2]}, levels=3, gamma="1/3")
    assert [(p.D, p.nMax, p.mMax) for p in pts] == [(4, 2, 3), (6, 2, 3)]
    assert all(p.gamma == Fraction(1, 3) and p.e == -(-p.D // 2) for p in pts)
    with pytest.raises(ValueError):
        build_schedule({"D": [4, 6], "nMax": [2, 3, 4]})


def test_same_betti_pads_with_zeros():
    assert same_betti([1, 1, 0], [1, 1, 0, 0])
    assert not same_betti([1, 1], [1, 2, 0])
    assert not same_betti(None, [1])


def test_corpus_is_consistent():
    assert CORPUS.keys() == EXPECTED_BETTI.keys()
    for name, text in CORPUS.items():
        problem = load_problem(text)
        assert problem.presentation.nvars + 1 == len(EXPECTED_BETTI[name])


def test_section_must_name_an_alternative_variable():
    text = "p = 5\nvars x\nrelations none\nalt_vars x, u\nalt_relations u - x\nsection v -> x\n"
    with pytest.raises(ParseError):
        load_problem(text)


def test_single_point_evaluation():
    problem = load_problem("p = 7\nvars x, y\nrelations x*y - 1\nmode exact\n")
    out = evaluate_point(problem, problem.schedule[0])
    assert out.betti == [1, 1, 0]
    assert out.extra["additive"]


def test_independence_records_comparison_maps():
    problem = load_problem(
        "p = 5\nvars x\nrelations none\nalt_vars x, u\nalt_relations u - x - 1\nsection u -> x + 1\n"
    )
    ind = independence_check(problem, problem.schedule[0])
    assert same_betti(ind["betti"], [1, 0])
    assert ind["f_ranks"] == [1, 0] and ind["g_ranks"] == [1, 0, 0]
    assert sorted(ind["certificates"]) == ["H0", "g0"]


def test_degree_raising_section_is_reported():
    # u -> x^2 doubles degrees, so g^* leaves a window of the same size
    problem = load_problem(
        "p = 5\nvars x\nrelations none\nalt_vars x, u\nalt_relations u - x^2\nsection u -> x^2\n"
    )
    ind = independence_check(problem, problem.schedule[0])
    assert same_betti(ind["betti"], [1, 0])
    assert ind["comparison_maps"].startswith("WINDOW_MISMATCH")


def test_report_surfaces_failing_stage():
    res = run(load_problem("p = 7\nvars x, y\nrelations x*y - 1\nD 1\nnMax 1\nmMax 1\n"))
    assert res.report["error"]["stage"] == "stabilization"
    assert res.report["error"]["code"] == "NOT_STABILIZED"
