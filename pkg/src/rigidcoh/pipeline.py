"""End-to-end runs: problem -> schedule -> certificates -> report.

A report is a JSON-able dict with schema ``rigidcoh.report/1``; the text
form is rendered from it.  Nothing time- or host-dependent enters the report
unless timing is requested, so repeated runs produce identical bytes.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import __version__
from .derham import TruncatedComplex, induced_map
from .errors import NotStabilized, ParseError, RankUncertain, RigidCohError
from .holim import build_cone, build_pro_complex, level_window, lim_lim1_report
from .linalg import DEFAULT_SCHEDULE, INF, PointOutcome, SchedulePoint, stabilization_protocol
from .padic import PadicContext
from .parsing import LIST_KEYS, ProblemSpec, parse_poly, parse_problem
from .presentation import Presentation, change_of_generators

SCHEMA = "rigidcoh.report/1"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_NOT_STABILIZED = 2
EXIT_UNCERTAIN = 3
EXIT_PARSE = 4


@dataclass
class Problem:
    presentation: Presentation
    schedule: tuple
    mode: str = "padic"
    cone: str = "full"
    oracle: bool = False
    alt: Presentation | None = None
    section: dict = field(default_factory=dict)  # alt variable -> text in the main variables
    relation_texts: tuple = ()
    label: str = ""
    max_generators: int | None = None
    verify: bool = True
    budget: int = 1

    @property
    def p(self) -> int:
        return self.presentation.p

    def with_presentation(self, pres: Presentation) -> "Problem":
        return replace(self, presentation=pres, alt=None, section={}, oracle=False, relation_texts=())


def _extend(values: list, n: int, step: int) -> list:
    out = list(values)
    while len(out) < n:
        out.append(out[-1] + step)
    return out


def build_schedule(overrides: dict | None = None, levels: int | None = None, gamma=None) -> tuple:
    """Schedule points from per-key lists; a one-element list is broadcast.

    Missing keys come from the default schedule, extended by +4 in D and
    +1 in nMax and mMax per extra point.  ``levels`` pins mMax.
    """
    overrides = dict(overrides or {})
    lengths = {len(v) for v in overrides.values() if len(v) > 1}
    if len(lengths) > 1:
        raise ValueError(f"schedule lists have different lengths {sorted(lengths)}")
    n = lengths.pop() if lengths else (1 if overrides else len(DEFAULT_SCHEDULE))
    defaults = {
        "D": _extend([pt.D for pt in DEFAULT_SCHEDULE], n, 4),
        "nMax": _extend([pt.nMax for pt in DEFAULT_SCHEDULE], n, 1),
        "mMax": _extend([pt.mMax for pt in DEFAULT_SCHEDULE], n, 1),
        "c0": [0] * n,
        "N": [12] * n,
        "e": [None] * n,
    }
    cols = {}
    for key in LIST_KEYS:
        vals = overrides.get(key)
        if vals is None:
            cols[key] = defaults[key][:n]
        elif len(vals) == 1:
            cols[key] = vals * n
        else:
            cols[key] = list(vals)
    if levels is not None:
        cols["mMax"] = [levels] * n
    extra = {} if gamma is None else {"gamma": Fraction(gamma)}
    return tuple(
        SchedulePoint(
            D=cols["D"][i], nMax=cols["nMax"][i], mMax=cols["mMax"][i], e=cols["e"][i],
            c0=cols["c0"][i], N=cols["N"][i], **extra,
        )
        for i in range(n)
    )


def problem_from_spec(spec: ProblemSpec, **overrides) -> Problem:
    """Turn parsed problem text into a :class:`Problem` (relations parsed here)."""
    names = spec.variables
    rels = tuple(parse_poly(t, names, spec.p, line, col) for t, line, col in spec.relations)
    pres = Presentation(tuple(names), rels, spec.p, spec.label)
    alt = None
    section = {}
    if spec.alt_variables:
        alt_rels = tuple(parse_poly(t, spec.alt_variables, spec.p, l, c) for t, l, c in spec.alt_relations)
        alt = Presentation(tuple(spec.alt_variables), alt_rels, spec.p, f"{spec.label} (alternative)".strip())
        for name, (text, line, col) in spec.section.items():
            if name not in spec.alt_variables:
                raise ParseError(f"section names unknown variable {name!r}", line, col, name)
            parse_poly(text, names, spec.p, line, col)
            section[name] = text
    levels = overrides.pop("levels", None)
    levels = spec.levels if levels is None else levels
    schedule = overrides.pop("schedule", None)
    if schedule is None:
        schedule = build_schedule(spec.schedule, levels, spec.gamma)
    elif levels is not None:
        schedule = tuple(replace(pt, mMax=levels) for pt in schedule)
    fields = dict(
        presentation=pres,
        schedule=schedule,
        mode=spec.mode,
        cone=spec.cone,
        oracle=spec.oracle,
        alt=alt,
        section=section,
        relation_texts=tuple(t for t, _, _ in spec.relations),
        label=spec.label,
        max_generators=spec.max_generators,
    )
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return Problem(**fields)


def load_problem(text: str, **overrides) -> Problem:
    return problem_from_spec(parse_problem(text), **overrides)


# ---------------------------------------------------------------------------
# one schedule point


def _context(problem: Problem, point: SchedulePoint) -> PadicContext | None:
    return PadicContext(problem.p, point.N) if problem.mode == "padic" else None


def evaluate_point(problem: Problem, point: SchedulePoint) -> PointOutcome:
    """Betti numbers of the cone (or of level 1) at one schedule point."""
    ctx = _context(problem, point)
    depth = point.mMax if problem.cone == "full" else 1
    pc = build_pro_complex(
        problem.presentation,
        depth,
        D=point.D,
        nMax=point.nMax,
        e=point.e,
        c0=point.c0,
        gamma=point.gamma,
        budget=problem.budget,
        mode=problem.mode,
        ctx=ctx,
        verify=problem.verify,
        max_generators=problem.max_generators,
    )
    cone = build_cone(pc)
    if problem.verify and problem.cone == "full":
        cone.check()
    rep = lim_lim1_report(pc, cone)
    betti = rep.cone_betti if problem.cone == "full" else rep.level_betti[0]
    mpp = rep.precision.min_pivot_precision
    extra = rep.as_dict()
    extra["max_pivot_valuation"] = rep.precision.max_pivot_valuation
    return PointOutcome(point, list(betti), None if mpp == INF else mpp, False, extra)


# ---------------------------------------------------------------------------
# auxiliary checks


def precision_check(problem: Problem, point: SchedulePoint, bump: int = 4) -> dict:
    """Re-run a p-adic point with N raised by ``bump``."""
    raised = replace(point, N=point.N + bump)
    try:
        out = evaluate_point(problem, raised)
        return {"N": raised.N, "betti": out.betti, "unchanged": None}
    except RankUncertain as exc:
        return {"N": raised.N, "betti": None, "unchanged": False, "error": str(exc)}


def independence_check(problem: Problem, point: SchedulePoint) -> dict:
    """Stable Betti numbers under the alternative presentation, plus comparison-map ranks."""
    alt_problem = problem.with_presentation(problem.alt)
    out: dict = {"presentation": problem.alt.summary()}
    cog = change_of_generators(problem.presentation, problem.alt, problem.section)
    out["certificates"] = sorted(f"{side}{k}" for side, k in cog.certificates)
    out["lift_compatible"] = {f"{side}{k}": ok for (side, k), ok in sorted(cog.lift_compatible.items())}
    try:
        certs, trace = stabilization_protocol(alt_problem, problem.schedule)
        out["betti"] = [c.betti for c in certs]
        out["accepted_point"] = trace[-1].point.as_dict()
    except NotStabilized as exc:
        out["betti"] = None
        out["error"] = str(exc)
    # level-1 comparison maps f^* and g^* at the accepted point
    ctx = _context(problem, point)
    kw = dict(budget=problem.budget, mode=problem.mode, ctx=ctx, verify=False)
    w = level_window(1, point.gamma, point.nMax, point.e, point.c0, point.D, problem.max_generators)
    try:
        src = TruncatedComplex(problem.presentation, w, **kw)
        dst = TruncatedComplex(problem.alt, w, **kw)
        f_star = induced_map(cog.f_map, src, dst)
        g_star = induced_map(cog.g_map, dst, src)
        out["f_ranks"] = f_star.cohomology_ranks()
        out["g_ranks"] = g_star.cohomology_ranks()
    except RigidCohError as exc:
        out["comparison_maps"] = f"{exc.code}: {exc}"
    return out


def oracle_check(problem: Problem, D: int) -> dict:
    from .oracle import OracleProblem, algebraic_de_rham_betti

    pres = problem.presentation
    prob = OracleProblem(pres.variables, problem.relation_texts or _relation_texts(pres), D, p=pres.p)
    res = algebraic_de_rham_betti(prob)
    return {"D": D, **res.as_dict()}


def _relation_texts(pres: Presentation) -> tuple:
    from .poly import format_form

    return tuple(format_form(g, pres.variables).replace(" ", "") for g in pres.relations)


def same_betti(a, b) -> bool:
    """Equality of Betti lists, padding the shorter one with zeros."""
    if a is None or b is None:
        return False
    n = max(len(a), len(b))
    return list(a) + [0] * (n - len(a)) == list(b) + [0] * (n - len(b))


# ---------------------------------------------------------------------------
# full run


@dataclass
class RunResult:
    report: dict
    exit_code: int

    def json(self) -> str:
        return json.dumps(self.report, indent=2, sort_keys=True)

    def text(self) -> str:
        return render_text(self.report)


def _outcome_dict(o: PointOutcome) -> dict:
    d = {
        "point": o.point.as_dict(),
        "betti": o.betti,
        "uncertain": o.uncertain,
        "min_pivot_precision": o.min_pivot_precision,
    }
    if "error" in o.extra:
        d["error"] = o.extra["error"]
    return d


def run(problem: Problem, timing: bool = False) -> RunResult:
    t0 = time.perf_counter()
    report: dict = {
        "schema": SCHEMA,
        "version": __version__,
        "problem": {
            **problem.presentation.summary(),
            "mode": problem.mode,
            "cone": problem.cone,
            "oracle": problem.oracle,
            "alternative": problem.alt.summary() if problem.alt else None,
            "section": dict(sorted(problem.section.items())),
        },
        "schedule": [pt.as_dict() for pt in problem.schedule],
    }
    stage = "stabilization"
    code = EXIT_OK
    try:
        try:
            certs, trace = stabilization_protocol(problem, problem.schedule)
        except NotStabilized as exc:
            report["trace"] = [_outcome_dict(o) for o in exc.trace]
            last_uncertain = bool(exc.trace) and exc.trace[-1].uncertain
            report["status"] = "precision_uncertain" if last_uncertain else "not_stabilized"
            report["error"] = {"stage": stage, "code": exc.code, "message": str(exc)}
            code = EXIT_UNCERTAIN if last_uncertain else EXIT_NOT_STABILIZED
            return _finish(report, code, timing, t0)
        accepted = trace[-1]
        report["trace"] = [_outcome_dict(o) for o in trace]
        report["certificates"] = [c.as_dict() for c in certs]
        report["betti"] = [c.betti for c in certs]
        report["accepted_point"] = accepted.point.as_dict()
        ex = accepted.extra
        report["levels"] = {
            "betti": ex["level_betti"],
            "sigma_ranks": ex["sigma_ranks"],
            "tower_stable": ex["tower_stable"],
        }
        report["lim_table"] = [
            {"degree": q, "lim": ex["lim"][q], "lim1": ex["lim1"][q], "cone": ex["cone_betti"][q]}
            for q in range(len(ex["lim"]))
        ]
        report["additive"] = ex["additive"]
        report["status"] = "stable"
        if problem.mode == "padic":
            stage = "precision check"
            chk = precision_check(problem, accepted.point)
            chk["unchanged"] = chk["betti"] == accepted.betti
            report["precision_check"] = chk
            if not chk["unchanged"]:
                report["status"] = "precision_sensitive"
                code = EXIT_UNCERTAIN
        if problem.alt is not None:
            stage = "presentation independence"
            ind = independence_check(problem, accepted.point)
            ind["agrees"] = same_betti(ind.get("betti"), report["betti"])
            report["independence"] = ind
            if not ind["agrees"]:
                report["status"] = "independence_mismatch"
                code = EXIT_FAILURE
        if problem.oracle:
            stage = "oracle"
            orc = oracle_check(problem, accepted.point.D)
            orc["agrees"] = orc["betti"] == report["betti"]
            report["oracle"] = orc
            if not orc["agrees"]:
                report["status"] = "oracle_mismatch"
                code = EXIT_FAILURE
    except RigidCohError as exc:
        report["status"] = "error"
        report["error"] = {"stage": stage, "code": exc.code, "message": str(exc)}
        code = EXIT_UNCERTAIN if isinstance(exc, RankUncertain) else EXIT_FAILURE
    return _finish(report, code, timing, t0)


def _finish(report: dict, code: int, timing: bool, t0: float) -> RunResult:
    report["exit_code"] = code
    if timing:
        report["timing_seconds"] = round(time.perf_counter() - t0, 3)
    return RunResult(report, code)


# ---------------------------------------------------------------------------
# text rendering


def render_text(report: dict) -> str:
    pr = report["problem"]
    lines = [
        f"rigid cohomology report ({report['schema']}, version {report['version']})",
        f"problem: {pr.get('label') or '(unnamed)'}  p={pr['p']}  variables={', '.join(pr['variables'])}",
        f"relations: {', '.join(pr['relations']) or 'none'}",
        f"mode: {pr['mode']}  cone: {pr['cone']}",
        f"status: {report['status']}  (exit code {report['exit_code']})",
    ]
    if "error" in report:
        err = report["error"]
        lines.append(f"error in {err['stage']}: {err['code']}: {err['message']}")
    if "betti" in report:
        lines.append("Betti numbers: " + " ".join(f"h{q}={h}" for q, h in enumerate(report["betti"])))
        ap = report["accepted_point"]
        lines.append("accepted at " + ", ".join(f"{k}={v}" for k, v in ap.items()))
    if "lim_table" in report:
        lines.append("degree  lim  lim1  cone")
        for row in report["lim_table"]:
            lines.append(f"{row['degree']:>6}  {row['lim']:>3}  {row['lim1']:>4}  {row['cone']:>4}")
        lines.append(f"additivity: {'ok' if report['additive'] else 'FAILED'}")
        lv = report["levels"]
        for m, b in enumerate(lv["betti"], start=1):
            lines.append(f"level {m}: {b}")
        lines.append(f"tower stable: {lv['tower_stable']}")
    lines.append("trace:")
    for t in report.get("trace", []):
        pt = t["point"]
        tag = "uncertain" if t["uncertain"] else str(t["betti"])
        lines.append(f"  D={pt['D']} nMax={pt['nMax']} mMax={pt['mMax']} N={pt['N']}: {tag}")
    if "precision_check" in report:
        pc = report["precision_check"]
        lines.append(f"precision check at N={pc['N']}: {'unchanged' if pc['unchanged'] else 'CHANGED'}")
    if "independence" in report:
        ind = report["independence"]
        lines.append(
            f"alternative presentation ({', '.join(ind['presentation']['variables'])}): "
            f"{ind.get('betti')} -> {'agrees' if ind['agrees'] else 'DIFFERS'}"
        )
    if "oracle" in report:
        o = report["oracle"]
        lines.append(f"oracle at D={o['D']}: {o['betti']} stable={o['stable']} -> {'agrees' if o['agrees'] else 'DIFFERS'}")
    if "timing_seconds" in report:
        lines.append(f"time: {report['timing_seconds']} s")
    return "\n".join(lines) + "\n"
