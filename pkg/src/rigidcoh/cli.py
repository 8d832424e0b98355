"""Command line front end.

Exit codes: 0 success, 1 other failure or oracle/independence mismatch,
2 not stabilized, 3 precision uncertain, 4 parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import CORPUS
from .errors import ParseError
from .linalg import SchedulePoint
from .pipeline import EXIT_FAILURE, EXIT_PARSE, build_schedule, load_problem, run


def _read_schedule(path: str) -> tuple:
    """JSON: either ``{"D": [..], "nMax": [..], ..}`` or a list of point objects."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, list):
        return tuple(SchedulePoint(**pt) for pt in data)
    if isinstance(data, dict):
        lists = {k: v if isinstance(v, list) else [v] for k, v in data.items() if k != "gamma"}
        return build_schedule(lists, gamma=data.get("gamma"))
    raise ValueError("schedule file must hold a JSON object or list")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rigidcoh", description="Truncated rigid cohomology of F_p-algebras.")
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem", help="problem file")
    src.add_argument("--corpus", choices=sorted(CORPUS), help="built-in regression problem")
    ap.add_argument("--mode", choices=["padic", "exact"], help="override the arithmetic mode")
    ap.add_argument("--cone", choices=["full", "single"], help="full homotopy limit or level 1 only")
    ap.add_argument("--schedule", help="JSON schedule file")
    ap.add_argument("--oracle", action="store_true", default=None, help="compare with the de Rham oracle")
    ap.add_argument("--json", dest="json_out", help="write the JSON report here ('-' for stdout)")
    ap.add_argument("--max-generators", type=int, help="window generator limit")
    ap.add_argument("--levels", type=int, help="pin mMax for every schedule point")
    ap.add_argument("--timing", action="store_true", help="include wall time in the report")
    ap.add_argument("--no-verify", action="store_true", help="skip invariant checks on constructed complexes")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = CORPUS[args.corpus] if args.corpus else Path(args.problem).read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    try:
        schedule = _read_schedule(args.schedule) if args.schedule else None
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: bad schedule: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    try:
        problem = load_problem(
            text,
            mode=args.mode,
            cone=args.cone,
            oracle=args.oracle,
            schedule=schedule,
            levels=args.levels,
            max_generators=args.max_generators,
            verify=False if args.no_verify else None,
        )
    except ParseError as exc:
        where = args.problem or f"corpus:{args.corpus}"
        print(f"{where}: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    result = run(problem, timing=args.timing)
    sys.stdout.write(result.text())
    if args.json_out == "-":
        sys.stdout.write(result.json() + "\n")
    elif args.json_out:
        Path(args.json_out).write_text(result.json() + "\n")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
