#!/usr/bin/env python3
"""Run every built-in corpus problem and write JSON and text reports.

    python3 scripts/run_corpus.py --out reports [--mode exact] [--only gm node]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from rigidcoh.corpus import CORPUS, EXPECTED_BETTI
from rigidcoh.pipeline import load_problem, run


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="reports", help="output directory")
    ap.add_argument("--mode", choices=["padic", "exact"])
    ap.add_argument("--only", nargs="*", choices=sorted(CORPUS), help="subset of problems")
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    worst = 0
    for name in args.only or CORPUS:
        t0 = time.perf_counter()
        result = run(load_problem(CORPUS[name], mode=args.mode))
        secs = time.perf_counter() - t0
        (out / f"{name}.json").write_text(result.json() + "\n")
        (out / f"{name}.txt").write_text(result.text())
        betti = result.report.get("betti")
        flag = "ok" if betti == EXPECTED_BETTI[name] else f"expected {EXPECTED_BETTI[name]}"
        print(f"{name:12s} exit={result.exit_code} betti={betti} {flag} {secs:.1f}s")
        worst = max(worst, result.exit_code if flag == "ok" else 1)
    return worst


if __name__ == "__main__":
    sys.exit(main())
