#!/usr/bin/env python3
"""Dump the differentials of one truncated level complex as COO matrices.

    python3 scripts/export_complex.py --corpus gm --D 8 --nMax 3 --level 1 --out gm_level1
"""

from __future__ import annotations

import argparse
from fractions import Fraction
from pathlib import Path

from rigidcoh.corpus import CORPUS
from rigidcoh.derham import TruncatedComplex
from rigidcoh.holim import level_window
from rigidcoh.pipeline import load_problem


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", choices=sorted(CORPUS), required=True)
    ap.add_argument("--D", type=int, default=8)
    ap.add_argument("--nMax", type=int, default=3)
    ap.add_argument("--level", type=int, default=1)
    ap.add_argument("--gamma", default="1/2")
    ap.add_argument("--out", default="complex")
    args = ap.parse_args(argv)

    pres = load_problem(CORPUS[args.corpus]).presentation
    e = -(-args.D // args.nMax)
    window = level_window(args.level, Fraction(args.gamma), args.nMax, e, 0, args.D)
    cx = TruncatedComplex(pres, window)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(pres.nvars):
        path = out / f"d{k}.coo"
        path.write_text(cx.differential_matrix(k).to_coo(f"d{k}: C^{k} -> C^{k + 1}"))
        print(path)
    print("betti:", cx.betti())


if __name__ == "__main__":
    main()
