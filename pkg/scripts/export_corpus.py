#!/usr/bin/env python3
"""Write the built-in corpus as problem files usable with ``rigidcoh --problem``."""

from __future__ import annotations

import argparse
from pathlib import Path

from rigidcoh.corpus import CORPUS


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="problems")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in CORPUS.items():
        (out / f"{name}.txt").write_text(text)
        print(out / f"{name}.txt")


if __name__ == "__main__":
    main()
