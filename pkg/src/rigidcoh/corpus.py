"""Built-in regression problems, stored as problem-file text."""

from __future__ import annotations

AFFINE_LINE = """\
label affine line
p = 5
vars x
relations none
oracle on
"""

MULTIPLICATIVE_GROUP = """\
label multiplicative group
p = 7
vars x, y
relations x*y - 1
oracle on
D 12, 16
nMax 4, 5
mMax 2, 3
"""

ELLIPTIC = """\
label affine elliptic curve
p = 7
vars x, y
relations y^2 - x^3 - x
oracle on
"""

NODE = """\
label nodal cubic
p = 5
vars x, y
relations y^2 - x^2*(x + 1)
# the same ring with a redundant generator u = x + y
alt_vars x, y, u
alt_relations y^2 - x^2*(x + 1), u - x - y
section u -> x + y
D 6, 8
nMax 3
mMax 1, 2
"""

CORPUS = {
    "affine_line": AFFINE_LINE,
    "gm": MULTIPLICATIVE_GROUP,
    "elliptic": ELLIPTIC,
    "node": NODE,
}

# stable Betti numbers every corpus problem must reproduce
EXPECTED_BETTI = {
    "affine_line": [1, 0],
    "gm": [1, 1, 0],
    "elliptic": [1, 2, 0],
    "node": [1, 1, 0],
}
