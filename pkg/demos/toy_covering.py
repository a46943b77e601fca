"""Covering relations for affine toy maps on the unit square.

Runs the direct and the backward checker on a few linear maps and prints
which conditions hold.  No integration is involved, so this finishes at once.
"""

import numpy as np

from rigor3bp import (
    Branch,
    CheckParams,
    HSet,
    Interval,
    LinearMap,
    Stage,
    check_covering_backward,
    check_covering_direct,
)
from rigor3bp.interval import stack

UNIT = HSet(stack([Interval(0.0), Interval(0.0)]), [1.0, 0.0], [0.0, 1.0], Branch.PLUS, "N")
DIRECT = CheckParams(Stage(1, 5, 0.1), Stage(2, 5, 0.1))
BACKWARD = CheckParams(Stage(1, 5, 0.1), Stage(2, 5, -0.1), mono=Stage(3, 5, 0.1), center=Stage(1, 5, 0.1))

MAPS = {
    "expanding saddle": (np.diag([3.0, 1 / 3]), (0.0, 0.0)),
    "orientation flip": (np.diag([-3.0, 1 / 3]), (0.0, 0.0)),
    "lifted image": (np.diag([3.0, 1 / 3]), (0.0, 0.8)),
    "too weak": (np.diag([0.5, 1 / 3]), (0.0, 0.0)),
}


def main():
    for name, (M, b) in MAPS.items():
        f = LinearMap(M, b)
        print(f"{name:18s} direct   {check_covering_direct(f, UNIT, UNIT, DIRECT)}")
        print(f"{'':18s} backward {check_covering_backward(f, UNIT, UNIT, BACKWARD)}")


if __name__ == "__main__":
    main()
