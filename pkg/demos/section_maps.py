"""Rigorous Poincare maps near the Lyapunov orbits.

Encloses the half-return of points next to the two Lyapunov orbits, checks
that the Jacobi constant is kept, and prints a derivative enclosure.
"""

from rigor3bp import Branch, Interval, MapKind, SystemParams, jacobi
from rigor3bp.data import TEXT
from rigor3bp.interval import stack
from rigor3bp.lohner import StepParams
from rigor3bp.model import SectionPoint
from rigor3bp.poincare import poincare_c0, poincare_c1


def main():
    p = SystemParams()
    sp = StepParams(12, 0.05)
    for label, key, kind, branch in (("L1 orbit", "x1", "half+", Branch.PLUS),
                                     ("L2 orbit", "x2", "half-", Branch.MINUS)):
        x = float(TEXT[key])
        q = SectionPoint(Interval(x - 1e-7, x + 1e-7), Interval(-1e-9, 1e-9), branch)
        r = poincare_c0(p, MapKind(kind), q, sp)
        print(f"{label}: x in {r.image[0]}  xdot in {r.image[1]}  time in {r.return_time}")
        # ydot comes from the integration, not from the energy relation
        full = stack([r.image[0], Interval(0.0), r.image[1], r.ydot])
        print(f"{'':9s} Jacobi constant of the image in {jacobi(p, full)}")
    d = poincare_c1(p, MapKind("full+"), SectionPoint(Interval(float(TEXT['x1'])), Interval(0.0), Branch.PLUS), sp)
    print("derivative of the full return map at the L1 orbit point:")
    print(d.deriv)


if __name__ == "__main__":
    main()
