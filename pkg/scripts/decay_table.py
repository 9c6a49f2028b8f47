"""Print ||delta_s pi^n - pi^n|| for a few standard walks.

    python3 scripts/decay_table.py [N]
"""

import sys
from fractions import Fraction

from semiharmonic import semigroup as sg
from semiharmonic.measure import Measure, decay_profile


def walks():
    N1 = sg.CommutativeMonoid(1)
    yield "N, (d0+d1)/2, s=1", N1, Measure({(0,): Fraction(1, 2), (1,): Fraction(1, 2)}), (1,)
    Z6 = sg.cyclic_group(6)
    yield "Z/6, (d0+d1)/2, s=1", Z6, Measure({0: Fraction(1, 2), 1: Fraction(1, 2)}), 1
    Z2 = sg.cyclic_group(2)
    # periodic: Liouville but no decay
    yield "Z/2, d1, s=1", Z2, Measure({1: Fraction(1)}), 1


def main(N: int = 12):
    for label, S, pi, s in walks():
        prof = decay_profile(S, pi, s, N)
        vals = " ".join(f"{float(prof.values[n]):.4f}" for n in range(1, N + 1))
        print(f"{label:24s} {vals}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 12)
