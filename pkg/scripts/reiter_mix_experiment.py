"""Build the mixed measure pi = sum t_m theta_m on N^k and print the bound table.

    python3 scripts/reiter_mix_experiment.py --k 1 --M 3

On N^2 with M = 3 the construction exceeds the support cap at m = 3.
"""

import argparse
import sys
import time

from semiharmonic import semigroup as sg
from semiharmonic.errors import SupportOverflow
from semiharmonic.reiter import build_schedule, folner_oracle, reiter_mix


def main(argv=None) -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--M", type=int, default=3)
    ap.add_argument("--radius", type=int, default=1)
    ap.add_argument("--cap", type=int, default=sg.DEFAULT_CAP)
    args = ap.parse_args(argv)
    S = sg.CommutativeMonoid(args.k)
    schedule = build_schedule(args.M)
    print(f"t = {[str(x) for x in schedule.t]}  n = {list(schedule.n)}")
    t = time.perf_counter()
    try:
        _, rep = reiter_mix(S, folner_oracle(S, args.cap), schedule, args.radius, args.cap)
    except SupportOverflow as exc:
        print(f"support overflow at m={exc.stage}: {exc.size} > {exc.cap}")
        return 3
    for m, (tested, size, worst) in enumerate(rep.stages, 1):
        print(f"stage {m}: |test| = {tested}, |supp theta| = {size}, max dev = {float(worst):.4g}")
    print(f"{'m':>2} {'s':>10} {'n':>4} {'measured':>10} {'bound':>8}")
    for r in rep.rows:
        print(f"{r.m:>2} {str(r.s):>10} {r.n:>4} {float(r.measured):>10.5f} "
              f"{float(r.bound):>8.4f} {'ok' if r.passed else 'FAIL'}")
    print(f"{time.perf_counter() - t:.1f}s")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
