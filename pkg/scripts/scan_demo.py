#!/usr/bin/env python3
"""Compare isotropic and directional porosity at A_1 points of a run schedule.

Levels 2..1+N share one direction v. Along v the largest hole inside a ball
of radius r collapses, while isotropic holes stay a fixed fraction of r.
"""

import argparse
import sys

from porousplane import porosity as por
from porousplane.construction import Window, build_up_to
from porousplane.directions import ExplicitSchedule
from porousplane.geom import Direction


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--run", type=int, default=2, choices=(1, 2, 3), help="run length N (depth is N+1)")
    ap.add_argument("--turns", type=float, default=0.16, help="run direction in turns")
    ap.add_argument("--points", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scales", default="2^-12,2^-13,2^-14")
    args = ap.parse_args(argv)

    from porousplane.cli import parse_real
    scales = [parse_real(s) for s in args.scales.split(",")]
    N = args.run
    window = Window((0.0003, 9 * 2.0**-12), 2.0**-10, 2.0**-9)
    ls = build_up_to(N + 1, window, ExplicitSchedule((0.0,) + (args.turns,) * N))
    v = Direction.from_turns(args.turns)
    print(f"depth {ls.depth}, segments per level {[len(lv) for lv in ls.levels]}")
    print(f"{'x':>24} {'scale':>10} {'iso':>10} {'along v':>10} {'across v':>10}")
    shown = 0
    for w in por.sample_outside(ls, 50 * args.points, args.seed):
        if shown == args.points:
            break
        try:
            z, s = por.find_A_s_point(ls, w, 1)
        except por.DepthExhausted:
            continue
        if s != 1 or por.r0_budget(ls, z) < max(scales):
            continue
        shown += 1
        iso = por.porosity_scan(ls, z, scales)
        par = por.directional_scan(ls, z, v, scales)
        perp = por.directional_scan(ls, z, v.perp, scales)
        for a, b, c in zip(iso, par, perp):
            print(f"({z.x:.8f}, {z.y:.8f}) {a.scale:10.3e} {a.ratio:10.3e} {b.ratio:10.3e} {c.ratio:10.3e}")
    return 0 if shown else 1


if __name__ == "__main__":
    sys.exit(main())
