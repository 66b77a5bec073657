"""Convergence of the root ring's hyperbolic radii along an exhaustion of the 7-regular triangulation.

The tracked radii approach r* = (1/2) acosh(cos(2 pi/7) / (1 - cos(2 pi/7)));
the error shrinks by a roughly constant factor per level.
"""
import math
import time

from cpwalk.maps import ball
from cpwalk.packer import pack_exhaustion
from cpwalk.samplers import regular_triangulation

from _common import finish, parser


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--degree", type=int, default=7)
    p.add_argument("--kmin", type=int, default=3)
    p.add_argument("--kmax", type=int, default=10)
    args = p.parse_args()
    c = math.cos(2 * math.pi / args.degree)
    r_star = 0.5 * math.acosh(c / (1 - c))
    host = regular_triangulation(args.degree, args.kmax)
    levels = list(range(args.kmin, args.kmax + 1))
    t0 = time.perf_counter()
    _, rep = pack_exhaustion([ball(host, 0, k).map for k in levels], levels=levels)
    rows = []
    print(f"r* = {r_star:.12f}")
    print(f"{'k':>3} {'root err':>10} {'max err':>10} {'ratio':>7}")
    prev = None
    for k, radii in zip(levels, rep.hyp_radii):
        root_err = abs(radii[0] - r_star)
        max_err = max(abs(r - r_star) for r in radii)
        ratio = prev / max_err if prev else float("nan")
        print(f"{k:>3} {root_err:10.3e} {max_err:10.3e} {ratio:7.3f}")
        rows.append({"k": k, "root_error": root_err, "max_error": max_err})
        prev = max_err
    print(f"time {time.perf_counter() - t0:.1f}s")
    finish(args, {"r_star": r_star, "levels": rows})


if __name__ == "__main__":
    main()
