"""Sweep of the BLS threshold delta on the 7-regular and triangular-lattice windows.

Prints the surviving interior fraction per seed; a useful delta keeps the
7-regular window open and closes the lattice window.
"""
import numpy as np

from cpwalk.analysis import bls_refinement
from cpwalk.samplers import regular_triangulation

from _common import finish, parser


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--deltas", type=float, nargs="+", default=[0.1, 0.5, 1, 2, 3, 4, 5, 6])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--rounds", type=int, default=20)
    args = p.parse_args()
    seven, flat = regular_triangulation(7, 7), regular_triangulation(6, 40)
    rows = []
    print(f"{'delta':>6} {'7-regular kept':>28} {'lattice kept':>28} {'violations':>10}")
    for delta in args.deltas:
        a = [bls_refinement(seven, 7, delta, args.rounds, seed=s) for s in range(args.seeds)]
        b = [bls_refinement(flat, 6, delta, args.rounds, seed=s) for s in range(args.seeds)]
        fa = [r.surviving_fraction for r in a]
        fb = [r.surviving_fraction for r in b]
        bad = sum(len(r.violations()) for r in a + b)
        print(f"{delta:6.2f} {str(np.round(fa, 3).tolist()):>28} {str(np.round(fb, 3).tolist()):>28} {bad:>10}")
        rows.append({"delta": delta, "seven": fa, "lattice": fb, "violations": bad})
    finish(args, rows)


if __name__ == "__main__":
    main()
