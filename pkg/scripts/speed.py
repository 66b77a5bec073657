"""Hyperbolic speed against radius decay for walks on the 7-regular tiling and the triangular lattice."""
import time

from cpwalk.analysis import estimate_speed
from cpwalk.hypgeo import PLANE
from cpwalk.packer import PackingProblem, pack
from cpwalk.samplers import regular_triangulation
from cpwalk.tiling import RegularTiling
from cpwalk.walker import WeightedGraphView, run_walks

from _common import finish, parser


def main():
    p = parser(__doc__)
    p.add_argument("--walks", type=int, default=100)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=float, default=0.4)
    args = p.parse_args()
    results = {}
    for d in (7, 8, 9):
        t0 = time.perf_counter()
        tiling = RegularTiling(d)
        est = estimate_speed(tiling, tiling.walks(args.walks, args.steps, args.seed), burn_in=args.burn_in)
        results[f"tiling_{d}"] = est.as_dict()
        print(f"d={d}: speed {est.speed_hyp:.4f} +- {est.speed_se:.4f}  decay {est.decay_rate:.4f} "
              f"+- {est.decay_se:.4f}  agree={est.agree()}  ({time.perf_counter() - t0:.1f}s)")
    lattice = pack(PackingProblem(regular_triangulation(6, 30), PLANE), root=0)
    view = WeightedGraphView.from_map(lattice.map)
    est = estimate_speed(lattice, run_walks(view, [0] * args.walks, args.steps, args.seed),
                         burn_in=args.burn_in)
    results["lattice"] = est.as_dict()
    print(f"lattice: decay {est.decay_rate}  reliable={est.reliable}")
    finish(args, results)


if __name__ == "__main__":
    main()
