"""Empirical ring constants along exhaustions, measured on a fixed vertex set.

The set is the interior of the smallest ball; later levels only refine the
radii of those vertices.
"""
import numpy as np

from cpwalk.maps import ball
from cpwalk.packer import pack_exhaustion, ring_report
from cpwalk.samplers import SampleWindow, poisson_delaunay_hyp, regular_triangulation

from _common import finish, parser


def fixed_set(balls, root_label):
    packings, _ = pack_exhaustion(balls, root_label=root_label)
    first = balls[0]
    tracked = [first.labels[v] for v in first.interior_vertices()]
    out = []
    for p in packings:
        labels = list(p.map.labels)
        out.append(ring_report(p, [labels.index(t) for t in tracked]))
    return out


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--lam", type=float, default=1.0)
    args = p.parse_args()
    results = {}
    host = regular_triangulation(7, 8)
    results["seven"] = fixed_set([ball(host, 0, k).map for k in range(3, 9)], 0)
    print("7-regular  ", np.round(results["seven"], 5).tolist())
    for seed in range(args.seeds):
        s = poisson_delaunay_hyp(args.lam, SampleWindow(9.0, 2.0), seed=seed)
        m, r = s.map.map, s.map.root
        c = fixed_set([ball(m, r, k, fill_holes=True).map for k in range(3, 10)], r)
        results[f"pd_{seed}"] = c
        print(f"PD seed {seed}  ", np.round(c, 5).tolist())
    finish(args, results)


if __name__ == "__main__":
    main()
