"""Return-probability estimates of the spectral radius at increasing depth.

The 3-regular tree has the closed form 2 sqrt(2) / 3; the 7-regular window
should sit below the lattice window at every matched depth.
"""
import math

from cpwalk.analysis import spectral_radius_estimate
from cpwalk.samplers import regular_triangulation
from cpwalk.walker import WeightedGraphView

from _common import finish, parser
from _trees import regular_tree


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--depths", type=int, nargs="+", default=[4, 6, 8, 10])
    args = p.parse_args()
    rho = 2 * math.sqrt(2) / 3
    rows = []
    print(f"{'depth':>5} {'tree':>8} {'7-reg':>8} {'lattice':>8}   (tree limit {rho:.5f})")
    for depth in args.depths:
        tree = spectral_radius_estimate(regular_tree(3, depth + 4), 0, depth + 4).estimate
        seven = spectral_radius_estimate(WeightedGraphView.from_map(regular_triangulation(7, depth)), 0, depth)
        flat = spectral_radius_estimate(WeightedGraphView.from_map(regular_triangulation(6, depth)), 0, depth)
        print(f"{depth:>5} {tree:8.5f} {seven.estimate:8.5f} {flat.estimate:8.5f}")
        rows.append({"depth": depth, "tree": tree, "seven": seven.as_dict(), "lattice": flat.as_dict()})
    finish(args, {"tree_limit": rho, "rows": rows})


if __name__ == "__main__":
    main()
