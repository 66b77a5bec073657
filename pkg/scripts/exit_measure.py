"""Exit-angle histograms of walks on the 7-regular tiling, with rotation-symmetry z-scores."""
import numpy as np

from cpwalk.analysis import exit_angles, exit_histogram, rotation_symmetry
from cpwalk.tiling import RegularTiling

from _common import finish, parser


def main():
    p = parser(__doc__)
    p.add_argument("--walks", type=int, default=1000)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--max-level", type=int, default=8)
    args = p.parse_args()
    tiling = RegularTiling(7)
    angles = exit_angles(tiling, tiling.walks(args.walks, 10_000, args.seed, eps=args.eps), args.eps)
    print(f"converged {np.isfinite(angles).sum()} / {args.walks}")
    levels = {}
    for level in range(3, args.max_level + 1):
        h = exit_histogram(angles, level)
        empty = int(np.sum(h.counts == 0))
        levels[level] = h.as_dict()
        print(f"level {level}: max arc mass {h.max_arc_mass:.4f}  empty arcs {empty}")
    z = rotation_symmetry(angles, 7, level=3)
    print("rotation z-scores:", " ".join(f"{x:+.2f}" for x in z))
    finish(args, {"levels": levels, "rotation_z": z.tolist()})


if __name__ == "__main__":
    main()
