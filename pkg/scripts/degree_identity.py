"""Inner-window mean degree of hyperbolic Poisson-Delaunay samples against 6 + 3 / (pi lambda).

Compares the intensity-scaled window with a fixed margin of 2, which biases
the inner degrees at low intensity.
"""
import math

import numpy as np

from cpwalk.samplers import SampleWindow, expected_mean_degree, poisson_delaunay_hyp

from _common import finish, parser


def pooled(lam, window, n):
    tot, cnt = [], []
    for s in range(n):
        d = poisson_delaunay_hyp(lam, window, seed=s).inner_degrees
        tot.append(d.sum())
        cnt.append(len(d))
    tot, cnt = np.array(tot, float), np.array(cnt, float)
    est = tot.sum() / cnt.sum()
    return est, math.sqrt(np.sum((tot - est * cnt) ** 2)) / cnt.sum()


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--samples", type=int, default=60)
    p.add_argument("--lambdas", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    args = p.parse_args()
    rows = []
    for lam in args.lambdas:
        target = expected_mean_degree(lam)
        for name, window in (("scaled", SampleWindow.for_intensity(lam)), ("margin 2", SampleWindow(6.0, 2.0))):
            est, se = pooled(lam, window, args.samples)
            z = (est - target) / se
            print(f"lambda={lam:<4} {name:>9}: {est:.4f} +- {se:.4f}  target {target:.4f}  z={z:+.2f}")
            rows.append({"lambda": lam, "window": name, "R": window.R, "margin": window.margin,
                         "mean_degree": est, "se": se, "z": z})
    finish(args, rows)


if __name__ == "__main__":
    main()
