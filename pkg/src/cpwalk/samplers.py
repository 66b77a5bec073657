"""Triangulations to experiment on.

``regular_triangulation`` grows the degree-d triangulation ring by ring, so
vertex ids of a ball with fewer generations are a prefix of the ids of a
larger one.  ``poisson_delaunay_hyp`` samples the hyperbolic Poisson-Delaunay
triangulation in a hyperbolic ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .errors import TooFewPoints
from .maps import PlanarMap, RootedMap, from_triangles
from .rng import make_rng


def regular_triangulation(d: int, generations: int) -> PlanarMap:
    """Ball of the d-regular triangulation (d = 6 is the triangular lattice).

    Ring ``k`` holds the vertices at graph distance ``k`` from vertex 0,
    listed counterclockwise; every vertex of rings ``< generations`` has
    degree exactly ``d``.  The outer ring is the marked boundary.
    """
    if d < 6:
        raise ValueError("d must be at least 6")
    if generations < 1:
        raise ValueError("generations must be at least 1")
    tris = []
    deg = [d]
    ring = list(range(1, d + 1))
    deg += [3] * d
    for i in range(d):
        tris.append((0, ring[i], ring[(i + 1) % d]))
    nxt_id = d + 1
    for _ in range(generations - 1):
        m = len(ring)
        children: list[list[int]] = [[] for _ in range(m)]
        new_ring = []
        # the child shared by v_{m-1} and v_0 gets the last id of the ring
        n_new = sum(d - deg[v] - 1 for v in ring)
        shared_last = nxt_id + n_new - 1
        for i, v in enumerate(ring):
            n_i = d - deg[v]
            first = shared_last if i == 0 else children[i - 1][-1]
            kids = [first]
            for _ in range(n_i - 2):
                kids.append(nxt_id)
                new_ring.append(nxt_id)
                deg.append(3)
                nxt_id += 1
            if i == m - 1:
                shared = shared_last
            else:
                shared = nxt_id
                nxt_id += 1
                deg.append(4)
            if i < m - 1:
                new_ring.append(shared)
            kids.append(shared)
            children[i] = kids
            deg[v] = d
            for a, b in zip(kids, kids[1:]):
                tris.append((v, a, b))
            tris.append((v, shared, ring[(i + 1) % m]))
        deg.append(4)  # shared_last
        new_ring.append(shared_last)
        nxt_id += 1
        assert nxt_id == shared_last + 1
        ring = new_ring
    return from_triangles(tris, n_vertices=nxt_id)


# -----------------------------------------------------------------------------
# Poisson-Delaunay


@dataclass(frozen=True)
class SampleWindow:
    R: float = 6.0
    margin: float = 2.0

    def __post_init__(self):
        if not 0 < self.margin < self.R:
            raise ValueError("need 0 < margin < R")

    @property
    def inner(self) -> float:
        return self.R - self.margin

    @classmethod
    def for_intensity(cls, lam: float, inner: float = 4.0, tail: float = 8.0) -> "SampleWindow":
        """Window whose margin makes unreliable faces at inner points rare.

        A face at an inner point can only be wrong if its circumdisc, of
        hyperbolic radius at least margin/2, is empty; the margin is chosen
        so that such a disc has expected ``tail`` points.
        """
        margin = 2 * math.acosh(1 + tail / (2 * math.pi * lam))
        return cls(inner + margin, margin)


@dataclass(frozen=True, eq=False)
class EmbeddedSample:
    map: RootedMap
    coords: np.ndarray  # disc coordinates of map vertices
    intensity: float
    window: SampleWindow
    seed: int
    # statistics over the inner window, computed on the full sample
    inner_degrees: np.ndarray
    n_points: int
    unreliable_faces: int


def hyperbolic_ball_area(R: float) -> float:
    return 2 * math.pi * (math.cosh(R) - 1)


def sample_hyperbolic_ball(lam: float, R: float, rng: np.random.Generator) -> np.ndarray:
    """Poisson process of intensity ``lam`` (per unit hyperbolic area) in B_R, disc coordinates."""
    n = rng.poisson(lam * hyperbolic_ball_area(R))
    u = rng.random(n)
    # radial CDF (cosh r - 1)/(cosh R - 1), inverted
    r = np.arccosh(1 + u * (math.cosh(R) - 1))
    theta = rng.random(n) * 2 * np.pi
    return np.tanh(r / 2) * np.exp(1j * theta)


def _circumcircles(pts: np.ndarray, tris: np.ndarray):
    a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
    ax, ay, bx, by, cx, cy = a.real, a.imag, b.real, b.imag, c.real, c.imag
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    center = ux + 1j * uy
    return center, np.abs(a - center)


def delaunay_disc(pts: np.ndarray) -> np.ndarray:
    """Euclidean Delaunay triangles (ccw) of disc points.

    Cocircular ties are broken by Qhull's joggle-free triangulation with a
    deterministic index order (inputs are never reordered).
    """
    xy = np.column_stack([pts.real, pts.imag])
    tri = Delaunay(xy, qhull_options="Qbb Qc Qz Q12")
    simp = tri.simplices.astype(np.int64)
    a, b, c = pts[simp[:, 0]], pts[simp[:, 1]], pts[simp[:, 2]]
    cross = ((b - a).conjugate() * (c - a)).imag
    flip = cross < 0
    simp[flip] = simp[flip][:, [0, 2, 1]]
    return simp


def poisson_delaunay_hyp(lam: float, window: SampleWindow = SampleWindow(), seed: int = 0) -> EmbeddedSample:
    """Poisson-Delaunay triangulation of the hyperbolic plane, rooted at 0.

    Faces whose circumdisc leaves the image of B_R are unreliable (a point
    outside the window could fall inside them).  The returned map is the
    reliable triangulated disc around the root spanned by vertices within
    hyperbolic distance ``R - margin``; ``inner_degrees`` are full-sample
    degrees of the inner-window Poisson points (root excluded).
    """
    if lam <= 0:
        raise ValueError("intensity must be positive")
    rng = make_rng(seed, "poisson_delaunay")
    pts = np.concatenate([[0j], sample_hyperbolic_ball(lam, window.R, rng)])
    if len(pts) < 3:
        raise TooFewPoints(f"{len(pts)} points cannot form a triangle")
    tris = delaunay_disc(pts)
    cc, cr = _circumcircles(pts, tris)
    rho_R = math.tanh(window.R / 2)
    reliable = np.abs(cc) + cr < rho_R
    rho_in = math.tanh(window.inner / 2)
    inside = np.abs(pts) <= rho_in

    # degrees over the whole sample, for the inner-window statistics
    edges = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    edges = np.unique(np.sort(edges, axis=1), axis=0)
    deg = np.bincount(edges.ravel(), minlength=len(pts))
    inner_idx = np.nonzero(inside)[0]
    inner_degrees = deg[inner_idx[inner_idx != 0]]

    keep = reliable & inside[tris].all(axis=1)
    face_set = _disc_region(tris, keep, root=0)
    sub = tris[face_set]
    used = np.unique(sub)
    new_id = np.full(len(pts), -1, dtype=np.int64)
    new_id[used] = np.arange(len(used))
    pm = from_triangles(new_id[sub], n_vertices=len(used))
    rooted = RootedMap(pm, int(new_id[0]))
    return EmbeddedSample(rooted, pts[used], lam, window, seed, inner_degrees, len(pts),
                          int(np.sum(~reliable)))


def _disc_region(tris: np.ndarray, keep: np.ndarray, root: int) -> np.ndarray:
    """Face mask of a triangulated disc containing ``root`` inside the kept faces.

    Takes the edge-connected component of kept faces around the root, fills
    holes, then peels faces at pinch vertices until the union is a disc.
    """
    nt = len(tris)
    edge_faces: dict[tuple[int, int], list[int]] = {}
    for f, t in enumerate(tris):
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            edge_faces.setdefault((min(a, b), max(a, b)), []).append(f)
    nbr = [[] for _ in range(nt)]
    for fs in edge_faces.values():
        if len(fs) == 2:
            nbr[fs[0]].append(fs[1])
            nbr[fs[1]].append(fs[0])

    def component(mask, seeds):
        out = np.zeros(nt, dtype=bool)
        stack = [s for s in seeds if mask[s]]
        for s in stack:
            out[s] = True
        while stack:
            f = stack.pop()
            for g in nbr[f]:
                if mask[g] and not out[g]:
                    out[g] = True
                    stack.append(g)
        return out

    root_faces = [f for f in range(nt) if root in tris[f]]
    region = keep.copy()
    for _ in range(nt):
        region = component(region, root_faces)
        if not region.any():
            raise TooFewPoints("no reliable face around the root")
        # holes: complementary components not touching the convex hull
        outside = ~region
        hull_faces = [f for f in range(nt) if len(nbr[f]) < 3]
        exterior = component(outside, hull_faces)
        region |= outside & ~exterior
        pinches = _pinch_faces(tris, region)
        if not pinches:
            return region
        region[pinches] = False
    raise RuntimeError("could not extract a disc region")


def _pinch_faces(tris, region):
    """Faces in the smaller fans at vertices where the region is pinched."""
    fans: dict[int, dict[int, int]] = {}
    for f in np.nonzero(region)[0]:
        t = tris[f]
        for j in range(3):
            v, a, b = t[j], t[(j + 1) % 3], t[(j + 2) % 3]
            fans.setdefault(int(v), {})[int(a)] = (int(b), int(f))
    out = []
    for v, succ in fans.items():
        preds = {b for b, _ in succ.values()}
        starts = [a for a in succ if a not in preds]
        if len(starts) <= 1:
            continue
        runs = []
        for s in starts:
            run, a = [], s
            while a in succ:
                b, f = succ[a]
                run.append(f)
                a = b
            runs.append(run)
        runs.sort(key=len, reverse=True)
        for run in runs[1:]:
            out.extend(run)
    return sorted(set(out))


def expected_mean_degree(lam: float) -> float:
    """6 + E[Area]/pi with E[Area] = 3/lam for the Poisson-Delaunay drawing."""
    return 6 + 3 / (math.pi * lam)
