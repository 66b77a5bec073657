"""Shared builders and hypothesis strategies for the test suite."""
from __future__ import annotations

import math

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
import scipy.sparse as sp
from scipy.spatial import Delaunay

from cpwalk.maps import PlanarMap, build_map, from_triangles
from cpwalk.walker import WeightedGraphView

settings.register_profile(
    "cpwalk",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("cpwalk")


# -----------------------------------------------------------------------------
# Small maps


def wheel(k: int) -> PlanarMap:
    """Hub 0 with rim 1..k; the rim face is the boundary."""
    rot = [tuple(range(1, k + 1))]
    for i in range(1, k + 1):
        prev = k if i == 1 else i - 1
        nxt = 1 if i == k else i + 1
        rot.append((nxt, 0, prev))
    return build_map(rot, boundary=list(range(k, 0, -1)))


def tetrahedron() -> PlanarMap:
    return build_map([(1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1)])


def cycle(k: int) -> PlanarMap:
    return build_map([((i + 1) % k, (i - 1) % k) for i in range(k)])


def path3() -> PlanarMap:
    return build_map([(1,), (0, 2), (1,)])


def triangle() -> PlanarMap:
    return build_map([(1, 2), (2, 0), (0, 1)])


# -----------------------------------------------------------------------------
# Random maps from straight-line drawings


def _ccw_rotations(pts: np.ndarray, edges) -> list[list[int]]:
    nbrs: list[list[int]] = [[] for _ in range(len(pts))]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    rot = []
    for u, ns in enumerate(nbrs):
        ang = [math.atan2(pts[v, 1] - pts[u, 1], pts[v, 0] - pts[u, 0]) for v in ns]
        rot.append([v for _, v in sorted(zip(ang, ns))])
    return rot


def delaunay_edges(pts: np.ndarray) -> list[tuple[int, int]]:
    tri = Delaunay(pts)
    es = set()
    for a, b, c in tri.simplices:
        for x, y in ((a, b), (b, c), (c, a)):
            es.add((min(x, y), max(x, y)))
    return sorted((int(x), int(y)) for x, y in es)


def random_planar_map(seed: int, n: int, keep: float = 0.6) -> PlanarMap:
    """Connected subgraph of a random Delaunay drawing, rotations from angles."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    es = delaunay_edges(pts)
    # random spanning tree keeps the map connected
    order = rng.permutation(len(es))
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    for k in order:
        u, v = es[k]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            chosen.append((u, v))
        elif rng.random() < keep:
            chosen.append((u, v))
    return build_map(_ccw_rotations(pts, chosen))


def random_triangulated_disc(seed: int, n: int) -> PlanarMap:
    """Delaunay triangulation of random points, convex hull as boundary."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    simp = Delaunay(pts).simplices
    a, b, c = pts[simp[:, 0]], pts[simp[:, 1]], pts[simp[:, 2]]
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    simp = np.where((cross < 0)[:, None], simp[:, [0, 2, 1]], simp)
    return from_triangles(simp.tolist(), n_vertices=n)


# -----------------------------------------------------------------------------
# Strategies


seeds = st.integers(min_value=0, max_value=2**31 - 1)


@st.composite
def planar_maps(draw, min_n: int = 4, max_n: int = 24):
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    keep = draw(st.floats(min_value=0.0, max_value=1.0))
    return random_planar_map(draw(seeds), n, keep)


@st.composite
def triangulated_discs(draw, min_n: int = 5, max_n: int = 30):
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    return random_triangulated_disc(draw(seeds), n)


@st.composite
def disc_points(draw, max_abs: float = 0.95):
    r = draw(st.floats(min_value=0.0, max_value=max_abs))
    t = draw(st.floats(min_value=0.0, max_value=2 * math.pi))
    return complex(r * math.cos(t), r * math.sin(t))


@st.composite
def disc_automorphisms(draw):
    """z -> e^{i t} (z - p) / (1 - conj(p) z) as a ``MobiusMap``."""
    from cpwalk.hypgeo import MobiusMap

    p = draw(disc_points(0.9))
    t = draw(st.floats(min_value=0.0, max_value=2 * math.pi))
    return MobiusMap.rotation(t) @ MobiusMap.to_origin(p)


def regular_tree(d, depth):
    """Adjacency of the d-regular tree truncated at ``depth`` (root 0)."""
    rows, cols = [], []
    frontier, nxt = [0], 1
    for level in range(depth):
        new = []
        for v in frontier:
            for _ in range(d if v == 0 else d - 1):
                rows += [v, nxt]
                cols += [nxt, v]
                new.append(nxt)
                nxt += 1
        frontier = new
    return WeightedGraphView(sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(nxt, nxt)))
