"""Circle packings of triangulated discs in the plane and in the Poincaré disc.

Radii are found by the uniform-neighbour fixed point: every interior radius
is replaced by the value that would make its angle sum exactly ``2 pi`` if
all of its neighbours had the common radius reproducing the current angle
sum.  Plane packings fix the Euclidean boundary radii; disc packings make the
boundary circles horocycles (infinite hyperbolic radius), which is the
packing of the triangulation with an extra vertex glued to the whole boundary
and sent to the unit circle.

Disc radii are handled internally as ``s = exp(-h)`` so that horocycles are
simply ``s = 0``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import LayoutInconsistent, NoConvergence, UnconvergedPacking
from .hypgeo import DISC, PLANE, MobiusMap, corner_angle, disc_circle_on_ray, mobius_to_halfplane
from .maps import PlanarMap, is_triangulation

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-11
    max_iters: int = 20000
    damping: float = 1.0
    schedule: str = "jacobi"  # or "gauss_seidel" (vertex id order)

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.schedule not in ("jacobi", "gauss_seidel"):
            raise ValueError(f"unknown schedule {self.schedule!r}")


@dataclass(frozen=True)
class PackingProblem:
    """A triangulated disc with its boundary condition.

    ``boundary_radii`` (plane only) is a scalar or a per-vertex array; entries
    for interior vertices are ignored.
    """

    map: PlanarMap
    geometry: str = DISC
    boundary_radii: float | Sequence[float] = 1.0

    def __post_init__(self):
        if self.geometry not in (PLANE, DISC):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.map.boundary_dart is None:
            raise ValueError("packing problem needs a marked boundary face")
        if not is_triangulation(self.map, ignore_boundary=True):
            raise ValueError("interior faces must all be triangles")
        walk = self.map.boundary_walk
        if len(set(walk)) != len(walk):
            raise ValueError("boundary cycle is not simple")

    @property
    def interior(self) -> np.ndarray:
        return ~self.map.boundary_mask()


@dataclass
class SolveReport:
    iters: int
    final_defect: float
    converged: bool
    defect_history: list = field(default_factory=list, repr=False)

    def as_dict(self):
        return {"iters": self.iters, "final_defect": self.final_defect, "converged": self.converged}


class _Corners:
    """Flattened corner table of the interior triangles."""

    def __init__(self, m: PlanarMap):
        tris = np.array(m.triangles(ignore_boundary=True), dtype=np.int64).reshape(-1, 3)
        self.tris = tris
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        self.v = np.concatenate([a, b, c])
        self.n1 = np.concatenate([b, c, a])
        self.n2 = np.concatenate([c, a, b])
        self.n_vertices = m.n_vertices
        self.faces_at = np.bincount(self.v, minlength=m.n_vertices)

    def angles(self, radii, geometry):
        return corner_angle(radii[self.v], radii[self.n1], radii[self.n2], geometry)

    def angle_sums(self, radii, geometry):
        return np.bincount(self.v, weights=self.angles(radii, geometry), minlength=self.n_vertices)


def angle_sums(m: PlanarMap, radii: np.ndarray, geometry: str) -> np.ndarray:
    """Total corner angle at every vertex over the interior triangles."""
    return _Corners(m).angle_sums(np.asarray(radii, dtype=float), geometry)


def angle_sum(m: PlanarMap, radii: np.ndarray, v: int, geometry: str) -> float:
    radii = np.asarray(radii, dtype=float)
    total = 0.0
    for f in m.triangles(ignore_boundary=True):
        if v in f:
            k = f.index(v)
            total += corner_angle(radii[v], radii[f[(k + 1) % 3]], radii[f[(k + 2) % 3]], geometry)
    return total


def _uniform_neighbour_update(r, theta, k, geometry):
    """Radius making the angle sum 2 pi under the uniform-neighbour model."""
    beta = np.sin(theta / (2 * k))
    delta = np.sin(np.pi / k)
    if geometry == PLANE:
        rhat = r * beta / (1 - beta)
        return rhat * (1 - delta) / delta
    s = np.exp(-r)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = (s - beta) / (s * (1 - beta * s))
    y = np.clip(np.nan_to_num(y, nan=0.0), 0.0, 1.0 - 1e-300)
    s_new = 2 * delta / ((1 - y) + np.sqrt((1 - y) ** 2 + 4 * delta * delta * y))
    return -np.log(s_new)


def solve_radii(problem: PackingProblem, config: SolverConfig = SolverConfig(),
                initial: np.ndarray | None = None, raise_on_failure: bool = True):
    """Radii (Euclidean in the plane, hyperbolic in the disc) and a report.

    Convergence is declared on the worst interior angle-sum defect.
    """
    m, geometry = problem.map, problem.geometry
    corners = _Corners(m)
    interior = problem.interior
    idx = np.nonzero(interior)[0]
    k = corners.faces_at[idx].astype(float)
    if initial is not None:
        r = np.array(initial, dtype=float)
    elif geometry == PLANE:
        r = np.ones(m.n_vertices)
    else:
        r = np.full(m.n_vertices, 1.0)
    if geometry == PLANE:
        br = np.broadcast_to(np.asarray(problem.boundary_radii, dtype=float), (m.n_vertices,))
        r[~interior] = br[~interior]
        if np.any(r <= 0):
            raise ValueError("plane radii must be positive")
    else:
        r[~interior] = np.inf
    history = []
    it = 0
    defect = 0.0
    w = config.damping
    while True:
        theta = corners.angle_sums(r, geometry)
        defect = float(np.max(np.abs(theta[idx] - TWO_PI))) if len(idx) else 0.0
        history.append(defect)
        if defect < config.tol or it >= config.max_iters:
            break
        if config.schedule == "jacobi":
            target = _uniform_neighbour_update(r[idx], theta[idx], k, geometry)
            r[idx] = _damp(r[idx], target, w, geometry)
        else:
            _gauss_seidel_sweep(r, idx, corners, geometry, w)
        it += 1
    report = SolveReport(it, defect, defect < config.tol, history)
    if not report.converged and raise_on_failure:
        raise NoConvergence(f"angle-sum defect {defect:.3e} after {it} iterations", defect, it)
    return r, report


def _damp(old, new, w, geometry):
    if w == 1.0:
        return new
    if geometry == PLANE:
        return np.exp((1 - w) * np.log(old) + w * np.log(new))
    return (1 - w) * old + w * new


def _gauss_seidel_sweep(r, idx, corners, geometry, w):
    # corner rows grouped by vertex, built once per call
    order = np.argsort(corners.v, kind="stable")
    starts = np.searchsorted(corners.v[order], np.arange(corners.n_vertices + 1))
    for v in idx:
        rows = order[starts[v]:starts[v + 1]]
        theta = float(np.sum(corner_angle(r[v], r[corners.n1[rows]], r[corners.n2[rows]], geometry)))
        new = _uniform_neighbour_update(r[v], theta, float(len(rows)), geometry)
        r[v] = _damp(r[v], new, w, geometry)


# -----------------------------------------------------------------------------
# Layout


@dataclass(frozen=True, eq=False)
class Packing:
    """Laid-out circles.

    ``centers``/``radii`` are Euclidean.  In the disc ``hyp_centers`` and
    ``hyp_radii`` give the hyperbolic parameters (``nan``/``inf`` for
    horocycles); in the plane they are ``nan``.
    """

    map: PlanarMap
    geometry: str
    centers: np.ndarray
    radii: np.ndarray
    hyp_centers: np.ndarray
    hyp_radii: np.ndarray
    normalization: tuple[int, int]
    tangency_residual: float
    report: SolveReport | None = None

    @property
    def n(self) -> int:
        return len(self.radii)

    def is_horocycle(self) -> np.ndarray:
        return np.isinf(self.hyp_radii)

    def corner_angles(self):
        """(triangles, angles) with angles[i, j] at corner j of triangle i."""
        corners = _Corners(self.map)
        rad = self.hyp_radii if self.geometry == DISC else self.radii
        ang = corners.angles(rad, self.geometry).reshape(3, -1).T
        return corners.tris, ang

    def pairwise_disjointness(self) -> float:
        """Smallest ``|z_u - z_v| - r_u - r_v`` over non-adjacent pairs (O(n^2))."""
        z, r = self.centers, self.radii
        gap = np.abs(z[:, None] - z[None, :]) - r[:, None] - r[None, :]
        adj = np.eye(self.n, dtype=bool)
        adj[self.map.tail, self.map.head] = True
        gap[adj] = np.inf
        return float(gap.min()) if self.n > 1 else np.inf


def tangency_residual(m: PlanarMap, centers, radii) -> float:
    ed = m.edge_darts()
    u, v = m.tail[ed], m.head[ed]
    if len(ed) == 0:
        return 0.0
    return float(np.max(np.abs(np.abs(centers[u] - centers[v]) - radii[u] - radii[v])))


def layout(problem: PackingProblem, radii: np.ndarray, root: int | None = None,
           axis_vertex: int | None = None, tol: float = 1e-11,
           report: SolveReport | None = None) -> Packing:
    """Place circles from converged radii.

    ``root`` goes to the origin and ``axis_vertex`` (a neighbour of the root,
    default its first neighbour) onto the positive real axis.  Placement is a
    breadth-first walk over the interior triangles.
    """
    m, geometry = problem.map, problem.geometry
    radii = np.asarray(radii, dtype=float)
    interior = problem.interior
    if root is None:
        root = int(np.nonzero(interior)[0][0]) if geometry == DISC else 0
    if geometry == DISC and not interior[root]:
        raise ValueError("disc normalization needs an interior root")
    if axis_vertex is None:
        axis_vertex = m.neighbors(root)[0]
    if axis_vertex not in m.neighbors(root):
        raise ValueError("axis vertex must be adjacent to the root")
    n = m.n_vertices
    placer = _DiscPlacer(radii) if geometry == DISC else _PlanePlacer(radii)
    placed = np.zeros(n, dtype=bool)
    placer.place_root(root)
    placed[root] = True
    placer.place_axis(root, axis_vertex)
    placed[axis_vertex] = True

    face_of = m.face_of_dart
    bface = m.boundary_face
    faces = m.face_darts
    d0 = next(d for d in range(m.offset[root], m.offset[root + 1]) if m.head[d] == axis_vertex
              and face_of[d] != bface)
    seen_face = np.zeros(len(faces), dtype=bool)
    queue = deque([(int(face_of[d0]), d0)])
    seen_face[face_of[d0]] = True
    while queue:
        f, d = queue.popleft()
        # rotate the face so that it starts with the known dart d = p -> q
        fd = faces[f]
        k = fd.index(d)
        p, q, w = (int(m.tail[fd[(k + j) % 3]]) for j in range(3))
        if not placed[w]:
            placer.place_third(p, q, w)
            placed[w] = True
        for e in fd:
            g = int(face_of[m.mate[e]])
            if g != bface and not seen_face[g]:
                seen_face[g] = True
                queue.append((g, int(m.mate[e])))
    if not placed.all():
        raise LayoutInconsistent("triangulation is not connected through interior faces")
    centers, eradii = placer.euclidean()
    resid = tangency_residual(m, centers, eradii)
    if resid > 100 * max(tol, 1e-12):
        raise LayoutInconsistent(f"tangency residual {resid:.3e} exceeds 100 x tol")
    if geometry == DISC:
        hc, hr = placer.hyperbolic()
    else:
        hc = np.full(n, np.nan + 0j)
        hr = np.full(n, np.nan)
    return Packing(m, geometry, centers, eradii, hc, hr, (root, axis_vertex), resid, report)


class _PlanePlacer:
    def __init__(self, radii):
        self.r = radii
        self.z = np.full(len(radii), np.nan + 0j)

    def place_root(self, v):
        self.z[v] = 0

    def place_axis(self, u, v):
        self.z[v] = self.z[u] + self.r[u] + self.r[v]

    def place_third(self, p, q, w):
        r = self.r
        a = corner_angle(r[p], r[q], r[w], PLANE)
        d = self.z[q] - self.z[p]
        self.z[w] = self.z[p] + (r[p] + r[w]) * d / abs(d) * complex(math.cos(a), math.sin(a))

    def euclidean(self):
        return self.z.copy(), self.r.copy()


class _DiscPlacer:
    """Places circles in the disc by moving a finite-radius pivot to the origin."""

    def __init__(self, hradii):
        self.h = hradii
        n = len(hradii)
        self.c = np.full(n, np.nan + 0j)  # Euclidean centres
        self.e = np.full(n, np.nan)  # Euclidean radii
        self.zh = np.full(n, np.nan + 0j)  # hyperbolic centres

    def place_root(self, v):
        self.c[v] = 0
        self.e[v] = math.tanh(self.h[v] / 2)
        self.zh[v] = 0

    def place_axis(self, u, v):
        self._place_from_pivot(u, 1.0 + 0j, v)

    def _place_from_pivot(self, p, direction, w, to_origin=None):
        hp, hw = self.h[p], self.h[w]
        inner = math.tanh(hp / 2)
        c, e = disc_circle_on_ray(direction, inner, hp, hw)
        if to_origin is None:
            to_origin = MobiusMap.to_origin(self.zh[p])
        back = to_origin.inverse()
        self.c[w], self.e[w] = back.image_circle(c, e)
        if math.isfinite(hw):
            self.zh[w] = back(math.tanh(hp / 2 + hw / 2) * direction)

    def place_third(self, p, q, w):
        h = self.h
        if math.isfinite(h[p]):
            T = MobiusMap.to_origin(self.zh[p])
            cq, _ = T.image_circle(self.c[q], self.e[q])
            a = corner_angle(h[p], h[q], h[w], DISC)
            self._place_from_pivot(p, cq / abs(cq) * complex(math.cos(a), math.sin(a)), w, T)
        elif math.isfinite(h[q]):
            T = MobiusMap.to_origin(self.zh[q])
            cp, _ = T.image_circle(self.c[p], self.e[p])
            a = corner_angle(h[q], h[w], h[p], DISC)
            self._place_from_pivot(q, cp / abs(cp) * complex(math.cos(a), -math.sin(a)), w, T)
        else:
            self._place_between_horocycles(p, q, w)

    def _place_between_horocycles(self, p, q, w):
        # send p's tangency point to infinity: p becomes the line Im z = H
        xi = self.c[p] / abs(self.c[p])
        phi = mobius_to_halfplane(xi)
        # a point of p's horocycle diametrically opposite its tangency point
        H = phi(self.c[p] - self.e[p] * xi).imag
        cq, _ = phi.image_circle(self.c[q], self.e[q])
        hw = self.h[w]
        rho = H / 2 if math.isinf(hw) else H * -math.expm1(-2 * hw) / 2
        cw = complex(cq.real + math.sqrt(2 * rho * H), H - rho)
        back = phi.inverse()
        self.c[w], self.e[w] = back.image_circle(cw, rho)
        if math.isfinite(hw):
            # hyperbolic centre sits at height sqrt(top * bottom) in the half-plane
            top, bot = H, H * math.exp(-2 * hw)
            self.zh[w] = back(complex(cw.real, math.sqrt(top * bot)))

    def euclidean(self):
        return self.c.copy(), self.e.copy()

    def hyperbolic(self):
        return self.zh.copy(), self.h.copy()


def pack(problem: PackingProblem, config: SolverConfig = SolverConfig(), root=None,
         axis_vertex=None) -> Packing:
    radii, report = solve_radii(problem, config)
    return layout(problem, radii, root, axis_vertex, tol=config.tol, report=report)


# -----------------------------------------------------------------------------
# Exhaustions and diagnostics


@dataclass
class ExhaustionReport:
    levels: list
    tracked: list  # host labels of the tracked vertices
    hyp_radii: list  # per level, radii of tracked vertices
    deltas: list  # max |change| of tracked radii between consecutive levels
    reports: list

    def as_dict(self):
        return {
            "levels": self.levels,
            "tracked": self.tracked,
            "deltas": self.deltas,
            "solver": [r.as_dict() for r in self.reports],
        }


def pack_exhaustion(balls: Sequence, config: SolverConfig = SolverConfig(), geometry: str = DISC,
                    root_label: int = 0, axis_label: int | None = None, track: Sequence[int] | None = None,
                    levels: Sequence[int] | None = None):
    """Pack an increasing sequence of triangulated discs with one normalization.

    Vertices are matched across levels through ``PlanarMap.labels``.  The
    tracked set defaults to the root and its neighbours in the first ball.
    Returns (packings, report); radii tracked are hyperbolic in the disc and
    Euclidean in the plane.
    """
    packings = []
    if not balls:
        raise ValueError("empty exhaustion")
    first = balls[0]
    lab0 = list(first.labels)
    r0 = lab0.index(root_label)
    if track is None:
        track = [root_label] + [first.labels[x] for x in first.neighbors(r0)]
    if axis_label is None:
        axis_label = first.labels[first.neighbors(r0)[0]]
    rows, reports = [], []
    for b in balls:
        labels = list(b.labels)
        prob = PackingProblem(b, geometry)
        radii, rep = solve_radii(prob, config)
        root = labels.index(root_label)
        axis = labels.index(axis_label)
        pk = layout(prob, radii, root, axis, tol=config.tol, report=rep)
        packings.append(pk)
        rad = pk.hyp_radii if geometry == DISC else pk.radii
        rows.append([float(rad[labels.index(t)]) for t in track])
        reports.append(rep)
    deltas = [float(np.max(np.abs(np.subtract(rows[i + 1], rows[i])))) for i in range(len(rows) - 1)]
    levels = list(levels) if levels is not None else list(range(len(balls)))
    return packings, ExhaustionReport(levels, list(track), rows, deltas, reports)


def ring_report(packing: Packing, vertices=None) -> float:
    """Empirical ring constant: max over edges u->v, v interior, of log(r_v/r_u)/deg(v).

    ``vertices`` restricts v to a subset, which keeps the measured set fixed
    along an exhaustion.
    """
    m = packing.map
    interior = ~m.boundary_mask()
    if vertices is not None:
        chosen = np.zeros(m.n_vertices, dtype=bool)
        chosen[np.asarray(list(vertices), dtype=np.int64)] = True
        interior &= chosen
    u, v = m.tail, m.head
    sel = interior[v]
    if not np.any(sel):
        return 0.0
    r = packing.radii
    deg = m.degrees()
    vals = np.log(r[v[sel]] / r[u[sel]]) / deg[v[sel]]
    return float(max(vals.max(), 0.0))


def check_converged(packing: Packing, tol: float = 1e-8):
    if packing.report is not None and not packing.report.converged:
        raise UnconvergedPacking("packing solve did not converge")
    rad = packing.hyp_radii if packing.geometry == DISC else packing.radii
    theta = angle_sums(packing.map, rad, packing.geometry)
    interior = ~packing.map.boundary_mask()
    if interior.any():
        defect = float(np.max(np.abs(theta[interior] - TWO_PI)))
        if defect > tol:
            raise UnconvergedPacking(f"angle-sum defect {defect:.3e}")
