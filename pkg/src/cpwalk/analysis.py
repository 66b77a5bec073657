"""Estimators and checks on packed maps and walk trajectories.

Finite packings (``packer.Packing`` with ``walker.Trajectory``) and the exact
regular tiling (``tiling.RegularTiling`` with ``tiling.TilingPath``) are both
accepted wherever a walk has to be read geometrically; both are reduced to a
``PathGeometry`` record first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import EmptyInput, TrajectoryExitsWindow
from .hypgeo import DISC, PLANE, corner_angle, dist_hyp_many
from .maps import Percolation, PlanarMap
from .packer import Packing, check_converged, ring_report
from .rng import make_rng, stream_key
from .tiling import RegularTiling, TilingPath
from .walker import Trajectory, WeightedGraphView, run_walks

TWO_PI = 2 * math.pi


# -----------------------------------------------------------------------------
# Path geometry


@dataclass(frozen=True, eq=False)
class PathGeometry:
    """Per-step geometric quantities along one walk (index n = 0..N)."""

    dist_from_start: np.ndarray  # d_hyp(z_h(X_0), z_h(X_n)); nan in the plane
    neg_log_r: np.ndarray  # -log r(X_n), Euclidean radius
    degree: np.ndarray
    log_gap_h: np.ndarray  # log(1 - |z_h(X_n)|)
    log_gap: np.ndarray  # log(1 - |z(X_n)|)
    angle: np.ndarray  # arg z(X_n) in [0, 2 pi)

    def __len__(self):
        return len(self.neg_log_r)


def boundary_distance(m: PlanarMap) -> np.ndarray:
    """Hop distance of each vertex to the marked boundary cycle."""
    bmask = m.boundary_mask()
    if not bmask.any():
        return np.full(m.n_vertices, np.iinfo(np.int64).max)
    G = sp.csr_matrix((np.ones(m.n_darts), (m.tail, m.head)), shape=(m.n_vertices,) * 2)
    dist = np.full(m.n_vertices, -1, dtype=np.int64)
    frontier = np.nonzero(bmask)[0]
    dist[frontier] = 0
    k = 0
    while len(frontier):
        k += 1
        nxt = np.unique(G[frontier].indices)
        nxt = nxt[dist[nxt] < 0]
        dist[nxt] = k
        frontier = nxt
    dist[dist < 0] = np.iinfo(np.int64).max
    return dist


def collar_mask(m: PlanarMap, width: int = 2) -> np.ndarray:
    """Vertices within ``width`` hops of the boundary (boundary included)."""
    return boundary_distance(m) < width


def path_geometry(packing, traj) -> PathGeometry:
    if isinstance(traj, TilingPath):
        deg = np.full(len(traj), traj.degree)
        return PathGeometry(traj.dist_from_start, traj.neg_log_r, deg, traj.log_gap_h,
                            traj.log_gap, traj.angle)
    v = np.asarray(traj.vertices)
    deg = packing.map.degrees()[v]
    r = packing.radii[v]
    if packing.geometry == PLANE:
        nan = np.full(len(v), np.nan)
        return PathGeometry(nan, -np.log(r), deg, nan, nan, nan)
    if np.any(packing.is_horocycle()[v]):
        raise TrajectoryExitsWindow("trajectory visits a boundary horocycle")
    zh = packing.hyp_centers[v]
    z = packing.centers[v]
    return PathGeometry(dist_hyp_many(zh[0], zh), -np.log(r), deg, np.log1p(-np.abs(zh)),
                        np.log1p(-np.abs(z)), np.mod(np.angle(z), TWO_PI))


# -----------------------------------------------------------------------------
# Speed and decay rate


def _slope(y: np.ndarray, x: np.ndarray) -> float:
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


@dataclass
class SpeedEstimate:
    speed_hyp: float  # slope of d_hyp(z_h(X_0), z_h(X_n)) in n
    decay_rate: float  # slope of -log r(X_n) in n
    speed_se: float
    decay_se: float
    n_range: tuple[int, int]
    n_trajectories: int
    reliable: bool = True
    speed_slopes: np.ndarray = field(default=None, repr=False)
    decay_slopes: np.ndarray = field(default=None, repr=False)

    @property
    def combined_se(self) -> float:
        return math.hypot(self.speed_se, self.decay_se)

    def agree(self, n_sigma: float = 3.0) -> bool:
        return abs(self.speed_hyp - self.decay_rate) < n_sigma * self.combined_se

    def as_dict(self):
        return {
            "speed_hyp": self.speed_hyp, "decay_rate": self.decay_rate,
            "speed_se": self.speed_se, "decay_se": self.decay_se,
            "combined_se": self.combined_se, "n_range": list(self.n_range),
            "n_trajectories": self.n_trajectories, "reliable": self.reliable,
        }


def estimate_speed(packing, trajs, burn_in: float = 0.4, collar: int = 2,
                   strict: bool = False) -> SpeedEstimate:
    """Pooled least-squares slopes of hyperbolic distance and -log radius.

    Each trajectory contributes its slope over the steps after the first
    ``burn_in`` fraction; estimates are means over trajectories with the
    standard error of the mean.  For a finite packing, walks entering the
    ``collar`` (hops from the boundary) make the result unreliable, or raise
    ``TrajectoryExitsWindow`` with ``strict=True``.
    """
    trajs = list(trajs)
    if not trajs:
        raise EmptyInput("no trajectories")
    if not 0 <= burn_in < 1:
        raise ValueError("burn_in must lie in [0, 1)")
    reliable = True
    if isinstance(packing, Packing):
        near = collar_mask(packing.map, collar)
        if any(near[t.vertices].any() for t in trajs):
            if strict:
                raise TrajectoryExitsWindow("a trajectory entered the boundary collar")
            reliable = False
    sp_, dr = [], []
    lo, hi = None, None
    for t in trajs:
        g = path_geometry(packing, t)
        N = len(g) - 1
        start = int(math.ceil(burn_in * N))
        if N - start < 1:
            continue
        x = np.arange(start, N + 1, dtype=float)
        sp_.append(_slope(g.dist_from_start[start:], x))
        dr.append(_slope(g.neg_log_r[start:], x))
        lo = start if lo is None else min(lo, start)
        hi = N if hi is None else max(hi, N)
    if not sp_:
        raise EmptyInput("no trajectory is long enough")
    sp_, dr = np.array(sp_), np.array(dr)
    k = len(sp_)

    def se(a):
        return float(np.std(a, ddof=1) / math.sqrt(k)) if k > 1 else math.nan

    return SpeedEstimate(float(sp_.mean()), float(dr.mean()), se(sp_), se(dr), (lo, hi), k,
                         reliable, sp_, dr)


@dataclass
class SandwichReport:
    n_checked: int
    lower_violations: int
    upper_violations: int

    @property
    def ok(self) -> bool:
        return self.lower_violations == 0 and self.upper_violations == 0


def sandwich_check(packing, traj, ring_constant: float | None = None,
                   log_slack: float = 1e-9) -> SandwichReport:
    """Check r e^{-C deg} <= 1 - |z_h(X_n)| <= sum_{i >= n} 2 r(X_i) along a walk.

    The upper tail is truncated at the last step, with the remaining
    distance ``1 - |z(X_N)|`` added, which keeps it a valid bound.  Work is
    done in log scale; ``log_slack`` absorbs rounding.
    """
    if ring_constant is None:
        ring_constant = packing.ring_constant() if isinstance(packing, RegularTiling) else ring_report(packing)
    g = path_geometry(packing, traj)
    log_r = -g.neg_log_r
    lower = log_r - ring_constant * g.degree
    terms = np.log(2.0) + log_r
    tail = np.logaddexp.accumulate(terms[::-1])[::-1]
    upper = np.logaddexp(tail, g.log_gap[-1])
    low_bad = int(np.sum(lower > g.log_gap_h + log_slack))
    up_bad = int(np.sum(g.log_gap_h > upper + log_slack))
    return SandwichReport(len(g), low_bad, up_bad)


# -----------------------------------------------------------------------------
# Exit points and histograms


class _NotConvergedType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self):
        return False

    def __repr__(self):
        return "NotConverged"


NotConverged = _NotConvergedType()


def exit_point(packing, traj, eps: float):
    """arg z(X_T) at the first T with 1 - |z(X_T)| < eps, else ``NotConverged``."""
    if isinstance(traj, TilingPath):
        log_gap, ang = traj.log_gap, traj.angle
    else:
        if packing.geometry != DISC:
            raise ValueError("exit points need a disc packing")
        z = packing.centers[np.asarray(traj.vertices)]
        log_gap, ang = np.log1p(-np.abs(z)), np.mod(np.angle(z), TWO_PI)
    hit = np.nonzero(log_gap < math.log(eps))[0]
    if len(hit) == 0:
        return NotConverged
    return float(ang[hit[0]])


def exit_angles(packing, trajs, eps: float) -> np.ndarray:
    """Exit angles with ``nan`` for walks that did not converge."""
    out = [exit_point(packing, t, eps) for t in trajs]
    return np.array([math.nan if a is NotConverged else a for a in out])


@dataclass
class ExitHistogram:
    level: int
    counts: np.ndarray
    total: int
    max_arc_mass: float
    coarse_counts: np.ndarray  # level-3 counts
    min_coarse_count: int

    def as_dict(self):
        return {"level": self.level, "counts": self.counts.tolist(), "total": self.total,
                "max_arc_mass": self.max_arc_mass, "coarse_counts": self.coarse_counts.tolist(),
                "min_coarse_count": self.min_coarse_count}


def dyadic_counts(angles: np.ndarray, level: int) -> np.ndarray:
    n_arcs = 2 ** level
    idx = np.floor(np.mod(angles, TWO_PI) / TWO_PI * n_arcs).astype(np.int64)
    return np.bincount(np.minimum(idx, n_arcs - 1), minlength=n_arcs)


def exit_histogram(angles, level: int) -> ExitHistogram:
    if level < 1:
        raise ValueError("level must be at least 1")
    a = np.asarray(angles, dtype=float)
    a = a[np.isfinite(a)]
    if len(a) == 0:
        raise EmptyInput("no exit angles")
    counts = dyadic_counts(a, level)
    coarse = dyadic_counts(a, 3)
    return ExitHistogram(level, counts, len(a), float(counts.max() / len(a)), coarse, int(coarse.min()))


def rotation_symmetry(angles, fold: int, level: int = 3) -> np.ndarray:
    """Per-arc z-scores of (count in arc) - (count in arc rotated by 2 pi / fold).

    The two counts come from the same sample, so each z-score uses the
    paired per-walk difference of indicators.
    """
    a = np.asarray(angles, dtype=float)
    a = a[np.isfinite(a)]
    if len(a) < 2:
        raise EmptyInput("need at least two angles")
    n_arcs = 2 ** level

    def arc(x):
        return np.minimum(np.floor(np.mod(x, TWO_PI) / TWO_PI * n_arcs).astype(np.int64), n_arcs - 1)

    i0, i1 = arc(a), arc(a + TWO_PI / fold)
    z = np.empty(n_arcs)
    for k in range(n_arcs):
        diff = (i0 == k).astype(float) - (i1 == k)
        sd = diff.std(ddof=1) * math.sqrt(len(a))
        z[k] = 0.0 if sd == 0 else diff.sum() / sd
    return z


# -----------------------------------------------------------------------------
# Harmonic extension of boundary functions


@dataclass
class HarmonicEstimate:
    value: float
    se: float
    n_converged: int
    not_converged_fraction: float


def _exit_angles_from(packing, v, n_walks, steps, seed, eps, tag):
    vkey = stream_key(str(v))[0]  # hash a long tiling word once, not once per walk
    streams = [("harmonic", tag, vkey, i) for i in range(n_walks)]
    if isinstance(packing, RegularTiling):
        paths = packing.walks(n_walks, steps, seed, start=tuple(v), eps=eps, streams=streams)
    else:
        z = packing.centers
        stop = (1 - np.abs(z)) < eps
        view = WeightedGraphView.from_map(packing.map)
        paths = run_walks(view, [int(v)] * n_walks, steps, seed, streams=streams, stop=stop)
    return exit_angles(packing, paths, eps)


def harmonic_estimate(g, v, packing, n_walks: int, steps: int, seed: int, eps: float = 1e-3,
                      tag: str = "") -> HarmonicEstimate:
    """Monte-Carlo ``h(v) = E_v[g(exit angle)]`` over converged walks."""
    ang = _exit_angles_from(packing, v, n_walks, steps, seed, eps, tag)
    ok = np.isfinite(ang)
    if not ok.any():
        return HarmonicEstimate(math.nan, math.nan, 0, 1.0)
    vals = np.asarray(g(ang[ok]), dtype=float) * np.ones(int(ok.sum()))
    n = len(vals)
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return HarmonicEstimate(float(vals.sum() / n), se, n, float(1 - ok.mean()))


@dataclass
class MeanValueCheck:
    vertex: object
    value: HarmonicEstimate
    neighbour_mean: float
    neighbour_se: float
    z_score: float


def mean_value_check(g, v, packing, n_walks: int, steps: int, seed: int,
                     eps: float = 1e-3) -> MeanValueCheck:
    """Compare h(v) with the average of h over the neighbours of v."""
    if isinstance(packing, RegularTiling):
        nbrs = packing.neighbors(v)
    else:
        m = packing.map
        nbrs = [int(m.head[d]) for d in range(m.offset[v], m.offset[v + 1])]
    here = harmonic_estimate(g, v, packing, n_walks, steps, seed, eps, tag="centre")
    est = [harmonic_estimate(g, u, packing, n_walks, steps, seed, eps, tag=f"nbr{i}")
           for i, u in enumerate(nbrs)]
    mean = float(np.mean([e.value for e in est]))
    se = math.sqrt(sum(e.se ** 2 for e in est)) / len(est)
    comb = math.hypot(se, here.se)
    z = 0.0 if comb == 0 else (here.value - mean) / comb
    return MeanValueCheck(v, here, mean, se, z)


@dataclass
class LevyReport:
    h: np.ndarray
    se: np.ndarray
    exit_value: float  # g at the trajectory's own exit angle (nan if none)
    terminal_gap: float


def levy_convergence_check(g, traj, packing, n_inner_walks: int, seed: int, steps: int = 2000,
                           eps: float = 1e-3) -> LevyReport:
    """h(X_n) along a trajectory, each value from fresh inner walks."""
    if isinstance(traj, TilingPath):
        verts = [traj.word(n) for n in range(len(traj))]
    else:
        verts = [int(x) for x in traj.vertices]
    h, se = [], []
    for n, v in enumerate(verts):
        est = harmonic_estimate(g, v, packing, n_inner_walks, steps, seed, eps, tag=f"levy{n}")
        h.append(est.value)
        se.append(est.se)
    a = exit_point(packing, traj, eps)
    gx = math.nan if a is NotConverged else float(g(np.array([a]))[0])
    return LevyReport(np.array(h), np.array(se), gx, abs(h[-1] - gx))


def arc_indicator(lo: float, hi: float):
    """Indicator of the arc [lo, hi) (angles taken mod 2 pi)."""
    def g(theta):
        t = np.mod(np.asarray(theta, dtype=float) - lo, TWO_PI)
        return (t < (hi - lo)).astype(float)
    return g


# -----------------------------------------------------------------------------
# Spectral radius


@dataclass
class SpectralEstimate:
    n: np.ndarray  # half-times
    roots: np.ndarray  # p_{2n}(v, v)^{1/(2n)}
    last: float
    trend: float  # last minus previous root
    estimate: float  # extrapolated from the fit below
    prefactor_exponent: float  # c in log p_{2n} = a + 2n log rho + c log n

    def as_dict(self):
        return {"n": self.n.tolist(), "roots": self.roots.tolist(), "last": self.last,
                "trend": self.trend, "estimate": self.estimate,
                "prefactor_exponent": self.prefactor_exponent}


def return_probabilities(view: WeightedGraphView, v: int, steps: int) -> np.ndarray:
    """p_t(v, v) for t = 0..steps by repeated sparse distribution-vector products."""
    PT = view.transition_matrix().T.tocsr()
    mu = np.zeros(view.n)
    mu[v] = 1.0
    out = np.empty(steps + 1)
    out[0] = 1.0
    for t in range(1, steps + 1):
        mu = PT @ mu
        out[t] = mu[v]
    return out


def spectral_radius_estimate(view: WeightedGraphView, v: int, n_max: int) -> SpectralEstimate:
    """Estimate ||P|| from even return probabilities at ``v``.

    The raw roots ``p_{2n}^{1/2n}`` approach the spectral radius slowly
    because of a polynomial prefactor, so the estimate fits
    ``log p_{2n} = a + 2n log rho + c log n`` over the upper half of
    ``n = 1..n_max`` (plain root when fewer than 3 points are available).
    On a finite window the boundary pushes the value toward 1.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    p = return_probabilities(view, v, 2 * n_max)
    n = np.arange(1, n_max + 1)
    p2n = p[2 * n]
    roots = p2n ** (1.0 / (2 * n))
    last = float(roots[-1])
    trend = float(roots[-1] - roots[-2]) if n_max > 1 else 0.0
    sel = n >= max(1, n_max // 2)
    if sel.sum() >= 3:
        X = np.column_stack([np.ones(sel.sum()), 2.0 * n[sel], np.log(n[sel])])
        coef = np.linalg.lstsq(X, np.log(p2n[sel]), rcond=None)[0]
        est, c = float(math.exp(coef[1])), float(coef[2])
    else:
        est, c = last, 0.0
    return SpectralEstimate(n, roots, last, trend, est, c)


# -----------------------------------------------------------------------------
# Degree / area identity


@dataclass
class TransportReport:
    vertices: np.ndarray  # interior vertices used
    sent: np.ndarray  # 3 x angle sum (6 pi for a converged packing)
    received: np.ndarray  # sum of theta(f) over faces at u
    degree: np.ndarray
    area: np.ndarray  # sum of (pi - theta(f)) over faces at u
    mean_degree: float
    mean_area: float
    residual: float  # mean_degree - (6 + mean_area / pi)

    def as_dict(self):
        return {"n_vertices": int(len(self.vertices)), "mean_degree": self.mean_degree,
                "mean_area": self.mean_area, "residual": self.residual,
                "max_sent_error": float(np.max(np.abs(self.sent - 3 * TWO_PI))) if len(self.sent) else 0.0}


def angle_transport_report(packing, collar: int = 2, tol: float = 1e-8) -> TransportReport:
    """Angle mass transport over the interior vertices of a converged packing.

    Each corner angle ``beta`` at ``u`` in face ``f = (u, v, w)`` is sent to
    u, v and w, so ``u`` sends three copies of its angle system and receives
    ``theta(f)`` (the angle sum of ``f``) from every face at ``u``.  Faces of
    a geodesic triangle have area ``pi - theta(f)``.  Interior means the
    whole star avoids the ``collar``.  A ``RegularTiling`` gives the exact
    single-vertex report.
    """
    if isinstance(packing, RegularTiling):
        d = packing.degree
        r = packing.radius
        beta = corner_angle(r, r, r, DISC)
        theta = np.array([3 * beta] * d)
        recv = math.fsum(theta)
        area = math.fsum(math.pi - t for t in theta)
        return TransportReport(np.array([0]), np.array([3 * d * beta]), np.array([recv]),
                               np.array([d]), np.array([area]), float(d), area, d - (6 + area / math.pi))
    check_converged(packing, tol)
    m = packing.map
    tris, ang = packing.corner_angles()
    theta = ang.sum(axis=1)
    n = m.n_vertices
    received = np.zeros(n)
    sent = np.zeros(n)
    for j in range(3):
        np.add.at(received, tris[:, j], theta)
        np.add.at(sent, tris[:, j], 3 * ang[:, j])
    area_f = math.pi - theta
    area = np.zeros(n)
    for j in range(3):
        np.add.at(area, tris[:, j], area_f)
    keep = boundary_distance(m) > collar
    vs = np.nonzero(keep)[0]
    deg = m.degrees()[vs]
    mean_deg = float(deg.mean()) if len(vs) else math.nan
    mean_area = float(area[vs].mean()) if len(vs) else math.nan
    return TransportReport(vs, sent[vs], received[vs], deg, area[vs], mean_deg, mean_area,
                           mean_deg - (6 + mean_area / math.pi))


# -----------------------------------------------------------------------------
# BLS refinement


@dataclass
class TestedCluster:
    __test__ = False  # not a pytest class despite the name

    round: int
    size: int
    boundary_edges: int
    removed: bool


@dataclass
class BLSResult:
    percolation: Percolation
    open_mask: np.ndarray
    initial_mask: np.ndarray
    tested: list
    interior: np.ndarray  # vertices counted for the surviving fraction
    delta: float
    degree_cap: int

    @property
    def surviving_fraction(self) -> float:
        """Fraction of interior vertices of omega_0 still open."""
        base = self.initial_mask[self.interior]
        if not base.any():
            return 0.0
        return float(self.open_mask[self.interior][base].mean())

    def violations(self) -> list:
        """Surviving tested clusters whose boundary ratio is below delta."""
        return [c for c in self.tested if not c.removed and c.boundary_edges < self.delta * c.size]

    def as_dict(self):
        """Report record with the E[deg] side of i_inv = E[deg] - alpha.

        Neither i_inv nor alpha is computable from one finite window; the
        refinement only certifies the ratio delta / M on the clusters it tested.
        """
        m = self.percolation.host
        deg = m.degrees()[self.interior]
        open_deg = [self.percolation.degree(int(v)) for v in self.interior]
        alive = bool(self.open_mask[self.interior].any())
        return {
            "delta": self.delta, "degree_cap": self.degree_cap,
            "surviving_fraction": self.surviving_fraction,
            "mean_degree": float(deg.mean()) if len(deg) else math.nan,
            "mean_open_degree": float(np.mean(open_deg)) if open_deg else math.nan,
            "cheeger_lower_bound": self.delta / self.degree_cap if alive else math.nan,
            "tested_clusters": len(self.tested), "violations": len(self.violations()),
        }


def bls_refinement(m: PlanarMap, M: int, delta: float, rounds: int, seed: int,
                   collar: int = 2, record: bool = True) -> BLSResult:
    """Decreasing site percolations removing small-boundary clusters.

    ``omega_0 = {v : deg(v) <= M}``.  Each round marks every open vertex
    independently with probability 1/2; every cluster ``K`` of marked
    vertices that avoids the boundary collar and has fewer than
    ``delta |K|`` edges of ``omega`` leaving it is closed.  Clusters
    touching the collar are never tested.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if M < 1:
        raise ValueError("M must be at least 1")
    n = m.n_vertices
    near = collar_mask(m, collar)
    deg = m.degrees()
    omega = deg <= M
    initial = omega.copy()
    ed = m.edge_darts()
    eu, ev = m.tail[ed], m.head[ed]
    rng = make_rng(seed, "bls")
    tested = []
    for rnd in range(rounds):
        eta = omega & (rng.random(n) < 0.5)
        both = eta[eu] & eta[ev]
        G = sp.csr_matrix((np.ones(int(both.sum())), (eu[both], ev[both])), shape=(n, n))
        _, lab = connected_components(G, directed=False)
        lab = np.where(eta, lab, -1)
        in_omega = omega[eu] & omega[ev]
        # an omega-edge leaves K when exactly one endpoint carries K's label
        cross = in_omega & (lab[eu] != lab[ev])
        bcount = np.zeros(n, dtype=np.int64)
        for side in (eu, ev):
            s = side[cross]
            s = s[lab[s] >= 0]
            np.add.at(bcount, lab[s], 1)
        sizes = np.bincount(lab[lab >= 0], minlength=n)
        touches = np.zeros(n, dtype=bool)
        touches[lab[(lab >= 0) & near]] = True
        ids = np.nonzero(sizes > 0)[0]
        ids = ids[~touches[ids]]
        remove = bcount[ids] < delta * sizes[ids]
        if record:
            tested.extend(TestedCluster(rnd, int(sizes[k]), int(bcount[k]), bool(r))
                          for k, r in zip(ids, remove))
        dead = np.zeros(n, dtype=bool)
        dead[ids[remove]] = True
        omega = omega & ~(eta & dead[np.maximum(lab, 0)] & (lab >= 0))
    interior = np.nonzero(~near)[0]
    return BLSResult(Percolation.site(m, np.nonzero(omega)[0]), omega, initial, tested, interior, delta,
                     M)
