"""Random walks on weighted graphs, induced networks and trajectory records."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from .errors import IsolatedVertex, SingularSystem
from .maps import PlanarMap
from .rng import make_rng


class WeightedGraphView:
    """Symmetric weighted graph; ``p(x, y) = w(x, y) / w(x)``.

    ``W`` is a square sparse matrix with ``W[x, y]`` the total weight of the
    edges between x and y.  A loop of a map contributes 2 to ``W[x, x]``
    (once per dart) so that ``w(x)`` is the degree.
    """

    def __init__(self, W, host: PlanarMap | None = None, vertices=None):
        W = sp.csr_matrix(W, dtype=float)
        W.sum_duplicates()
        W.sort_indices()
        if W.shape[0] != W.shape[1]:
            raise ValueError("weight matrix must be square")
        if W.nnz and W.data.min() < 0:
            raise ValueError("weights must be nonnegative")
        self.W = W
        self.host = host
        self.vertices = np.arange(W.shape[0]) if vertices is None else np.asarray(vertices)
        self.vertex_weights = np.asarray(W.sum(axis=1)).ravel()
        self._cum = None

    @classmethod
    def from_map(cls, m: PlanarMap, edge_weights=None) -> "WeightedGraphView":
        """Weights per edge id (lower dart index of the edge); default 1."""
        w = np.ones(m.n_darts)
        if edge_weights is not None:
            ew = dict(edge_weights)
            for d in range(m.n_darts):
                e = min(d, int(m.mate[d]))
                w[d] = ew.get(e, 1.0)
        W = sp.csr_matrix((w, (m.tail, m.head)), shape=(m.n_vertices, m.n_vertices))
        return cls(W, host=m)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    def transition_matrix(self) -> sp.csr_matrix:
        wx = self.vertex_weights
        if np.any(wx <= 0):
            raise IsolatedVertex(f"vertex {int(np.argmin(wx))} has no positive-weight edge")
        return sp.csr_matrix(sp.diags(1.0 / wx) @ self.W)

    def neighbors(self, x: int):
        s, e = self.W.indptr[x], self.W.indptr[x + 1]
        return self.W.indices[s:e], self.W.data[s:e]

    def _cumulative(self):
        if self._cum is None:
            self._cum = np.cumsum(self.W.data)
        return self._cum

    def step_many(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """One step from each vertex in ``x`` driven by uniforms ``u``."""
        W = self.W
        cum = self._cumulative()
        wx = self.vertex_weights[x]
        if np.any(wx <= 0):
            bad = x[wx <= 0][0]
            raise IsolatedVertex(f"vertex {int(bad)} has no positive-weight edge")
        s = W.indptr[x]
        base = np.where(s > 0, cum[np.maximum(s - 1, 0)], 0.0)
        target = base + u * wx
        k = np.searchsorted(cum, target, side="right")
        k = np.clip(k, s, W.indptr[x + 1] - 1)
        return W.indices[k]


@dataclass(frozen=True, eq=False)
class Trajectory:
    start: int
    vertices: np.ndarray
    seed: int
    stream: tuple = ()
    stopped: bool = False  # ended by entering the stop set

    def __len__(self):
        return len(self.vertices)

    @property
    def steps(self) -> int:
        return len(self.vertices) - 1

    def __eq__(self, other):
        return (isinstance(other, Trajectory) and self.start == other.start
                and np.array_equal(self.vertices, other.vertices))


def _uniforms(seed, stream, steps):
    return make_rng(seed, "walk", *stream).random(steps)


def simple_random_walk(view: WeightedGraphView, start: int, steps: int, seed: int,
                       stream=(0,), stop=None) -> Trajectory:
    """Walk of ``steps`` steps; stops early on entering the boolean mask ``stop``."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    stream = tuple(stream) if isinstance(stream, (tuple, list)) else (stream,)
    return run_walks(view, [start], steps, seed, streams=[stream], stop=stop)[0]


def run_walks(view: WeightedGraphView, starts, steps: int, seed: int, streams=None,
              stop=None) -> list[Trajectory]:
    """Many walks advanced together; walk ``i`` uses stream ``streams[i]``.

    Each walk consumes only its own stream, so a walk is identical whether
    it runs alone or in a batch.
    """
    starts = np.asarray(starts, dtype=np.int64)
    nw = len(starts)
    if streams is None:
        streams = [(i,) for i in range(nw)]
    streams = [tuple(s) if isinstance(s, (tuple, list)) else (s,) for s in streams]
    U = np.empty((nw, steps))
    for i, s in enumerate(streams):
        U[i] = _uniforms(seed, s, steps)
    path = np.empty((nw, steps + 1), dtype=np.int64)
    path[:, 0] = starts
    length = np.full(nw, steps + 1)
    active = np.ones(nw, dtype=bool)
    if stop is not None:
        stop = np.asarray(stop, dtype=bool)
        hit = stop[starts]
        length[hit] = 1
        active &= ~hit
    for t in range(steps):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        nxt = view.step_many(path[idx, t], U[idx, t])
        path[idx, t + 1] = nxt
        if stop is not None:
            hit = stop[nxt]
            length[idx[hit]] = t + 2
            active[idx[hit]] = False
    out = []
    for i in range(nw):
        n = length[i]
        stopped = stop is not None and bool(stop[path[i, n - 1]])
        out.append(Trajectory(int(starts[i]), path[i, :n].copy(), seed, streams[i], stopped))
    return out


def stopping_times_in(traj: Trajectory, omega) -> np.ndarray:
    """Times ``N_0 < N_1 < ...`` at which the trajectory is in ``omega``."""
    om = np.zeros(int(max(traj.vertices.max(), max(omega, default=0))) + 1, dtype=bool)
    om[list(omega)] = True
    return np.nonzero(om[traj.vertices])[0]


def induced_network(view: WeightedGraphView, omega) -> WeightedGraphView:
    """Network of the walk watched only on ``omega``.

    ``wbar(u, v) = w(u) P_u(X_{N_1} = v)`` with ``N_1`` the first return time
    to ``omega``; computed exactly from the hitting distribution of
    ``omega`` by a sparse linear solve.  Vertices of the result are indexed
    in the order of ``sorted(omega)``.
    """
    om = np.array(sorted(set(int(x) for x in omega)), dtype=np.int64)
    if len(om) == 0:
        raise ValueError("omega must be nonempty")
    n = view.n
    P = view.transition_matrix()
    in_om = np.zeros(n, dtype=bool)
    in_om[om] = True
    rest = np.nonzero(~in_om)[0]
    P_oo = P[om][:, om]
    if len(rest):
        # every vertex outside omega must reach omega
        ncomp, lab = connected_components(view.W, directed=False)
        reach = np.zeros(ncomp, dtype=bool)
        reach[lab[om]] = True
        if not reach[lab[rest]].all():
            raise SingularSystem("some vertices outside omega never reach it")
        P_cc = P[rest][:, rest]
        P_co = P[rest][:, om].toarray()
        A = sp.identity(len(rest), format="csc") - P_cc.tocsc()
        try:
            H = splu(A).solve(P_co)
        except RuntimeError as exc:
            raise SingularSystem(str(exc)) from exc
        if not np.all(np.isfinite(H)):
            raise SingularSystem("hitting distribution is not finite")
        hit = P_oo.toarray() + P[om][:, rest] @ H
    else:
        hit = P_oo.toarray()
    wbar = view.vertex_weights[om][:, None] * hit
    return WeightedGraphView(sp.csr_matrix(wbar), host=view.host, vertices=view.vertices[om])


def two_sided_walk(view: WeightedGraphView, root: int, steps: int, seed: int):
    """Independent walks (X_{-n}) and (X_n) from the root, on separate streams."""
    past = simple_random_walk(view, root, steps, seed, stream=("past",))
    future = simple_random_walk(view, root, steps, seed, stream=("future",))
    return past, future


def one_step_distribution(view: WeightedGraphView, x: int) -> dict[int, float]:
    nb, w = view.neighbors(x)
    return {int(v): float(p) for v, p in zip(nb, w / view.vertex_weights[x])}
