"""Combinatorial planar maps stored as rotation systems.

Darts are numbered so that the darts leaving vertex ``u`` occupy the
contiguous block ``offset[u]:offset[u+1]`` in counterclockwise order.  The
``head`` array is therefore a CSR adjacency list, which the walkers use
directly.  Faces are traced with ``next(d) = rot_prev(mate(d))``, which keeps
the face on the left of every dart; bounded faces of a ccw embedding come
out counterclockwise.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    CoreEmpty,
    EmptyMap,
    InconsistentRotation,
    NonFiniteTransport,
    NonPlanarEuler,
)
from .rng import make_rng

__all__ = [
    "PlanarMap",
    "RootedMap",
    "Percolation",
    "build_map",
    "from_triangles",
    "is_triangulation",
    "ball",
    "EndsProfile",
    "ends_profile",
    "simple_core",
    "mass_transport_check",
    "choose_root",
    "root_distribution",
]


class PlanarMap:
    """Immutable finite planar map given by per-vertex ccw neighbour cycles.

    Parameters
    ----------
    rotations
        ``rotations[u]`` lists the neighbours of ``u`` in counterclockwise
        order; parallel edges are repeated and loops appear twice.
    mates
        Optional explicit dart pairing, ``mates[u][i] = (v, j)``.  When
        omitted the pairing is inferred (unique for simple maps; for
        multi-edges the planar choice is searched for).
    boundary
        ``None``, a dart given as ``(u, i)``, or a vertex walk identifying a
        face cyclically.
    labels
        Optional original ids of the vertices (kept by submap operations).
    """

    def __init__(
        self,
        rotations: Sequence[Sequence[int]],
        mates: Sequence[Sequence[tuple[int, int]]] | None = None,
        boundary=None,
        labels: Sequence[int] | None = None,
        check: bool = True,
    ):
        rot = tuple(tuple(int(x) for x in r) for r in rotations)
        n = len(rot)
        for u, r in enumerate(rot):
            for x in r:
                if not 0 <= x < n:
                    raise InconsistentRotation(f"vertex {u} lists unknown vertex {x}")
        self._rot = rot
        deg = np.fromiter((len(r) for r in rot), dtype=np.int64, count=n)
        self._offset = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=self._offset[1:])
        self._tail = np.repeat(np.arange(n, dtype=np.int64), deg)
        self._head = np.fromiter((x for r in rot for x in r), dtype=np.int64,
                                 count=int(self._offset[-1]))
        if mates is None:
            self._mate = self._infer_mates()
        else:
            mate = np.empty(len(self._head), dtype=np.int64)
            for u, row in enumerate(mates):
                if len(row) != len(rot[u]):
                    raise InconsistentRotation(f"mate row {u} has wrong length")
                for i, (v, j) in enumerate(row):
                    mate[self._offset[u] + i] = self._offset[v] + j
            self._mate = mate
        self._faces_cache = None
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        self._check_involution()
        self._boundary_dart = self._resolve_boundary(boundary)
        if check:
            chi = self.euler_characteristic
            comps = len(self.components())
            if chi != 2 * comps:
                raise NonPlanarEuler(
                    f"V-E+F = {chi} but {comps} sphere component(s) need {2 * comps}"
                )

    # -- construction helpers -------------------------------------------------

    def _check_involution(self):
        m = self._mate
        idx = np.arange(len(m))
        if len(m) and (m.min() < 0 or m.max() >= len(m)):
            raise InconsistentRotation("mate index out of range")
        if not np.array_equal(m[m], idx):
            raise InconsistentRotation("dart pairing is not an involution")
        if np.any(self._head[m] != self._tail) or np.any(m == idx):
            raise InconsistentRotation("mate of a dart is not its reverse")

    def _infer_mates(self):
        rot, off = self._rot, self._offset
        mate = np.full(len(self._head), -1, dtype=np.int64)
        occ: dict[tuple[int, int], list[int]] = {}
        for u, r in enumerate(rot):
            for i, v in enumerate(r):
                occ.setdefault((u, v), []).append(int(off[u] + i))
        ambiguous = []
        for (u, v), ds in occ.items():
            if u > v:
                continue
            if u == v:
                if len(ds) % 2:
                    raise InconsistentRotation(f"loop at {u} listed an odd number of times")
                cands = _loop_pairings(ds)
            else:
                back = occ.get((v, u), [])
                if len(back) != len(ds):
                    raise InconsistentRotation(
                        f"{u} lists {v} {len(ds)} time(s) but {v} lists {u} {len(back)} time(s)"
                    )
                cands = _edge_pairings(ds, back)
            for a, b in cands[0]:
                mate[a], mate[b] = b, a
            if len(cands) > 1:
                ambiguous.append(cands)
        if ambiguous:
            self._mate = mate
            best = self._count_faces(mate)
            for cands in ambiguous:
                chosen = cands[0]
                for cand in cands[1:]:
                    trial = mate.copy()
                    for a, b in cand:
                        trial[a], trial[b] = b, a
                    f = self._count_faces(trial)
                    if f > best:
                        best, chosen = f, cand
                for a, b in chosen:
                    mate[a], mate[b] = b, a
        return mate

    def _count_faces(self, mate):
        nxt = self._rot_prev_array()[mate]
        seen = np.zeros(len(nxt), dtype=bool)
        count = 0
        for d in range(len(nxt)):
            if seen[d]:
                continue
            count += 1
            e = d
            while not seen[e]:
                seen[e] = True
                e = nxt[e]
        return count

    def _rot_prev_array(self):
        off, tail = self._offset, self._tail
        d = np.arange(len(tail))
        start = off[tail]
        deg = off[tail + 1] - start
        return start + (d - start - 1) % np.maximum(deg, 1)

    def _resolve_boundary(self, boundary):
        if boundary is None:
            return None
        if isinstance(boundary, tuple) and len(boundary) == 2 and not isinstance(boundary[0], Iterable):
            u, i = boundary
            if not 0 <= i < len(self._rot[u]):
                raise ValueError(f"boundary dart {boundary} does not exist")
            return int(self._offset[u] + i)
        walk = [int(x) for x in boundary]
        if not walk:
            raise ValueError("empty boundary walk")
        for fd in self.face_darts:
            verts = [int(self._tail[d]) for d in fd]
            if len(verts) != len(walk):
                continue
            for s in range(len(verts)):
                if verts[s:] + verts[:s] == walk:
                    return int(fd[s])
        raise ValueError(f"no face matches boundary walk {walk}")

    # -- basic accessors ------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self._rot)

    @property
    def n_darts(self) -> int:
        return len(self._head)

    @property
    def n_edges(self) -> int:
        return len(self._head) // 2

    @property
    def rotations(self) -> tuple[tuple[int, ...], ...]:
        return self._rot

    @property
    def offset(self) -> np.ndarray:
        return self._offset

    @property
    def head(self) -> np.ndarray:
        return self._head

    @property
    def tail(self) -> np.ndarray:
        return self._tail

    @property
    def mate(self) -> np.ndarray:
        return self._mate

    def degree(self, v: int) -> int:
        return len(self._rot[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self._offset)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._rot[v]

    def dart(self, u: int, i: int) -> int:
        return int(self._offset[u] + i)

    def rot_next(self, d: int) -> int:
        u = self._tail[d]
        s, e = self._offset[u], self._offset[u + 1]
        return int(s + (d - s + 1) % (e - s))

    def rot_prev(self, d: int) -> int:
        u = self._tail[d]
        s, e = self._offset[u], self._offset[u + 1]
        return int(s + (d - s - 1) % (e - s))

    def face_next(self, d: int) -> int:
        return self.rot_prev(int(self._mate[d]))

    def edges(self) -> list[tuple[int, int]]:
        """One ``(tail, head)`` pair per edge, from its lower-numbered dart."""
        d = np.nonzero(np.arange(self.n_darts) < self._mate)[0]
        return [(int(self._tail[x]), int(self._head[x])) for x in d]

    def edge_darts(self) -> np.ndarray:
        return np.nonzero(np.arange(self.n_darts) < self._mate)[0]

    # -- faces ----------------------------------------------------------------

    def _trace_faces(self):
        if self._faces_cache is None:
            nxt = self._rot_prev_array()[self._mate] if self.n_darts else np.zeros(0, np.int64)
            face_of = np.full(self.n_darts, -1, dtype=np.int64)
            faces = []
            for d in range(self.n_darts):
                if face_of[d] >= 0:
                    continue
                cyc = []
                e = d
                while face_of[e] < 0:
                    face_of[e] = len(faces)
                    cyc.append(e)
                    e = int(nxt[e])
                faces.append(tuple(cyc))
            self._faces_cache = (tuple(faces), face_of)
        return self._faces_cache

    @property
    def face_darts(self) -> tuple[tuple[int, ...], ...]:
        return self._trace_faces()[0]

    @property
    def face_of_dart(self) -> np.ndarray:
        return self._trace_faces()[1]

    @property
    def faces(self) -> list[tuple[int, ...]]:
        """Faces as cyclic vertex sequences (tails of their darts)."""
        return [tuple(int(self._tail[d]) for d in fd) for fd in self.face_darts]

    @property
    def n_faces(self) -> int:
        # an isolated vertex still bounds one (empty) face
        isolated = int(np.sum(self.degrees() == 0))
        return len(self.face_darts) + isolated

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def boundary_dart(self) -> int | None:
        return self._boundary_dart

    @property
    def boundary_face(self) -> int | None:
        if self._boundary_dart is None:
            return None
        return int(self.face_of_dart[self._boundary_dart])

    @property
    def boundary_walk(self) -> tuple[int, ...]:
        if self._boundary_dart is None:
            return ()
        fd = self.face_darts[self.boundary_face]
        k = fd.index(self._boundary_dart)
        fd = fd[k:] + fd[:k]
        return tuple(int(self._tail[d]) for d in fd)

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[list(self.boundary_walk)] = True
        return mask

    def interior_vertices(self) -> np.ndarray:
        return np.nonzero(~self.boundary_mask())[0]

    def triangles(self, ignore_boundary: bool = True) -> list[tuple[int, int, int]]:
        """Vertex triples of the triangular faces (ccw for bounded faces)."""
        bf = self.boundary_face if ignore_boundary else None
        return [f for k, f in enumerate(self.faces) if len(f) == 3 and k != bf]

    # -- graph structure ------------------------------------------------------

    @property
    def is_simple(self) -> bool:
        for u, r in enumerate(self._rot):
            if u in r or len(set(r)) != len(r):
                return False
        return True

    def distances(self, v: int) -> np.ndarray:
        """Hop distances from ``v``; unreachable vertices get -1."""
        dist = np.full(self.n_vertices, -1, dtype=np.int64)
        dist[v] = 0
        q = deque([v])
        while q:
            u = q.popleft()
            for w in self._rot[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return dist

    def components(self) -> list[list[int]]:
        seen = np.zeros(self.n_vertices, dtype=bool)
        comps = []
        for s in range(self.n_vertices):
            if seen[s]:
                continue
            comp = []
            seen[s] = True
            q = deque([s])
            while q:
                u = q.popleft()
                comp.append(u)
                for w in self._rot[u]:
                    if not seen[w]:
                        seen[w] = True
                        q.append(w)
            comps.append(sorted(comp))
        return comps

    def __repr__(self):
        b = "" if self._boundary_dart is None else f", boundary={len(self.boundary_walk)}-gon"
        return f"PlanarMap(V={self.n_vertices}, E={self.n_edges}, F={self.n_faces}{b})"

    def __eq__(self, other):
        if not isinstance(other, PlanarMap):
            return NotImplemented
        return (
            self._rot == other._rot
            and np.array_equal(self._mate, other._mate)
            and self._boundary_dart == other._boundary_dart
        )

    def __hash__(self):
        return hash((self._rot, self._boundary_dart))


def _edge_pairings(ds, back):
    m = len(ds)
    if m == 1:
        return [[(ds[0], back[0])]]
    # going ccw around u the parallel edges appear in the reverse order around v
    return [[(ds[k], back[(s - k) % m]) for k in range(m)] for s in [m - 1] + list(range(m - 1))]


def _loop_pairings(ds):
    n = len(ds)
    m = n // 2
    out = []
    for s in range(n):
        cand = [(ds[(s + k) % n], ds[(s + n - 1 - k) % n]) for k in range(m)]
        if cand not in out:
            out.append(cand)
    return out


# -----------------------------------------------------------------------------
# Builders


def build_map(rotation_lists: Sequence[Sequence[int]], boundary=None) -> PlanarMap:
    """Validated map from per-vertex ccw neighbour cycles."""
    return PlanarMap(rotation_lists, boundary=boundary)


def from_triangles(
    triangles: Iterable[Sequence[int]],
    n_vertices: int | None = None,
    mark_boundary: bool = True,
) -> PlanarMap:
    """Build a simple triangulated disc (or sphere) from ccw triangles.

    The outer face (the unique face whose darts belong to no listed
    triangle) is marked as the boundary.  Every vertex must have a single fan
    of triangles around it.
    """
    tris = [tuple(int(x) for x in t) for t in triangles]
    if n_vertices is None:
        n_vertices = 1 + max(max(t) for t in tris)
    succ: list[dict[int, int]] = [dict() for _ in range(n_vertices)]
    for a, b, c in tris:
        for v, x, y in ((a, b, c), (b, c, a), (c, a, b)):
            if x in succ[v]:
                raise ValueError(f"triangles overlap at vertex {v}")
            succ[v][x] = y
    rotations = []
    for v in range(n_vertices):
        s = succ[v]
        if not s:
            rotations.append(())
            continue
        preds = set(s.values())
        starts = [x for x in s if x not in preds]
        if len(starts) > 1:
            raise ValueError(f"vertex {v} is a pinch point ({len(starts)} fans)")
        start = starts[0] if starts else min(s)
        cyc = [start]
        x = start
        while x in s and s[x] != start:
            x = s[x]
            cyc.append(x)
        if len(cyc) != len(set(s) | preds):
            raise ValueError(f"vertex {v} has a disconnected fan")
        rotations.append(tuple(cyc))
    pm = PlanarMap(rotations)
    if not mark_boundary:
        return pm
    tri_darts = set()
    for a, b, c in tris:
        tri_darts.update(((a, b), (b, c), (c, a)))
    outer = []
    for fd in pm.face_darts:
        if not any((int(pm.tail[d]), int(pm.head[d])) in tri_darts for d in fd):
            outer.append(fd)
    if not outer:
        return pm
    outer.sort(key=lambda fd: (-len(fd), fd[0]))
    d = outer[0][0]
    u = int(pm.tail[d])
    return PlanarMap(rotations, boundary=(u, int(d - pm.offset[u])))


def is_triangulation(m: PlanarMap, ignore_boundary: bool | None = None) -> bool:
    if ignore_boundary is None:
        ignore_boundary = m.boundary_dart is not None
    bf = m.boundary_face if ignore_boundary else None
    if m.n_edges == 0:
        return False
    return all(len(fd) == 3 for k, fd in enumerate(m.face_darts) if k != bf)


# -----------------------------------------------------------------------------
# Rooted maps and percolations


@dataclass(frozen=True)
class RootedMap:
    map: PlanarMap
    root: int
    root_mode: str = "uniform"

    def __post_init__(self):
        if not 0 <= self.root < self.map.n_vertices:
            raise ValueError(f"root {self.root} is not a vertex")
        if self.root_mode not in ("uniform", "degree_biased"):
            raise ValueError(f"unknown root mode {self.root_mode!r}")


@dataclass(frozen=True)
class Percolation:
    host: PlanarMap
    open_vertices: frozenset
    open_edges: frozenset  # edge ids = lower dart index of each edge

    def __post_init__(self):
        for e in self.open_edges:
            u, v = int(self.host.tail[e]), int(self.host.head[e])
            if u not in self.open_vertices or v not in self.open_vertices:
                raise ValueError(f"open edge {u}-{v} has a closed endpoint")

    @classmethod
    def site(cls, host: PlanarMap, vertices: Iterable[int]) -> "Percolation":
        """Site percolation with every edge between open vertices open."""
        vs = frozenset(int(v) for v in vertices)
        mask = np.zeros(host.n_vertices, dtype=bool)
        mask[list(vs)] = True
        ed = host.edge_darts()
        keep = mask[host.tail[ed]] & mask[host.head[ed]]
        return cls(host, vs, frozenset(int(e) for e in ed[keep]))

    def degree(self, v: int) -> int:
        """deg_omega(v); zero for closed vertices."""
        if v not in self.open_vertices:
            return 0
        h = self.host
        s, e = h.offset[v], h.offset[v + 1]
        return sum(1 for d in range(s, e) if min(d, int(h.mate[d])) in self.open_edges)

    def clusters(self) -> list[list[int]]:
        h = self.host
        adj: dict[int, list[int]] = {v: [] for v in self.open_vertices}
        for e in self.open_edges:
            u, v = int(h.tail[e]), int(h.head[e])
            adj[u].append(v)
            adj[v].append(u)
        seen = set()
        out = []
        for s in sorted(self.open_vertices):
            if s in seen:
                continue
            seen.add(s)
            comp, q = [], deque([s])
            while q:
                u = q.popleft()
                comp.append(u)
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        q.append(w)
            out.append(sorted(comp))
        return out


# -----------------------------------------------------------------------------
# Submaps


def _restrict(m: PlanarMap, keep: np.ndarray, drop: set[int] | None = None,
              boundary_dart: int | None = None) -> tuple[PlanarMap, dict]:
    """Submap on vertices ``keep`` without darts in ``drop``; rotations inherited."""
    drop = drop or set()
    keep = np.asarray(keep, dtype=bool)
    new_id = np.full(m.n_vertices, -1, dtype=np.int64)
    kept = np.nonzero(keep)[0]
    new_id[kept] = np.arange(len(kept))
    dart_pos: dict[int, tuple[int, int]] = {}
    rotations = []
    for u in kept:
        row = []
        for d in range(m.offset[u], m.offset[u + 1]):
            if d in drop or not keep[m.head[d]]:
                continue
            dart_pos[d] = (int(new_id[u]), len(row))
            row.append(int(new_id[m.head[d]]))
        rotations.append(row)
    mates = [[None] * len(r) for r in rotations]
    for d, (nu, i) in dart_pos.items():
        mates[nu][i] = dart_pos[int(m.mate[d])]
    bd = dart_pos.get(boundary_dart) if boundary_dart is not None else None
    labels = [m.labels[u] for u in kept]
    return PlanarMap(rotations, mates=mates, boundary=bd, labels=labels), dart_pos


def ball(m: PlanarMap, v: int, r: int, fill_holes: bool = False) -> RootedMap:
    """Induced submap on vertices within ``r`` hops of ``v``, rooted at ``v``.

    Faces of the ball that are not faces of the host are holes; the largest
    one is marked as the boundary.  ``labels`` records host vertex ids.
    With ``fill_holes`` every vertex enclosed by the ball is added, so a
    ball in a triangulated disc is again a triangulated disc.
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    dist = m.distances(v)
    keep = (dist >= 0) & (dist <= r)
    if fill_holes:
        keep |= _enclosed(m, keep)
    sub, dart_pos = _restrict(m, keep)
    inv = {nd: d for d, nd in dart_pos.items()}
    host_face = m.face_of_dart
    host_faces = m.face_darts
    new_faces = []
    for k, fd in enumerate(sub.face_darts):
        hd = [inv[(int(sub.tail[x]), int(x - sub.offset[sub.tail[x]]))] for x in fd]
        hf = {int(host_face[x]) for x in hd}
        if len(hf) != 1 or len(host_faces[hf.pop()]) != len(fd):
            new_faces.append(fd)
    bd = None
    if new_faces:
        new_faces.sort(key=lambda fd: (-len(fd), fd[0]))
        bd = new_faces[0][0]
    elif m.boundary_dart is not None and m.boundary_dart in dart_pos:
        bd = sub.dart(*dart_pos[m.boundary_dart])
    if bd is not None:
        u = int(sub.tail[bd])
        sub = PlanarMap(sub.rotations, mates=_mates_of(sub), boundary=(u, int(bd - sub.offset[u])),
                        labels=sub.labels)
    root = int(np.searchsorted(np.nonzero(keep)[0], v))
    return RootedMap(sub, root)


def _complement_components(m: PlanarMap, keep: np.ndarray) -> list[list[int]]:
    """Connected components of the vertices outside ``keep``, in BFS order."""
    comp = np.full(m.n_vertices, -1, dtype=np.int64)
    comps = []
    for s in np.nonzero(~keep)[0]:
        if comp[s] >= 0:
            continue
        cid = len(comps)
        comp[s] = cid
        members, q = [int(s)], deque([int(s)])
        while q:
            u = q.popleft()
            for d in range(m.offset[u], m.offset[u + 1]):
                w = int(m.head[d])
                if not keep[w] and comp[w] < 0:
                    comp[w] = cid
                    members.append(w)
                    q.append(w)
        comps.append(members)
    return comps


def _enclosed(m: PlanarMap, keep: np.ndarray) -> np.ndarray:
    """Vertices outside ``keep`` cut off from the host's outside by ``keep``.

    The outside is the component of the complement holding a host boundary
    vertex, or the largest component when the host has no boundary.
    """
    out = np.zeros(m.n_vertices, dtype=bool)
    comps = _complement_components(m, keep)
    if not comps:
        return out
    bmask = m.boundary_mask()
    outside = {i for i, c in enumerate(comps) if bmask[c].any()}
    if not outside:
        outside = {max(range(len(comps)), key=lambda i: len(comps[i]))}
    for i, c in enumerate(comps):
        if i not in outside:
            out[c] = True
    return out


@dataclass(frozen=True)
class EndsProfile:
    """Large components left after deleting balls of growing radius."""

    radii: tuple[int, ...]
    large_components: tuple[int, ...]
    min_size: int

    @property
    def looks_one_ended(self) -> bool:
        # a recorded observation, not a decision about the infinite map
        return all(c <= 1 for c in self.large_components)


def ends_profile(m: PlanarMap, root: int, radii: Iterable[int], min_size: int | None = None) -> EndsProfile:
    """Count complement components with at least ``min_size`` vertices around each ball.

    A map looks one-ended at this scale when no ball leaves two large
    pieces.  ``min_size`` defaults to 5% of the vertices.
    """
    if min_size is None:
        min_size = max(1, m.n_vertices // 20)
    dist = m.distances(root)
    radii = tuple(int(r) for r in radii)
    counts = []
    for r in radii:
        keep = (dist >= 0) & (dist <= r)
        counts.append(sum(len(c) >= min_size for c in _complement_components(m, keep)))
    return EndsProfile(radii, tuple(counts), int(min_size))


def _mates_of(m: PlanarMap):
    out = []
    for u in range(m.n_vertices):
        row = []
        for d in range(m.offset[u], m.offset[u + 1]):
            e = int(m.mate[d])
            w = int(m.tail[e])
            row.append((w, int(e - m.offset[w])))
        out.append(row)
    return out


def _find_defect(m: PlanarMap):
    """First loop or parallel edge pair, as a list of edge darts; None if simple."""
    for u in range(m.n_vertices):
        seen: dict[int, int] = {}
        for d in range(m.offset[u], m.offset[u + 1]):
            v = int(m.head[d])
            if v == u:
                return [d]
            if v in seen and int(m.mate[d]) != seen[v]:
                return [seen[v], d]
            seen.setdefault(v, d)
    return None


def simple_core(m: PlanarMap) -> PlanarMap:
    """Excise the part enclosed by every loop and double edge.

    For each loop or parallel pair, the side of the enclosed curve that does
    not contain the boundary face is deleted; the parallel edges are then
    merged and loops dropped.  Applied until the map is simple.
    """
    if m.is_simple:
        return m
    if m.boundary_dart is None:
        raise ValueError("simple_core needs a boundary face to mark the infinite side")
    cur = m
    while True:
        cyc = _find_defect(cur)
        if cyc is None:
            break
        cyc_edges = {min(d, int(cur.mate[d])) for d in cyc}
        face_of = cur.face_of_dart
        nf = len(cur.face_darts)
        adj: list[list[int]] = [[] for _ in range(nf)]
        for d in range(cur.n_darts):
            if min(d, int(cur.mate[d])) in cyc_edges:
                continue
            adj[face_of[d]].append(int(face_of[cur.mate[d]]))
        outer = np.zeros(nf, dtype=bool)
        start = cur.boundary_face
        outer[start] = True
        q = deque([start])
        while q:
            f = q.popleft()
            for g in adj[f]:
                if not outer[g]:
                    outer[g] = True
                    q.append(g)
        inner_dart = ~outer[face_of]
        on_outer = np.zeros(cur.n_vertices, dtype=bool)
        on_outer[cur.tail[~inner_dart]] = True
        keep = on_outer.copy()
        drop = set()
        for d in range(cur.n_darts):
            if inner_dart[d] and inner_dart[cur.mate[d]]:
                drop.add(d)
        if len(cyc) == 1:
            e = cyc[0]
            drop.update((e, int(cur.mate[e])))
        else:
            e = cyc[1]
            drop.update((e, int(cur.mate[e])))
        bd = cur.boundary_dart
        for _ in range(cur.n_darts):
            if bd not in drop:
                break
            bd = cur.face_next(bd)
        else:
            # the outer face is bounded by the defect alone: everything is enclosed
            raise CoreEmpty("the outer face is bounded only by a loop or double edge")
        keep[cur.tail[bd]] = True
        cur, _ = _restrict(cur, keep, drop, bd)
        if cur.n_edges == 0:
            raise CoreEmpty("every edge was excised")
    return cur


# -----------------------------------------------------------------------------
# Mass transport and rooting


def mass_transport_check(
    m: PlanarMap, transport: Callable[[PlanarMap, int, int], float]
) -> tuple[float, float]:
    """Exact expected mass out/in of the root for a uniformly rooted finite map."""
    n = m.n_vertices
    if n == 0:
        raise EmptyMap("map has no vertices")
    f = np.empty((n, n))
    for u in range(n):
        for v in range(n):
            x = float(transport(m, u, v))
            if not math.isfinite(x):
                raise NonFiniteTransport(f"f(G,{u},{v}) = {x}")
            f[u, v] = x
    out = math.fsum(math.fsum(f[u, :]) for u in range(n)) / n
    inn = math.fsum(math.fsum(f[:, u]) for u in range(n)) / n
    return out, inn


def root_distribution(m: PlanarMap, mode: str = "uniform") -> np.ndarray:
    n = m.n_vertices
    if n == 0:
        raise EmptyMap("map has no vertices")
    if mode == "uniform":
        return np.full(n, 1.0 / n)
    if mode == "degree_biased":
        deg = m.degrees().astype(float)
        if deg.sum() == 0:
            raise EmptyMap("map has no edges to bias by")
        return deg / deg.sum()
    raise ValueError(f"unknown root mode {mode!r}")


def choose_root(m: PlanarMap, mode: str = "uniform", seed: int = 0) -> RootedMap:
    p = root_distribution(m, mode)
    rng = make_rng(seed, "choose_root")
    root = int(rng.choice(m.n_vertices, p=p))
    return RootedMap(m, root, mode)
