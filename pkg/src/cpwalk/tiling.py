"""Exact packing of the infinite d-regular triangulation (d >= 7) and walks on it.

Every circle of the packing has hyperbolic radius ``r*`` (``equilateral_radius``)
and the packing is invariant under a discrete group of disc automorphisms.
A vertex is therefore an SU(1,1) matrix ``g = [[alpha, beta], [conj(beta),
conj(alpha)]]`` sending the root circle (centred at 0) to its circle, and the
``j``-th neighbour of ``g`` is ``g @ step(j)`` with

    step(j) = rotate(2 pi j / d) @ translate(2 r*) @ rotate(pi).

The trailing half turn makes index 0 point back to the previous vertex.  The
matrix entries grow like ``exp(d_hyp / 2)``, so states are stored as
``exp(s) * (A, B)`` with ``|A| = 1``; everything the analysis needs comes out
in log scale, which lets 2000-step walks run without underflow even though
``1 - |z|`` is far below machine precision.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .hypgeo import equilateral_radius
from .rng import make_rng


def _rotate(theta):
    return np.array([[cmath.exp(0.5j * theta), 0], [0, cmath.exp(-0.5j * theta)]])


def _translate(t):
    return np.array([[math.cosh(t / 2), math.sinh(t / 2)], [math.sinh(t / 2), math.cosh(t / 2)]],
                    dtype=complex)


def _dist_from_state(B, s):
    """Distance 2 acosh(e^s) = 2 asinh(e^s |B|) of a state from the root.

    The asinh form is exact near 0; the log form avoids overflow for huge s.
    """
    s = np.maximum(np.asarray(s, dtype=float), 0.0)  # rounding can leave s = -1e-17
    small = 2 * np.arcsinh(np.exp(np.minimum(s, 30.0)) * np.abs(B))
    large = 2 * (s + np.log1p(np.sqrt(-np.expm1(-2 * s))))
    return np.where(s < 30.0, small, large)


@dataclass(frozen=True, eq=False)
class TilingPath:
    """Walk on the regular tiling with its geometry recorded in log scale.

    ``choices[t]`` is the neighbour index taken at step ``t``; vertex ``n``
    is the word ``start + tuple(choices[:n])``.  Arrays have one entry per
    visited vertex ``X_0..X_N``.
    """

    start: tuple
    choices: np.ndarray
    seed: int
    stream: tuple
    dist_from_start: np.ndarray  # d_hyp(z_h(X_0), z_h(X_n))
    neg_log_r: np.ndarray  # -log of the Euclidean radius
    log_gap_h: np.ndarray  # log(1 - |z_h(X_n)|)
    log_gap: np.ndarray  # log(1 - |z(X_n)|), Euclidean centre
    angle: np.ndarray  # arg z(X_n)
    degree: int
    stopped: bool = False

    def __len__(self):
        return len(self.neg_log_r)

    @property
    def steps(self) -> int:
        return len(self.choices)

    def word(self, n: int) -> tuple:
        return tuple(self.start) + tuple(int(c) for c in self.choices[:n])


class RegularTiling:
    """Circle packing of the d-regular triangulation, root circle centred at 0.

    The root's neighbours sit at angles ``2 pi j / d``, so the packing has
    exact d-fold rotational symmetry about the root.
    """

    def __init__(self, degree: int = 7):
        if degree < 7:
            raise ValueError("the d-regular triangulation packs in the disc only for d >= 7")
        self.degree = degree
        self.radius = equilateral_radius(degree)
        self.euclid_root_radius = math.tanh(self.radius / 2)
        tr = _translate(2 * self.radius) @ _rotate(math.pi)
        self.step_matrices = [_rotate(2 * math.pi * j / degree) @ tr for j in range(degree)]
        self._a = np.array([m[0, 0] for m in self.step_matrices])
        self._b = np.array([m[0, 1] for m in self.step_matrices])
        self._states = {}
        self._max_states = 200_000

    # -- vertex states -------------------------------------------------------

    def state(self, word) -> tuple[complex, complex, float]:
        """(A, B, s) of the vertex reached from the root by the index word.

        States are memoized, so walking a word one letter at a time costs
        one step per call.
        """
        word = tuple(int(j) for j in word)
        hit = self._states.get(word)
        if hit is not None:
            return hit
        parent = self._states.get(word[:-1]) if word else None
        if parent is not None:
            A, B, s = (np.array([x]) for x in parent)
            rest = word[-1:]
        else:
            A, B, s = np.array([1 + 0j]), np.array([0j]), np.array([0.0])
            rest = word
        for j in rest:
            A, B, s = self._advance(A, B, s, np.array([j]))
        out = complex(A[0]), complex(B[0]), float(s[0])
        if len(self._states) >= self._max_states:
            self._states.clear()
        self._states[word] = out
        return out

    def _advance(self, A, B, s, j):
        a, b = self._a[j], self._b[j]
        A2 = A * a + B * np.conj(b)
        B2 = A * b + B * np.conj(a)
        norm = np.abs(A2)
        return A2 / norm, B2 / norm, s + np.log(norm)

    def neighbors(self, word) -> list[tuple]:
        return [tuple(word) + (j,) for j in range(self.degree)]

    def center(self, word) -> tuple[complex, float]:
        """(hyperbolic centre, Euclidean radius) of a vertex; fine for shallow words."""
        A, B, s = self.state(word)
        alpha, beta = A * math.exp(s), B * math.exp(s)
        z_h = beta / alpha.conjugate()
        rho = self.euclid_root_radius
        r = rho / (abs(alpha) ** 2 - abs(beta) ** 2 * rho * rho)
        return z_h, r

    # -- geometry in log scale ----------------------------------------------

    def _geometry(self, B, s):
        rs = self.radius
        d0 = _dist_from_state(B, s)
        neg_log_r = -math.log(self.euclid_root_radius) + 2 * s + np.log1p(
            -(np.abs(B) ** 2) * self.euclid_root_radius ** 2)
        log_gap_h = -2 * s - np.log1p(np.abs(B))
        # Euclidean centre: midpoint of the radial extremes tanh((d0 -+ r*)/2)
        log_gap = np.logaddexp(-np.logaddexp(d0 - rs, 0.0), -np.logaddexp(d0 + rs, 0.0))
        return neg_log_r, log_gap_h, log_gap

    def ring_constant(self) -> float:
        """sup over edges u -> v of log(r_v / r_u) / d for Euclidean radii.

        Attained along radial edges; approaches ``2 r* / d`` far out.
        """
        rs = self.radius
        d = np.linspace(0.0, 20.0, 2001)

        def rad(x):
            return 0.5 * (np.tanh((x + rs) / 2) - np.tanh((x - rs) / 2))

        ratio = np.log(rad(d) / rad(d + 2 * rs))
        return float(max(ratio.max(), 2 * rs)) / self.degree

    # -- walks ---------------------------------------------------------------

    def walks(self, n_walks: int, steps: int, seed: int, start=(), eps: float | None = None,
              streams=None) -> list[TilingPath]:
        """Simple random walks from the vertex ``start``.

        With ``eps`` a walk stops at the first vertex with ``1 - |z| < eps``.
        Walk ``i`` uses the stream ``streams[i]`` (default ``(i,)``), so it is
        the same whether run alone or in a batch.
        """
        if streams is None:
            streams = [(i,) for i in range(n_walks)]
        streams = [tuple(x) if isinstance(x, (tuple, list)) else (x,) for x in streams]
        n_walks = len(streams)
        d = self.degree
        A0, B0, s0 = self.state(start)
        log_eps = math.log(eps) if eps is not None else None
        if log_eps is not None and self._geometry(np.array([B0]), np.array([s0]))[2][0] < log_eps:
            steps = 0  # every walk stops at its start; no choices are drawn
        C = np.empty((n_walks, steps), dtype=np.int64)
        for i, st in enumerate(streams if steps else ()):
            C[i] = make_rng(seed, "tiling_walk", *st).integers(0, d, size=steps)
        A = np.full(n_walks, A0)
        B = np.full(n_walks, B0)
        s = np.full(n_walks, s0)
        Ar, Br, sr = np.ones(n_walks, complex), np.zeros(n_walks, complex), np.zeros(n_walks)
        dist = np.zeros((n_walks, steps + 1))
        nlr = np.empty((n_walks, steps + 1))
        lgh = np.empty((n_walks, steps + 1))
        lg = np.empty((n_walks, steps + 1))
        ang = np.empty((n_walks, steps + 1))
        nlr[:, 0], lgh[:, 0], lg[:, 0] = self._geometry(B, s)
        ang[:, 0] = np.angle(B) + np.angle(A)
        length = np.full(n_walks, steps + 1)
        active = np.ones(n_walks, dtype=bool)
        if log_eps is not None:
            hit = lg[:, 0] < log_eps
            length[hit] = 1
            active &= ~hit
        for t in range(steps):
            idx = np.nonzero(active)[0]
            if len(idx) == 0:
                break
            j = C[idx, t]
            A[idx], B[idx], s[idx] = self._advance(A[idx], B[idx], s[idx], j)
            Ar[idx], Br[idx], sr[idx] = self._advance(Ar[idx], Br[idx], sr[idx], j)
            dist[idx, t + 1] = _dist_from_state(Br[idx], sr[idx])
            nlr[idx, t + 1], lgh[idx, t + 1], lg[idx, t + 1] = self._geometry(B[idx], s[idx])
            ang[idx, t + 1] = np.angle(B[idx]) + np.angle(A[idx])
            if log_eps is not None:
                hit = lg[idx, t + 1] < log_eps
                length[idx[hit]] = t + 2
                active[idx[hit]] = False
        out = []
        for i in range(n_walks):
            n = length[i]
            out.append(TilingPath(tuple(start), C[i, :n - 1].copy(), seed, streams[i], dist[i, :n].copy(),
                                  nlr[i, :n].copy(), lgh[i, :n].copy(), lg[i, :n].copy(),
                                  np.mod(ang[i, :n], 2 * np.pi), d,
                                  stopped=log_eps is not None and bool(lg[i, n - 1] < log_eps)))
        return out
