"""Truncated regular trees as weighted graphs."""
import numpy as np
import scipy.sparse as sp

from cpwalk.walker import WeightedGraphView


def regular_tree(d: int, depth: int) -> WeightedGraphView:
    rows, cols = [], []
    frontier, nxt = [0], 1
    for _ in range(depth):
        new = []
        for v in frontier:
            for _ in range(d if v == 0 else d - 1):
                rows += [v, nxt]
                cols += [nxt, v]
                new.append(nxt)
                nxt += 1
        frontier = new
    return WeightedGraphView(sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(nxt, nxt)))
