"""Brute-force reference solutions, independent of the package internals."""

from itertools import combinations

import numpy as np


class _UF:
    def __init__(self, items):
        self.parent = {v: v for v in items}

    def find(self, v):
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return v

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def is_acyclic(edges, vertices):
    uf = _UF(vertices)
    return all(uf.union(i, j) for i, j in edges)


def all_pairs(d):
    return list(combinations(range(d), 2))


def max_spanning_tree_weight(W):
    d = W.shape[0]
    best = -np.inf
    for sub in combinations(all_pairs(d), d - 1):
        if is_acyclic(sub, range(d)):
            best = max(best, sum(W[i, j] for i, j in sub))
    return best


def max_forest_weight(W, max_edges=None):
    """Best total weight over acyclic edge subsets with at most ``max_edges`` edges."""
    d = W.shape[0]
    max_edges = d - 1 if max_edges is None else max_edges
    best = 0.0
    pairs = all_pairs(d)
    for k in range(1, max_edges + 1):
        for sub in combinations(pairs, k):
            if is_acyclic(sub, range(d)):
                best = max(best, sum(W[i, j] for i, j in sub))
    return best


def components_edge_counts(edges, vertices):
    uf = _UF(vertices)
    for i, j in edges:
        uf.union(i, j)
    counts = {}
    for i, j in edges:
        r = uf.find(i)
        counts[r] = counts.get(r, 0) + 1
    return counts


def best_cut_set(tree_edges, kappa):
    """Max kept weight over all 2^E edge subsets whose components have <= kappa edges."""
    verts = {v for i, j, _ in tree_edges for v in (i, j)}
    best = 0.0
    E = len(tree_edges)
    for mask in range(1 << E):
        kept = [tree_edges[t] for t in range(E) if mask >> t & 1]
        counts = components_edge_counts([(i, j) for i, j, _ in kept], verts)
        if all(c <= kappa for c in counts.values()):
            best = max(best, sum(w for _, _, w in kept))
    return best


def best_restricted_forest(W, kappa):
    """Exact max-weight kappa-restricted forest via a DP over vertex subsets.

    A feasible forest splits the vertices into blocks of at most kappa + 1
    vertices; inside a block any acyclic edge set is feasible.
    """
    d = W.shape[0]
    cap = kappa + 1
    inner = {}
    for size in range(1, cap + 1):
        for block in combinations(range(d), size):
            pairs = list(combinations(block, 2))
            best = 0.0
            for k in range(1, size):
                for sub in combinations(pairs, k):
                    if is_acyclic(sub, block):
                        best = max(best, sum(W[i, j] for i, j in sub))
            mask = sum(1 << v for v in block)
            inner[mask] = best
    full = (1 << d) - 1
    f = {0: 0.0}
    for S in range(1, full + 1):
        low = S & -S
        rest = S ^ low
        best = -np.inf
        sub = rest
        while True:
            B = sub | low
            if B in inner:
                best = max(best, inner[B] + f[S ^ B])
            if sub == 0:
                break
            sub = (sub - 1) & rest
        f[S] = best
    return f[full]


def random_tree(n_vertices, rng, weight_sampler=None):
    weight_sampler = weight_sampler or (lambda: float(rng.uniform(0.1, 10.0)))
    edges = []
    for v in range(1, n_vertices):
        u = int(rng.integers(0, v))
        edges.append((u, v, weight_sampler()))
    return edges


def random_symmetric(d, rng, lo=0.0, hi=1.0):
    A = rng.uniform(lo, hi, (d, d))
    W = np.triu(A, 1)
    W = W + W.T
    return W
