"""Forests, Chow-Liu (Kruskal) construction and held-out-weight forests."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Tuple

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .errors import DataError

Edge = Tuple[int, int, float]


def _normalize(edge) -> Edge:
    i, j, w = edge
    i, j = int(i), int(j)
    if i == j:
        raise DataError(f"self-loop on vertex {i}")
    return (min(i, j), max(i, j), float(w))


@dataclass
class Forest:
    """An acyclic edge list on vertices ``0 .. d-1``.

    Edges are stored as ``(i, j, weight)`` with ``i < j`` in insertion order.
    Construction fails if the edges contain a cycle.
    """

    d: int
    edges: List[Edge] = field(default_factory=list)

    def __post_init__(self):
        self.edges = [_normalize(e) for e in self.edges]
        if len(self.edges) > max(self.d - 1, 0):
            raise DataError(f"{len(self.edges)} edges cannot form a forest on {self.d} vertices")
        ds = DisjointSet(range(self.d))
        for i, j, _ in self.edges:
            if not (0 <= i < self.d and 0 <= j < self.d):
                raise DataError(f"edge ({i}, {j}) outside vertex range 0..{self.d - 1}")
            if not ds.merge(i, j):
                raise DataError(f"edge ({i}, {j}) closes a cycle")

    def __len__(self):
        return len(self.edges)

    @property
    def weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def edge_set(self):
        return {(i, j) for i, j, _ in self.edges}

    def components(self) -> List[List[int]]:
        """Vertex lists of the connected components, ordered by smallest vertex."""
        ds = DisjointSet(range(self.d))
        for i, j, _ in self.edges:
            ds.merge(i, j)
        comps = [sorted(c) for c in ds.subsets()]
        return sorted(comps, key=lambda c: c[0])

    def component_edges(self) -> List[List[Edge]]:
        """Edge lists per component (isolated vertices omitted)."""
        comps = self.components()
        where = {v: idx for idx, comp in enumerate(comps) for v in comp}
        out = [[] for _ in comps]
        for e in self.edges:
            out[where[e[0]]].append(e)
        return [es for es in out if es]

    def subforest(self, keep) -> "Forest":
        return Forest(self.d, [e for e in self.edges if keep(e)])


@dataclass
class ForestSequence:
    """The nested Chow-Liu forests ``E^(0) ⊂ E^(1) ⊂ ...`` as one ordered edge list."""

    d: int
    edges: List[Edge]

    def __len__(self):
        return len(self.edges)

    def prefix(self, k: int) -> Forest:
        if not 0 <= k <= len(self.edges):
            raise IndexError(f"k must lie in 0..{len(self.edges)}")
        return Forest(self.d, self.edges[:k])

    def forests(self) -> Iterable[Forest]:
        for k in range(len(self.edges) + 1):
            yield self.prefix(k)


def _weights_array(weights) -> np.ndarray:
    entries = getattr(weights, "entries", weights)
    entries = np.asarray(entries, dtype=float)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise DataError("weight matrix must be square")
    if not np.all(np.isfinite(entries)):
        raise DataError("weight matrix has non-finite entries")
    return entries


def sorted_pairs(weights) -> List[Edge]:
    """Upper-triangle pairs by non-increasing weight, ties broken by ``(i, j)``."""
    W = _weights_array(weights)
    iu, ju = np.triu_indices(W.shape[0], k=1)
    w = W[iu, ju]
    # lexsort: last key is primary
    order = np.lexsort((ju, iu, -w))
    return [(int(iu[t]), int(ju[t]), float(w[t])) for t in order]


def kruskal(weights, accept=None, stop=None) -> List[Edge]:
    """Greedy maximum-weight acyclic insertion.

    ``accept(edge, chosen)`` can veto an edge; ``stop(edge)`` ends the scan.
    """
    W = _weights_array(weights)
    d = W.shape[0]
    ds = DisjointSet(range(d))
    chosen: List[Edge] = []
    for edge in sorted_pairs(W):
        if len(chosen) == d - 1:
            break
        if stop is not None and stop(edge):
            break
        i, j, _ = edge
        if ds.connected(i, j):
            continue
        if accept is not None and not accept(edge, chosen):
            continue
        ds.merge(i, j)
        chosen.append(edge)
    return chosen


def chow_liu(weights) -> ForestSequence:
    """Maximum-weight spanning tree, keeping the insertion order as nested prefixes."""
    W = _weights_array(weights)
    return ForestSequence(W.shape[0], kruskal(W))


def build_heldout_forest(cross_weights) -> Forest:
    """Kruskal on held-out cross weights, stopping at the first weight <= 0.

    The result is a maximum-weight forest over all forests of the complete
    graph, since negative edges can only lower the total.
    """
    W = _weights_array(cross_weights)
    return Forest(W.shape[0], kruskal(W, stop=lambda e: e[2] <= 0))
