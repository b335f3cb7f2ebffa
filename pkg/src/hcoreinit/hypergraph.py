"""Bipartite incidence graphs and (k,l)-hypercore decompositions.

A hypergraph is stored as its bipartite incidence graph: left nodes are
hyperedges, right nodes are vertices, and an edge (e, v, w) with weight
w > 0 records that vertex v belongs to hyperedge e.  All decompositions
rank the right side only; left nodes merely stop counting once fewer
than ``l`` incident right nodes remain.

Peeling returns the maximal (not maximal-connected) fixed point, so a
disconnected graph keeps every component that survives the thresholds.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

__all__ = [
    "WeightedIncidenceGraph",
    "CoreVector",
    "khypercore",
    "hcore_numbers",
    "whcore_numbers",
    "brute_force_core",
]

# Guards for the exponential oracle: node count, and incident-edge count
# per node (the weighted candidate set enumerates subset sums).
BRUTE_FORCE_MAX_RIGHT = 16
BRUTE_FORCE_MAX_INCIDENT = 20


class WeightedIncidenceGraph:
    """Immutable bipartite graph with nonnegative edge weights.

    Duplicate (left, right) pairs are merged by summing their weights at
    construction; zero-weight edges are dropped (they carry no weighted
    degree but would distort hyperedge-cardinality pruning).  Node ids
    need not be dense: subgraphs keep the ids of the parent graph.
    """

    __slots__ = ("_left_adj", "_right_adj", "_left_ids", "_right_ids")

    def __init__(
        self,
        edges: Iterable[tuple[int, int, float]] = (),
        num_left: int | None = None,
        num_right: int | None = None,
        *,
        left_ids: Iterable[int] | None = None,
        right_ids: Iterable[int] | None = None,
    ):
        if num_left is not None and left_ids is not None:
            raise ValueError("pass num_left or left_ids, not both")
        if num_right is not None and right_ids is not None:
            raise ValueError("pass num_right or right_ids, not both")

        left_adj: dict[int, dict[int, float]] = {}
        right_adj: dict[int, dict[int, float]] = {}
        max_left = -1
        max_right = -1
        for left, right, weight in edges:
            left = int(left)
            right = int(right)
            weight = float(weight)
            if left < 0 or right < 0:
                raise ValueError(f"negative node id in edge ({left}, {right})")
            if weight < 0:
                raise ValueError(f"negative weight {weight} on edge ({left}, {right})")
            row = left_adj.setdefault(left, {})
            row[right] = row.get(right, 0.0) + weight
            max_left = max(max_left, left)
            max_right = max(max_right, right)

        # Drop zero-weight entries after duplicate merging.
        for left in list(left_adj):
            row = left_adj[left]
            for right in [r for r, w in row.items() if w == 0.0]:
                del row[right]
        for left, row in left_adj.items():
            for right, weight in row.items():
                right_adj.setdefault(right, {})[left] = weight

        if left_ids is not None:
            self._left_ids = tuple(sorted(set(int(i) for i in left_ids)))
        else:
            count = (max_left + 1) if num_left is None else int(num_left)
            self._left_ids = tuple(range(count))
        if right_ids is not None:
            self._right_ids = tuple(sorted(set(int(i) for i in right_ids)))
        else:
            count = (max_right + 1) if num_right is None else int(num_right)
            self._right_ids = tuple(range(count))

        known_left = set(self._left_ids)
        known_right = set(self._right_ids)
        for left, row in left_adj.items():
            if left not in known_left:
                raise ValueError(f"edge references unknown left node {left}")
            for right in row:
                if right not in known_right:
                    raise ValueError(f"edge references unknown right node {right}")

        self._left_adj = {i: left_adj.get(i, {}) for i in self._left_ids}
        self._right_adj = {i: right_adj.get(i, {}) for i in self._right_ids}

    @property
    def left_ids(self) -> tuple[int, ...]:
        return self._left_ids

    @property
    def right_ids(self) -> tuple[int, ...]:
        return self._right_ids

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Yield (left, right, weight) triples in sorted order."""
        for left in self._left_ids:
            row = self._left_adj[left]
            for right in sorted(row):
                yield left, right, row[right]

    def edge_count(self) -> int:
        return sum(len(row) for row in self._left_adj.values())

    def right_degree(self, right: int, weighted: bool = False) -> float:
        """Hyperdegree of a vertex: count (or weight sum) of incident edges."""
        row = self._right_adj[right]
        if weighted:
            return sum(row[left] for left in sorted(row))
        return len(row)

    def left_cardinality(self, left: int) -> int:
        """Number of right nodes still incident to hyperedge ``left``."""
        return len(self._left_adj[left])

    def right_neighbors(self, right: int) -> Mapping[int, float]:
        return self._right_adj[right]

    def left_neighbors(self, left: int) -> Mapping[int, float]:
        return self._left_adj[left]

    def subgraph(self, keep_left: Iterable[int], keep_right: Iterable[int]) -> "WeightedIncidenceGraph":
        """Induced subgraph on the given node sets, preserving ids."""
        keep_left = set(keep_left)
        keep_right = set(keep_right)
        edges = [
            (left, right, weight)
            for left, right, weight in self.edges()
            if left in keep_left and right in keep_right
        ]
        return WeightedIncidenceGraph(
            edges,
            left_ids=[i for i in self._left_ids if i in keep_left],
            right_ids=[i for i in self._right_ids if i in keep_right],
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedIncidenceGraph):
            return NotImplemented
        return (
            self._left_ids == other._left_ids
            and self._right_ids == other._right_ids
            and self._left_adj == other._left_adj
        )

    def __hash__(self):  # adjacency dicts are mutable internals only
        raise TypeError("WeightedIncidenceGraph is not hashable")

    def __repr__(self) -> str:
        return (
            f"WeightedIncidenceGraph(left={len(self._left_ids)}, "
            f"right={len(self._right_ids)}, edges={self.edge_count()})"
        )


@dataclass(frozen=True)
class CoreVector:
    """Core number per right node; integer-valued for hcore, real for WHcore."""

    values: dict[int, float]
    l: int = 2
    weighted: bool = False

    def __getitem__(self, right: int) -> float:
        return self.values[right]

    def items(self) -> list[tuple[int, float]]:
        return sorted(self.values.items())

    def as_dict(self) -> dict[int, float]:
        return dict(self.values)


def _validate_kl(k: float, l: int) -> None:
    if not isinstance(l, int) or l < 1:
        raise ValueError(f"hyperedge threshold l must be an integer >= 1, got {l!r}")
    if k < 0:
        raise ValueError(f"degree threshold k must be >= 0, got {k}")


class _PeelState:
    """Mutable adjacency copy used by the deletion algorithms."""

    __slots__ = ("left_adj", "right_adj", "left_alive", "right_alive", "right_deg", "left_card")

    def __init__(self, graph: WeightedIncidenceGraph, weighted: bool):
        self.left_adj = {i: dict(graph.left_neighbors(i)) for i in graph.left_ids}
        self.right_adj = {i: dict(graph.right_neighbors(i)) for i in graph.right_ids}
        self.left_alive = {i: True for i in graph.left_ids}
        self.right_alive = {i: True for i in graph.right_ids}
        if weighted:
            self.right_deg = {
                i: sum((self.right_adj[i][x] for x in sorted(self.right_adj[i])), 0.0)
                for i in graph.right_ids
            }
        else:
            self.right_deg = {i: float(len(self.right_adj[i])) for i in graph.right_ids}
        self.left_card = {i: len(self.left_adj[i]) for i in graph.left_ids}

    def remove_left(self, left: int, weighted: bool) -> list[int]:
        """Delete a hyperedge; returns right nodes whose degree changed."""
        self.left_alive[left] = False
        touched = []
        for right in sorted(self.left_adj[left]):
            if not self.right_alive[right]:
                continue
            weight = self.right_adj[right].pop(left)
            self.right_deg[right] -= weight if weighted else 1.0
            touched.append(right)
        self.left_adj[left] = {}
        return touched

    def remove_right(self, right: int) -> list[int]:
        """Delete a vertex; returns left nodes whose cardinality changed."""
        self.right_alive[right] = False
        touched = []
        for left in sorted(self.right_adj[right]):
            if not self.left_alive[left]:
                continue
            del self.left_adj[left][right]
            self.left_card[left] -= 1
            touched.append(left)
        self.right_adj[right] = {}
        return touched


def khypercore(
    graph: WeightedIncidenceGraph,
    k: float,
    l: int = 2,
    weighted: bool = False,
) -> WeightedIncidenceGraph:
    """Maximal subgraph with right degree >= k and left cardinality >= l.

    Computed as the fixed point of alternately deleting violating right
    and left nodes; deletions are monotone, so the result is unique and
    independent of order.
    """
    _validate_kl(k, l)
    state = _PeelState(graph, weighted)
    pending_rights = [r for r in graph.right_ids if state.right_deg[r] < k]
    pending_lefts = [x for x in graph.left_ids if state.left_card[x] < l]
    while pending_rights or pending_lefts:
        while pending_lefts:
            left = pending_lefts.pop()
            if not state.left_alive[left]:
                continue
            for right in state.remove_left(left, weighted):
                if state.right_deg[right] < k:
                    pending_rights.append(right)
        while pending_rights:
            right = pending_rights.pop()
            if not state.right_alive[right]:
                continue
            for left in state.remove_right(right):
                if state.left_card[left] < l:
                    pending_lefts.append(left)
    return graph.subgraph(
        [x for x in graph.left_ids if state.left_alive[x]],
        [r for r in graph.right_ids if state.right_alive[r]],
    )


def hcore_numbers(
    graph: WeightedIncidenceGraph,
    ignore_weights: bool = True,
    l: int = 2,
) -> CoreVector:
    """Core number of every right node: the largest k whose (k,l)-hypercore
    still contains the node.

    The unweighted path peels with integer thresholds k = 1, 2, ...; a right
    node deleted during stage k receives core number k - 1.  With
    ``ignore_weights=False`` this delegates to :func:`whcore_numbers`.
    """
    if not ignore_weights:
        return whcore_numbers(graph, l=l)
    _validate_kl(0, l)
    state = _PeelState(graph, weighted=False)
    cores = {r: 0.0 for r in graph.right_ids}
    k = 1
    remaining = len(graph.right_ids)
    while remaining:
        pending_rights = [r for r in graph.right_ids if state.right_alive[r] and state.right_deg[r] < k]
        pending_lefts = [
            x for x in graph.left_ids if state.left_alive[x] and state.left_card[x] < l
        ]
        while pending_rights or pending_lefts:
            while pending_lefts:
                left = pending_lefts.pop()
                if not state.left_alive[left]:
                    continue
                for right in state.remove_left(left, weighted=False):
                    if state.right_deg[right] < k:
                        pending_rights.append(right)
            while pending_rights:
                right = pending_rights.pop()
                if not state.right_alive[right]:
                    continue
                cores[right] = float(k - 1)
                remaining -= 1
                for left in state.remove_right(right):
                    if state.left_card[left] < l:
                        pending_lefts.append(left)
        k += 1
    return CoreVector(values=cores, l=l, weighted=False)


def whcore_numbers(graph: WeightedIncidenceGraph, l: int = 2) -> CoreVector:
    """Real-valued core numbers via min-degree peeling with a running max.

    Repeatedly delete the right node of minimum current weighted degree
    (ties broken by smallest id), record max(running_max, degree), and
    prune hyperedges that fall below ``l`` incident right nodes.
    """
    _validate_kl(0, l)
    state = _PeelState(graph, weighted=True)
    cores: dict[int, float] = {}

    def prune_lefts(seeds: list[int], heap: list[tuple[float, int]]) -> None:
        stack = [x for x in seeds if state.left_alive[x] and state.left_card[x] < l]
        while stack:
            left = stack.pop()
            if not state.left_alive[left]:
                continue
            for right in state.remove_left(left, weighted=True):
                heapq.heappush(heap, (state.right_deg[right], right))

    heap: list[tuple[float, int]] = []
    prune_lefts(list(graph.left_ids), heap)
    for right in graph.right_ids:
        heapq.heappush(heap, (state.right_deg[right], right))

    running = 0.0
    while heap:
        degree, right = heapq.heappop(heap)
        if not state.right_alive[right] or degree != state.right_deg[right]:
            continue
        running = max(running, degree)
        cores[right] = running
        touched = state.remove_right(right)
        prune_lefts(touched, heap)
    return CoreVector(values=cores, l=l, weighted=True)


def _subset_sums(weights: list[float]) -> set[float]:
    sums = {0.0}
    for w in weights:
        sums |= {s + w for s in sums}
    return sums


def brute_force_core(
    graph: WeightedIncidenceGraph,
    weighted: bool = False,
    l: int = 2,
) -> CoreVector:
    """Ground-truth core numbers from the membership definition.

    Sweeps every attainable degree threshold in increasing order, maintains
    the (k,l) fixed point by direct deletion, and records for each right
    node the largest threshold at which it was still a member.  Exponential
    in the incident-edge counts; refuses graphs with more than
    ``BRUTE_FORCE_MAX_RIGHT`` right nodes.
    """
    _validate_kl(0, l)
    if len(graph.right_ids) > BRUTE_FORCE_MAX_RIGHT:
        raise ValueError(
            f"brute_force_core refuses graphs with more than "
            f"{BRUTE_FORCE_MAX_RIGHT} right nodes (got {len(graph.right_ids)})"
        )

    if weighted:
        candidates: set[float] = {0.0}
        for right in graph.right_ids:
            incident = [w for _, w in sorted(graph.right_neighbors(right).items())]
            if len(incident) > BRUTE_FORCE_MAX_INCIDENT:
                raise ValueError(
                    f"brute_force_core refuses right nodes with more than "
                    f"{BRUTE_FORCE_MAX_INCIDENT} incident edges (node {right} "
                    f"has {len(incident)})"
                )
            candidates |= _subset_sums(incident)
        tolerance = 1e-10
    else:
        max_degree = max(
            (int(graph.right_degree(r)) for r in graph.right_ids), default=0
        )
        candidates = {float(k) for k in range(max_degree + 1)}
        tolerance = 0.0

    state = _PeelState(graph, weighted)
    cores = {r: 0.0 for r in graph.right_ids}

    # Initial prune at threshold 0: only the hyperedge-cardinality rule binds.
    pending_lefts = [x for x in graph.left_ids if state.left_card[x] < l]
    pending_rights: list[int] = []
    for k in sorted(candidates):
        # Tolerant comparison: a degree equal to the threshold up to float
        # round-off is a member (thresholds and degrees are the same sums
        # computed along different paths).
        cutoff = k - tolerance * (1.0 + abs(k))
        pending_rights.extend(
            r for r in graph.right_ids if state.right_alive[r] and state.right_deg[r] < cutoff
        )
        while pending_rights or pending_lefts:
            while pending_lefts:
                left = pending_lefts.pop()
                if not state.left_alive[left]:
                    continue
                for right in state.remove_left(left, weighted):
                    if state.right_deg[right] < cutoff:
                        pending_rights.append(right)
            while pending_rights:
                right = pending_rights.pop()
                if not state.right_alive[right]:
                    continue
                for left in state.remove_right(right):
                    if state.left_card[left] < l:
                        pending_lefts.append(left)
        for right in graph.right_ids:
            if state.right_alive[right]:
                cores[right] = k
        if not any(state.right_alive[r] for r in graph.right_ids):
            break
    if not weighted:
        cores = {r: float(int(round(c))) for r, c in cores.items()}
    return CoreVector(values=cores, l=l, weighted=weighted)
