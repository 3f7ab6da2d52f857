"""Distance queries over port graphs: exact BFS, cached tables, change signs."""

from __future__ import annotations

from collections import deque
from enum import Enum

from .graphs import PortGraph


class DistanceDelta(Enum):
    """Sign of the distance change over one round."""

    DECREASED = "decreased"
    SAME = "same"
    INCREASED = "increased"


def delta(prev: int, curr: int) -> DistanceDelta:
    if prev < 0 or curr < 0:
        raise ValueError("distances are non-negative")
    if curr < prev:
        return DistanceDelta.DECREASED
    if curr > prev:
        return DistanceDelta.INCREASED
    return DistanceDelta.SAME


class TooLargeError(ValueError):
    """Graph exceeds the all-pairs table threshold."""


def bfs_distances(g: PortGraph, source: int, target: int | None = None) -> list[int]:
    """Distances from ``source`` to every node; stops early once ``target`` is set."""
    dist = [-1] * g.num_nodes
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        if v == target:
            break
        dv = dist[v]
        for p in g.ports(v):
            w, _ = g.neighbor(v, p)
            if dist[w] < 0:
                dist[w] = dv + 1
                queue.append(w)
    return dist


def all_pairs(g: PortGraph, max_nodes: int = 4096) -> list[list[int]]:
    """Full n-by-n distance table; refuses graphs above ``max_nodes``."""
    if g.num_nodes > max_nodes:
        raise TooLargeError(f"{g.num_nodes} nodes exceeds table threshold {max_nodes}")
    return [bfs_distances(g, s) for s in range(g.num_nodes)]


class DistanceOracle:
    """Per-run exact distance device over one immutable graph.

    Small graphs get a precomputed table; larger ones fall back to per-query
    BFS memoized on the (unordered) endpoint pair, which suits simulation
    queries whose endpoints drift one hop per round.
    """

    def __init__(self, g: PortGraph, table_threshold: int = 4096):
        self._g = g
        self._table: list[list[int]] | None = None
        self._memo: dict[tuple[int, int], int] = {}
        if g.num_nodes <= table_threshold:
            self._table = all_pairs(g, table_threshold)

    def distance(self, u: int, v: int) -> int:
        if self._table is not None:
            return self._table[u][v]
        if u == v:
            return 0
        key = (u, v) if u < v else (v, u)
        d = self._memo.get(key)
        if d is None:
            d = bfs_distances(self._g, key[0], target=key[1])[key[1]]
            self._memo[key] = d
        return d
