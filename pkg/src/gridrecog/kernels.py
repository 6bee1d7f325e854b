"""Breadth-first search kernels shared by recognition and the simulator."""

from __future__ import annotations

from typing import Container, Optional

from .topology import GridNetwork


def bfs_levels(
    net: GridNetwork,
    source: int,
    max_depth: Optional[int] = None,
    allowed: Optional[Container[int]] = None,
) -> dict[int, int]:
    """Hop distance from ``source`` to every node it reaches.

    ``allowed`` restricts the walk to a node subset (the source is always
    included); ``max_depth`` stops expansion at that level.
    """
    adj = net._adj
    dist = {source: 0}
    frontier = [source]
    depth = 0
    while frontier and (max_depth is None or depth < max_depth):
        depth += 1
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in dist and (allowed is None or v in allowed):
                    dist[v] = depth
                    nxt.append(v)
        frontier = nxt
    return dist
