"""Undirected grid network: adjacency sets, generators and edge-list I/O."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator, Optional

import numpy as np


class TopologyError(Exception):
    pass


class DuplicateNode(TopologyError):
    pass


class UnknownNode(TopologyError):
    def __str__(self) -> str:
        return f"unknown node {self.args[0]}" if self.args else "unknown node"


class DuplicateEdge(TopologyError):
    pass


class UnknownEdge(TopologyError):
    pass


class SelfLoop(TopologyError):
    def __init__(self, node: int, line: Optional[int] = None) -> None:
        where = f" at line {line}" if line is not None else ""
        super().__init__(f"self-loop on node {node}{where}")
        self.node = node
        self.line = line


class ParseError(TopologyError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class GridNetwork:
    """Simple undirected graph over integer node ids.

    ``version`` increases on every mutation so derived views (CSR arrays,
    recognition tables) can tell whether they are still current.
    """

    def __init__(self, nodes: Iterable[int] = (), edges: Iterable[tuple[int, int]] = ()) -> None:
        self._adj: dict[int, set[int]] = {}
        self.version = 0
        self._csr = None
        for n in nodes:
            self.add_node(n)
        for u, v in edges:
            for n in (u, v):
                if n not in self._adj:
                    self.add_node(n)
            self.add_edge(u, v)

    def _touch(self) -> None:
        self.version += 1
        self._csr = None

    def add_node(self, id: int) -> None:
        id = int(id)
        if id < 0:
            raise ValueError(f"node ids are unsigned, got {id}")
        if id in self._adj:
            raise DuplicateNode(id)
        self._adj[id] = set()
        self._touch()

    def remove_node(self, id: int) -> None:
        nbrs = self._adj.pop(id, None)
        if nbrs is None:
            raise UnknownNode(id)
        for v in nbrs:
            self._adj[v].discard(id)
        self._touch()

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise SelfLoop(u)
        au, av = self._pair(u, v)
        if v in au:
            raise DuplicateEdge((u, v))
        au.add(v)
        av.add(u)
        self._touch()

    def remove_edge(self, u: int, v: int) -> None:
        if u == v:
            raise SelfLoop(u)
        au, av = self._pair(u, v)
        if v not in au:
            raise UnknownEdge((u, v))
        au.discard(v)
        av.discard(u)
        self._touch()

    def _pair(self, u: int, v: int) -> tuple[set[int], set[int]]:
        for n in (u, v):
            if n not in self._adj:
                raise UnknownNode(n)
        return self._adj[u], self._adj[v]

    def neighbors(self, id: int) -> set[int]:
        try:
            return set(self._adj[id])
        except KeyError:
            raise UnknownNode(id) from None

    def degree(self, id: int) -> int:
        try:
            return len(self._adj[id])
        except KeyError:
            raise UnknownNode(id) from None

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def __contains__(self, id: int) -> bool:
        return id in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._adj))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridNetwork):
            return NotImplemented
        return self._adj == other._adj

    def __repr__(self) -> str:
        return f"GridNetwork(nodes={len(self)}, edges={self.edge_count()})"

    def nodes(self) -> list[int]:
        return sorted(self._adj)

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u, nb in self._adj.items() for v in nb if u < v)

    def edge_count(self) -> int:
        return sum(len(nb) for nb in self._adj.values()) // 2

    def copy(self) -> "GridNetwork":
        out = GridNetwork()
        out._adj = {u: set(nb) for u, nb in self._adj.items()}
        return out

    def adjacency(self) -> dict[int, frozenset[int]]:
        """Read-only snapshot of the adjacency map."""
        return {u: frozenset(nb) for u, nb in self._adj.items()}

    def csr(self):
        """Cached ``(ids, index, indptr, indices)``; ids ascending, ``index`` maps id to row."""
        if self._csr is None:
            ids = np.array(sorted(self._adj), dtype=np.int64)
            index = {int(n): i for i, n in enumerate(ids)}
            indptr = np.zeros(len(ids) + 1, dtype=np.int64)
            flat: list[int] = []
            for i, n in enumerate(ids):
                nb = sorted(index[v] for v in self._adj[int(n)])
                flat.extend(nb)
                indptr[i + 1] = len(flat)
            indices = np.array(flat, dtype=np.int64)
            self._csr = (ids, index, indptr, indices)
        return self._csr

    def bfs_distances(self, source: int) -> dict[int, int]:
        if source not in self._adj:
            raise UnknownNode(source)
        dist = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            d = dist[u] + 1
            for v in self._adj[u]:
                if v not in dist:
                    dist[v] = d
                    queue.append(v)
        return dist

    def is_connected(self) -> bool:
        if not self._adj:
            return True
        return len(self.bfs_distances(next(iter(self._adj)))) == len(self._adj)


def ring6_network() -> GridNetwork:
    """The six-node grid used throughout the worked examples.

    Adjacency: 2 touches 1 and 3, 1 reaches 4, 3 reaches 6, and 5 sits
    between 4 and 6, which closes a 6-cycle.
    """
    return GridNetwork(
        nodes=range(1, 7),
        edges=[(1, 2), (2, 3), (1, 4), (4, 5), (5, 6), (3, 6)],
    )


def random_connected(n: int, extra_edge_fraction: float = 0.0, seed: int = 0) -> GridNetwork:
    """Random spanning tree by uniform attachment plus ``floor(fraction * n)`` extra edges.

    Nodes are numbered ``1..n``. If the requested number of extra edges
    exceeds what the complete graph allows, the result is complete.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if extra_edge_fraction < 0:
        raise ValueError("extra_edge_fraction must be >= 0")
    rng = np.random.default_rng(seed)
    order = rng.permutation(np.arange(1, n + 1)).tolist()
    net = GridNetwork(nodes=range(1, n + 1))
    for i in range(1, n):
        j = int(rng.integers(i))
        net.add_edge(order[i], order[j])

    want = int(np.floor(extra_edge_fraction * n))
    free = n * (n - 1) // 2 - (n - 1)
    want = min(want, free)
    if want == 0:
        return net
    if want * 2 > free:
        # Dense request: sample from the explicit complement instead of rejecting.
        missing = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)
                   if not net.has_edge(u, v)]
        for k in sorted(rng.choice(len(missing), size=want, replace=False).tolist()):
            net.add_edge(*missing[k])
        return net
    added = 0
    while added < want:
        u, v = (int(x) for x in rng.integers(1, n + 1, size=2))
        if u == v or net.has_edge(u, v):
            continue
        net.add_edge(u, v)
        added += 1
    return net


def load_edgelist(text: str) -> GridNetwork:
    """Parse ``u v`` lines; ``#`` starts a comment, a lone id declares an isolated node."""
    net = GridNetwork()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            ids = [int(p) for p in parts]
        except ValueError:
            raise ParseError(lineno, f"expected integer node ids, got {raw.strip()!r}") from None
        if len(ids) not in (1, 2) or any(i < 0 for i in ids):
            raise ParseError(lineno, f"expected 'u v', got {raw.strip()!r}")
        if len(ids) == 2 and ids[0] == ids[1]:
            raise SelfLoop(ids[0], line=lineno)
        for i in ids:
            if i not in net:
                net.add_node(i)
        if len(ids) == 2:
            if net.has_edge(*ids):
                raise ParseError(lineno, f"duplicate edge {ids[0]} {ids[1]}")
            net.add_edge(*ids)
    return net


def save_edgelist(net: GridNetwork) -> str:
    lines = [f"{u} {v}" for u, v in net.edges()]
    lines += [str(n) for n in net.nodes() if net.degree(n) == 0]
    return "\n".join(lines) + ("\n" if lines else "")
