"""Per-node self-recognition tables backed by a binomial heap.

A table rooted at node ``r`` holds every node reachable from ``r`` (``r``
itself excluded) keyed by ``(hop distance, id)``. Level 1 are the
children, level 2 the grandchildren and so on. Because the network is a
graph and not a tree a node may be reached from several nodes one level
closer; that relation is kept in ``discovered_via`` next to the heap.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Union

from .binomial_heap import BinomialHeap, HeapKey
from .kernels import bfs_levels
from .topology import GridNetwork, UnknownNode


class RecognitionError(Exception):
    pass


class StaleTable(RecognitionError):
    pass


class NoSupervisor(RecognitionError):
    pass


class Update(enum.Enum):
    APPLIED = "applied"
    NEEDS_FULL_REFRESH = "needs-full-refresh"


@dataclass
class ChangeSummary:
    added: set[int] = field(default_factory=set)
    removed: set[int] = field(default_factory=set)
    releveled: dict[int, tuple[int, int]] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.added or self.removed or self.releveled)


class RecognitionTable:
    def __init__(self, root: int, max_depth: Optional[int] = None) -> None:
        self.root = root
        self.max_depth = max_depth
        self.heap = BinomialHeap()
        self.level_of: dict[int, int] = {}
        self.discovered_via: dict[int, frozenset[int]] = {}
        self.epoch = 0
        self.stale = False
        # (network identity, network version) the table was last synced with.
        self._synced: Optional[tuple[int, int]] = None

    def __len__(self) -> int:
        return len(self.level_of)

    def __repr__(self) -> str:
        return f"RecognitionTable(root={self.root}, entries={len(self)}, epoch={self.epoch})"

    def contains(self, id: int) -> Optional[int]:
        return self.level_of.get(id)

    def nearest(self) -> Iterator[HeapKey]:
        """Entries in ``(distance, id)`` order, read straight off the heap."""
        return self.heap.iter_sorted()

    def children(self) -> list[int]:
        out = []
        for d, i in self.heap.iter_sorted():
            if d != 1:
                break
            out.append(i)
        return out

    def level(self, distance: int) -> list[int]:
        return sorted(i for i, d in self.level_of.items() if d == distance)

    def same_as(self, other: "RecognitionTable") -> bool:
        return (
            self.root == other.root
            and self.level_of == other.level_of
            and self.discovered_via == other.discovered_via
            and sorted(self.heap) == sorted(other.heap)
        )

    def dump(self) -> str:
        rows = sorted(self.level_of.items(), key=lambda kv: (kv[1], kv[0]))
        return "\n".join(
            f"{i} {d} discoverers={','.join(str(x) for x in sorted(self.discovered_via[i]))}"
            for i, d in rows
        )

    def _require_fresh(self) -> None:
        if self.stale:
            raise StaleTable(f"table for root {self.root} needs a full refresh")


def _scan(net: GridNetwork, root: int, max_depth: Optional[int]):
    levels = bfs_levels(net, root, max_depth)
    adj = net._adj
    disc = {}
    for v, d in levels.items():
        if v == root:
            continue
        disc[v] = frozenset(u for u in adj[v] if levels.get(u) == d - 1)
    del levels[root]
    return levels, disc


def build(net: GridNetwork, root: int, max_depth: Optional[int] = None) -> RecognitionTable:
    if root not in net:
        raise UnknownNode(root)
    table = RecognitionTable(root, max_depth)
    levels, disc = _scan(net, root, max_depth)
    for i, d in sorted(levels.items(), key=lambda kv: (kv[1], kv[0])):
        table.heap.insert(HeapKey(d, i))
    table.level_of = levels
    table.discovered_via = disc
    table._synced = (id(net), net.version)
    return table


def refresh(table: RecognitionTable, net: GridNetwork) -> ChangeSummary:
    """Bring ``table`` in line with ``net`` and bump its epoch."""
    if table.root not in net:
        raise UnknownNode(table.root)
    summary = ChangeSummary()
    if not table.stale and table._synced == (id(net), net.version):
        table.epoch += 1
        return summary

    levels, disc = _scan(net, table.root, table.max_depth)
    old = table.level_of
    heap = table.heap
    for i in old.keys() - levels.keys():
        heap.delete(heap.handle(i))
        summary.removed.add(i)
    for i, d in levels.items():
        before = old.get(i)
        if before is None:
            heap.insert(HeapKey(d, i))
            summary.added.add(i)
        elif before != d:
            h = heap.handle(i)
            if d < before:
                heap.decrease_key(h, HeapKey(d, i))
            else:
                heap.delete(h)
                heap.insert(HeapKey(d, i))
            summary.releveled[i] = (before, d)
    table.level_of = levels
    table.discovered_via = disc
    table.stale = False
    table._synced = (id(net), net.version)
    table.epoch += 1
    return summary


def on_node_left(table: RecognitionTable, id: int) -> Update:
    """Drop ``id`` with a heap delete when nobody else depends on it for their level.

    If some node was discovered only through ``id`` its level is about to
    change, so the table is marked stale and a full refresh is requested.
    """
    table._require_fresh()
    if id not in table.level_of:
        raise UnknownNode(id)
    disc = table.discovered_via
    if any(via == {id} for via in disc.values()):
        table.stale = True
        return Update.NEEDS_FULL_REFRESH
    table.heap.delete(table.heap.handle(id))
    del table.level_of[id]
    del disc[id]
    for v, via in disc.items():
        if id in via:
            disc[v] = via - {id}
    table._synced = None
    return Update.APPLIED


def on_node_joined(table: RecognitionTable, net: GridNetwork, id: int) -> Update:
    """Insert a newly attached node when that changes no other node's level."""
    table._require_fresh()
    if id not in net:
        raise UnknownNode(id)
    if id == table.root or id in table.level_of:
        raise ValueError(f"node {id} is already recognised by root {table.root}")
    levels = table.level_of
    known: dict[int, int] = {}
    unknown = []
    for u in net._adj[id]:
        if u == table.root:
            known[u] = 0
        elif u in levels:
            known[u] = levels[u]
        else:
            unknown.append(u)
    if not known:
        raise ValueError(f"node {id} has no edge into the region known to root {table.root}")
    level = min(known.values()) + 1
    limit = table.max_depth
    if limit is not None and level > limit:
        table._synced = None
        return Update.APPLIED
    within = limit is None or level + 1 <= limit
    if (unknown and within) or any(d > level + 1 for d in known.values()):
        table.stale = True
        return Update.NEEDS_FULL_REFRESH

    table.heap.insert(HeapKey(level, id))
    levels[id] = level
    table.discovered_via[id] = frozenset(u for u, d in known.items() if d == level - 1)
    for u, d in known.items():
        if d == level + 1:
            table.discovered_via[u] = table.discovered_via[u] | {id}
    table._synced = None
    return Update.APPLIED


Tables = Union[Mapping[int, RecognitionTable], Iterable[RecognitionTable]]


def supervisor_candidates(tables: Tables, failed: int, alive: Callable[[int], bool]):
    """``(distance, root)`` for every live root whose table holds ``failed``."""
    if isinstance(tables, Mapping):
        tables = tables.values()
    for t in tables:
        if t.root == failed or not alive(t.root):
            continue
        d = t.level_of.get(failed)
        if d is not None:
            yield d, t.root


def nearest_supervisor(tables: Tables, failed: int, alive: Callable[[int], bool]) -> int:
    """Live root holding ``failed`` at the smallest distance; ties go to the smaller id."""
    best = min(supervisor_candidates(tables, failed, alive), default=None)
    if best is None:
        raise NoSupervisor(failed)
    return best[1]
