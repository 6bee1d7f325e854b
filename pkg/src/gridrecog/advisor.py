"""Query escalation over recognition tables.

Each node carries a competence score per topic. A query starts at an
entry node, is shown to that node's recognition children, and escalates
outward (nearest first) until some node is competent enough or every
live node has been consulted.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

from .recognition import RecognitionTable
from .topology import ParseError


class AdvisorError(Exception):
    pass


class DeadNode(AdvisorError):
    pass


class NoAnswer(AdvisorError):
    def __init__(self, state: "QueryState") -> None:
        super().__init__(f"no live node reached the threshold; best {state.best_score} at {state.best_node}")
        self.state = state


class TraceStep(NamedTuple):
    node: int
    action: str
    best_score: float


@dataclass(frozen=True)
class QueryState:
    query_id: int
    topic: str
    best_score: float = 0.0
    best_node: Optional[int] = None
    trace: tuple[TraceStep, ...] = ()
    answered: bool = False

    @property
    def hops(self) -> int:
        return max(len(self.trace) - 1, 0)

    def beats(self, node: int, score: float) -> bool:
        if self.best_node is None:
            return True
        return score > self.best_score or (score == self.best_score and node < self.best_node)

    def visit(self, node: int, action: str, score: float) -> "QueryState":
        """Move the query to ``node``; its competence counts toward the best answer."""
        if self.beats(node, score):
            return replace(self, best_score=score, best_node=node,
                           trace=self.trace + (TraceStep(node, action, score),))
        return replace(self, trace=self.trace + (TraceStep(node, action, self.best_score),))

    def trace_table(self) -> str:
        rows = ["hop node action best"]
        rows += [f"{i} {s.node} {s.action} {s.best_score:.3f}" for i, s in enumerate(self.trace)]
        return "\n".join(rows)


@dataclass
class KnowledgeProfiles:
    scores: dict[int, dict[str, float]] = field(default_factory=dict)
    answer_threshold: float = 0.7

    def __post_init__(self) -> None:
        for node, topics in self.scores.items():
            for topic, s in topics.items():
                if not 0.0 <= s <= 1.0:
                    raise ValueError(f"competence of node {node} on {topic!r} is {s}, outside [0, 1]")

    def competence(self, node: int, topic: str) -> float:
        return self.scores.get(node, {}).get(topic, 0.0)

    def set(self, node: int, topic: str, score: float) -> None:
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"competence {score} outside [0, 1]")
        self.scores.setdefault(node, {})[topic] = score


def load_profiles(text: str, answer_threshold: float = 0.7) -> KnowledgeProfiles:
    """Parse ``node_id topic score`` lines (``#`` comments allowed)."""
    prof = KnowledgeProfiles(answer_threshold=answer_threshold)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(lineno, f"expected 'node_id topic score', got {raw.strip()!r}")
        try:
            node, score = int(parts[0]), float(parts[2])
        except ValueError:
            raise ParseError(lineno, f"bad number in {raw.strip()!r}") from None
        if node < 0 or not 0.0 <= score <= 1.0:
            raise ParseError(lineno, f"node id must be unsigned and score in [0, 1]: {raw.strip()!r}")
        prof.set(node, parts[1], score)
    return prof


def _tables(tables) -> Mapping[int, RecognitionTable]:
    if isinstance(tables, Mapping):
        return tables
    return {t.root: t for t in tables}


def _always(_: int) -> bool:
    return True


def retrieve(
    node: int,
    state: QueryState,
    tables,
    profiles: KnowledgeProfiles,
    alive: Callable[[int], bool] = _always,
    visited: Optional[set[int]] = None,
) -> QueryState:
    """Hand ``state`` to the recognition children of ``node`` and keep the better one.

    ``node`` is assumed to be where the query currently sits. Children that
    cannot improve on the current best leave the state untouched, and the
    very same object is returned. ``visited`` is shared across one query so
    no node is consulted twice.
    """
    if not alive(node):
        raise DeadNode(node)
    visited = set() if visited is None else visited
    visited.add(node)
    if state.best_score >= profiles.answer_threshold and state.best_node is not None:
        return state
    table = _tables(tables)[node]
    children = [c for c in table.children() if c not in visited and alive(c)]
    if not children:
        return state
    visited.update(children)
    # Children answer in parallel; the best reply (ties to the smaller id) wins.
    best = max(children, key=lambda c: (profiles.competence(c, state.topic), -c))
    score = profiles.competence(best, state.topic)
    if state.beats(best, score):
        return state.visit(best, "child", score)
    return state


def answer(
    entry_node: int,
    topic: str,
    tables,
    profiles: KnowledgeProfiles,
    alive: Callable[[int], bool] = _always,
    query_id: int = 0,
) -> QueryState:
    """Resolve a query starting at ``entry_node``, escalating outward as needed.

    Returns the final state; ``answered`` is False when no live node met
    the threshold (the state is still the best effort seen). Use
    :func:`answer_or_raise` for the exception form.
    """
    if not alive(entry_node):
        raise DeadNode(entry_node)
    tables = _tables(tables)
    threshold = profiles.answer_threshold
    visited: set[int] = set()
    state = QueryState(query_id, topic).visit(entry_node, "entry", profiles.competence(entry_node, topic))
    state = retrieve(entry_node, state, tables, profiles, alive, visited)
    if state.best_score < threshold:
        for _, target in tables[entry_node].nearest():
            if target in visited or not alive(target):
                continue
            state = state.visit(target, "escalate", profiles.competence(target, topic))
            state = retrieve(target, state, tables, profiles, alive, visited)
            if state.best_score >= threshold:
                break
    return replace(state, answered=state.best_score >= threshold)


def answer_or_raise(*args, **kwargs) -> QueryState:
    state = answer(*args, **kwargs)
    if not state.answered:
        raise NoAnswer(state)
    return state

