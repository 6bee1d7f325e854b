"""Synchronous-tick simulation of failures, self-repair and supervisor repair.

Two repair strategies are compared on the same topology and the same
failure schedule:

* ``HeapTable``: every node keeps a recognition table. A detector looks up
  the nearest live node that recognises the failed node and, if that is
  itself, dispatches the repair. No search traffic is needed at failure
  time; the price is the periodic table-refresh exchange.
* ``FloodingBaseline``: no tables. The detector runs an echo wave (flood
  out, echo back) through the live network to elect the repairer.

Time model: messages sent at tick ``t`` arrive at ``t + 1``. Within a tick
the order is: scheduled completions, failure injection, agent control
loops in ascending id order, table refresh.
"""

from __future__ import annotations

import csv
import enum
import heapq
import io
import itertools
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .kernels import bfs_levels
from .recognition import NoSupervisor, RecognitionTable, build, refresh, supervisor_candidates
from .topology import GridNetwork, random_connected

# Heartbeats missed before a neighbour is reported as failed.
MISS_THRESHOLD = 2


class ConfigError(ValueError):
    pass


class Method(str, enum.Enum):
    HEAP_TABLE = "heap"
    FLOODING = "flooding"


class State(enum.Enum):
    HEALTHY = "healthy"
    FAILED = "failed"
    SELF_REPAIRING = "self-repairing"
    SUPERVISOR_REPAIRING = "supervisor-repairing"


@dataclass(frozen=True)
class SimConfig:
    node_count: int = 100
    extra_edge_fraction: float = 0.5
    seed: int = 42
    ticks: int = 500
    failure_rate: float = 0.01
    self_repair_prob: float = 0.3
    repair_window: int = 5
    refresh_interval: int = 10
    method: Method = Method.HEAP_TABLE

    def validate(self) -> "SimConfig":
        for name in ("node_count", "ticks", "repair_window", "refresh_interval"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")
        for name in ("failure_rate", "self_repair_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v!r}")
        if self.extra_edge_fraction < 0:
            raise ConfigError(f"extra_edge_fraction must be >= 0, got {self.extra_edge_fraction!r}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigError(f"seed must be an unsigned integer, got {self.seed!r}")
        try:
            Method(self.method)
        except ValueError:
            raise ConfigError(f"unknown method {self.method!r}") from None
        return self


@dataclass
class Metrics:
    failures_injected: int = 0
    self_repairs: int = 0
    supervisor_repairs: int = 0
    unrepaired: int = 0
    total_messages: int = 0
    mean_detection_latency: Optional[float] = None
    mean_repair_latency: Optional[float] = None
    heartbeat_messages: int = 0
    refresh_messages: int = 0
    repair_messages: int = 0
    dropped_observations: int = 0

    def balanced(self) -> bool:
        return self.self_repairs + self.supervisor_repairs + self.unrepaired == self.failures_injected


# -- agent side -----------------------------------------------------------


class Heartbeat(NamedTuple):
    sender: int
    targets: tuple[int, ...]


class FailureReport(NamedTuple):
    reporter: int
    failed: int


class DispatchRepair(NamedTuple):
    supervisor: int
    failed: int
    distance: int


class RequestFlood(NamedTuple):
    initiator: int
    failed: int


class Observations(NamedTuple):
    tick: int
    heard: Sequence[int]
    # Failed nodes some repairer has already claimed.
    claimed: frozenset[int] | set[int] = frozenset()
    # (distance, root) of the nearest live recogniser; None without tables.
    supervisor: Optional[Callable[[int], tuple[int, int]]] = None


@dataclass
class NodeAgent:
    id: int
    neighbors: tuple[int, ...]
    repair_window: int
    table: Optional[RecognitionTable] = None
    state: State = State.HEALTHY
    last_heard: dict[int, int] = field(default_factory=dict)
    reported: set[int] = field(default_factory=set)
    dropped: int = 0

    def reset(self, tick: int) -> None:
        self.last_heard = {n: tick for n in self.neighbors}
        self.reported.clear()


def step(agent: NodeAgent, obs: Observations) -> list:
    """One pass of the monitor / compare / decide / act loop.

    Monitor: record heartbeats. Compare: a neighbour silent for
    ``MISS_THRESHOLD`` ticks is reported; one silent past the self-repair
    grace window needs outside help. Decide and act: with tables, dispatch
    only if this node is the nearest live recogniser; without, ask for a
    flood.
    """
    if agent.state is not State.HEALTHY:
        return []
    actions: list = [Heartbeat(agent.id, agent.neighbors)]
    last = agent.last_heard
    for n in obs.heard:
        if n in last:
            last[n] = obs.tick
            agent.reported.discard(n)
        else:
            agent.dropped += 1
    escalate_after = MISS_THRESHOLD + agent.repair_window
    for n, heard_at in last.items():
        silence = obs.tick - heard_at
        if silence < MISS_THRESHOLD:
            continue
        if n not in agent.reported:
            agent.reported.add(n)
            actions.append(FailureReport(agent.id, n))
        if silence < escalate_after or n in obs.claimed:
            continue
        if obs.supervisor is None:
            actions.append(RequestFlood(agent.id, n))
            continue
        try:
            distance, sup = obs.supervisor(n)
        except NoSupervisor:
            continue
        if sup == agent.id:
            actions.append(DispatchRepair(agent.id, n, distance))
    return actions


# -- engine ---------------------------------------------------------------


@dataclass
class Incident:
    node: int
    tick: int
    heal: bool
    events: list[int] = field(default_factory=list)
    detected_at: Optional[int] = None
    resolved_at: Optional[int] = None
    repaired_by: Optional[int] = None  # None for self-repair


class Dispatch(NamedTuple):
    tick: int
    failed: int
    supervisor: int
    distance: int
    messages: int
    alive: frozenset[int]


@dataclass
class SimResult:
    config: SimConfig
    metrics: Metrics
    events: list[str]
    incidents: list[Incident]
    dispatches: list[Dispatch]

    def event_log(self) -> str:
        return "".join(line + "\n" for line in self.events)


def failure_schedule(config: SimConfig, ids: Sequence[int]) -> list[list[tuple[int, bool]]]:
    """Per tick, the ``(node, heals_itself)`` failure draws.

    Independent of the repair method, which is what lets both methods be
    compared on one failure set. Two spawned streams: one for failure
    draws (one per node per tick), one for the self-repair outcome.
    """
    fail_seq, heal_seq = np.random.SeedSequence(config.seed).spawn(2)
    fail_draws = np.random.default_rng(fail_seq).random((config.ticks, len(ids)))
    heal_rng = np.random.default_rng(heal_seq)
    out = []
    for row in fail_draws < config.failure_rate:
        hits = [ids[i] for i in np.flatnonzero(row)]
        heals = heal_rng.random(len(hits)) < config.self_repair_prob
        out.append(list(zip(hits, heals.tolist())))
    return out


class Simulation:
    def __init__(
        self,
        config: SimConfig,
        net: Optional[GridNetwork] = None,
        schedule: Optional[dict[int, list[tuple[int, bool]]]] = None,
    ) -> None:
        """``schedule`` (tick -> [(node, heals)]) replaces the random failure draws."""
        self.config = config.validate()
        self.method = Method(config.method)
        if net is None:
            net = random_connected(config.node_count, config.extra_edge_fraction, config.seed)
        self.net = net
        self.ids = net.nodes()
        if schedule is None:
            self.schedule = failure_schedule(config, self.ids)
        else:
            self.schedule = [list(schedule.get(t, ())) for t in range(config.ticks)]
        self.agents = {
            i: NodeAgent(i, tuple(sorted(net._adj[i])), config.repair_window) for i in self.ids
        }
        for a in self.agents.values():
            a.reset(0)
        self.metrics = Metrics()
        self.events: list[str] = []
        self.incidents: list[Incident] = []
        self.open: dict[int, Incident] = {}
        self.dispatches: list[Dispatch] = []
        self.claimed: set[int] = set()
        self._timers: list = []
        self._seq = itertools.count()
        self.tables: dict[int, RecognitionTable] = {}
        if self.method is Method.HEAP_TABLE:
            for i in self.ids:
                self.tables[i] = self.agents[i].table = build(net, i)
            rounds = max((max(t.level_of.values(), default=0) for t in self.tables.values()), default=0)
            cost = rounds * 2 * net.edge_count()
            self.metrics.refresh_messages += cost
            self._log(0, "*", "build", f"tables={len(self.tables)} rounds={rounds} messages={cost}")

    # -- helpers --------------------------------------------------------

    def _log(self, tick: int, node, event: str, detail: str = "") -> None:
        self.events.append(f"tick={tick} node={node} event={event} detail={detail}")

    def _at(self, tick: int, kind: str, *payload) -> None:
        heapq.heappush(self._timers, (tick, next(self._seq), kind, payload))

    def alive(self, node: int) -> bool:
        return self.agents[node].state is State.HEALTHY

    def _supervisor(self, failed: int) -> tuple[int, int]:
        best = min(supervisor_candidates(self.tables, failed, self.alive), default=None)
        if best is None:
            raise NoSupervisor(failed)
        return best

    # -- main loop ------------------------------------------------------

    def run(self) -> SimResult:
        cfg = self.config
        senders: set[int] = set()
        tick = 0
        horizon = 2 * cfg.ticks
        while tick < cfg.ticks or (self.open and tick < horizon):
            self._fire_timers(tick)
            if tick < cfg.ticks:
                self._inject(tick)
            senders = self._control_loops(tick, senders)
            if self.tables and tick > 0 and tick % cfg.refresh_interval == 0:
                self._refresh(tick)
            tick += 1
        self._finish(tick)
        return SimResult(cfg, self.metrics, self.events, self.incidents, self.dispatches)

    def _fire_timers(self, tick: int) -> None:
        while self._timers and self._timers[0][0] <= tick:
            _, _, kind, payload = heapq.heappop(self._timers)
            getattr(self, "_on_" + kind)(tick, *payload)

    def _inject(self, tick: int) -> None:
        for node, heal in self.schedule[tick]:
            self.metrics.failures_injected += 1
            agent = self.agents[node]
            if agent.state is not State.HEALTHY:
                self.open[node].events.append(tick)
                self._log(tick, node, "coalesce", f"state={agent.state.value}")
                continue
            inc = Incident(node, tick, heal, events=[tick])
            self.open[node] = inc
            self.incidents.append(inc)
            if heal:
                agent.state = State.SELF_REPAIRING
                self._at(tick + self.config.repair_window, "self_repair", node)
            else:
                agent.state = State.FAILED
            self._log(tick, node, "fail", f"heal={'yes' if heal else 'no'}")

    def _control_loops(self, tick: int, senders: set[int]) -> set[int]:
        sent: set[int] = set()
        lookup = self._supervisor if self.method is Method.HEAP_TABLE else None
        for i in self.ids:
            agent = self.agents[i]
            if agent.state is not State.HEALTHY:
                continue
            heard = [n for n in agent.neighbors if n in senders]
            obs = Observations(tick, heard, self.claimed, lookup)
            for action in step(agent, obs):
                self._apply(tick, action, sent)
        return sent

    def _apply(self, tick: int, action, sent: set[int]) -> None:
        if isinstance(action, Heartbeat):
            sent.add(action.sender)
            self.metrics.heartbeat_messages += len(action.targets)
        elif isinstance(action, FailureReport):
            inc = self.open.get(action.failed)
            if inc is not None and inc.detected_at is None:
                inc.detected_at = tick
                self._log(tick, action.failed, "detect", f"by={action.reporter}")
        elif isinstance(action, DispatchRepair):
            self._dispatch(tick, action.failed, action.supervisor, action.distance)
        elif isinstance(action, RequestFlood):
            self._flood(tick, action.initiator, action.failed)

    def _dispatch(self, tick: int, failed: int, sup: int, distance: int, extra: int = 0,
                  flooded: bool = False) -> None:
        agent = self.agents[failed]
        if agent.state is not State.FAILED:
            self.claimed.discard(failed)
            return
        if failed in self.claimed and not flooded:
            return
        self.claimed.add(failed)
        agent.state = State.SUPERVISOR_REPAIRING
        # Repair order travels out, completion acknowledgement travels back.
        cost = 2 * distance
        self.metrics.repair_messages += cost + extra
        alive = frozenset(i for i in self.ids if self.alive(i))
        self.dispatches.append(Dispatch(tick, failed, sup, distance, cost, alive))
        self._log(tick, failed, "dispatch", f"supervisor={sup} distance={distance} messages={cost}")
        self._at(tick + distance + self.config.repair_window, "supervisor_repair", failed, sup)

    def _flood(self, tick: int, initiator: int, failed: int) -> None:
        if failed in self.claimed or self.agents[failed].state is not State.FAILED:
            return
        self.claimed.add(failed)
        live = {i for i in self.ids if self.alive(i)}
        dist = bfs_levels(self.net, initiator, allowed=live)
        adj = self.net._adj
        edges = sum(1 for u in dist for v in adj[u] if v in dist) // 2
        rounds = max(dist.values())
        # Echo wave: every edge of the live component carries one message each way.
        cost = 2 * edges
        self.metrics.repair_messages += cost
        self._log(tick, failed, "flood", f"initiator={initiator} messages={cost} rounds={2 * rounds}")
        self._at(tick + 2 * rounds, "flood_done", failed, initiator, dist)

    def _on_flood_done(self, tick: int, failed: int, initiator: int, dist: dict[int, int]) -> None:
        adj = self.net._adj
        bids = [i for i in dist if i in adj[failed] and self.alive(i)]
        if not bids or not self.alive(initiator) or self.agents[failed].state is not State.FAILED:
            self.claimed.discard(failed)
            self._log(tick, failed, "flood-abandoned", f"initiator={initiator}")
            return
        sup = min(bids)
        hop = dist[sup]
        self._log(tick, failed, "assign", f"initiator={initiator} supervisor={sup} messages={hop}")
        if hop == 0:
            self._dispatch(tick, failed, sup, 1, flooded=True)
        else:
            self._at(tick + hop, "assigned", failed, sup, hop)

    def _on_assigned(self, tick: int, failed: int, sup: int, hop: int) -> None:
        if not self.alive(sup):
            self.claimed.discard(failed)
            self._log(tick, failed, "assign-lost", f"supervisor={sup}")
            return
        self._dispatch(tick, failed, sup, 1, extra=hop, flooded=True)

    def _on_self_repair(self, tick: int, node: int) -> None:
        self._resolve(tick, node, None)

    def _on_supervisor_repair(self, tick: int, node: int, sup: int) -> None:
        self._resolve(tick, node, sup)

    def _resolve(self, tick: int, node: int, sup: Optional[int]) -> None:
        inc = self.open.pop(node)
        inc.resolved_at = tick
        inc.repaired_by = sup
        self.claimed.discard(node)
        agent = self.agents[node]
        agent.state = State.HEALTHY
        agent.reset(tick)
        # Rejoin announcement, so neighbours stop counting silence at once.
        for n in agent.neighbors:
            self.agents[n].last_heard[node] = tick
            self.agents[n].reported.discard(node)
        self.metrics.heartbeat_messages += len(agent.neighbors)
        by = "self" if sup is None else str(sup)
        self._log(tick, node, "repaired", f"by={by} latency={tick - inc.tick} events={len(inc.events)}")

    def _refresh(self, tick: int) -> None:
        cost = 0
        refreshed = 0
        for i in self.ids:
            if not self.alive(i):
                continue
            refresh(self.tables[i], self.net)
            refreshed += 1
            cost += len(self.agents[i].neighbors)
        self.metrics.refresh_messages += cost
        self._log(tick, "*", "refresh", f"tables={refreshed} messages={cost}")

    def _finish(self, tick: int) -> None:
        m = self.metrics
        detect, repair = [], []
        for inc in self.incidents:
            if inc.detected_at is not None:
                detect.append(inc.detected_at - inc.tick)
            if inc.resolved_at is None:
                m.unrepaired += len(inc.events)
                continue
            if inc.repaired_by is None:
                m.self_repairs += len(inc.events)
            else:
                m.supervisor_repairs += len(inc.events)
            repair.extend(inc.resolved_at - t for t in inc.events)
        m.mean_detection_latency = float(np.mean(detect)) if detect else None
        m.mean_repair_latency = float(np.mean(repair)) if repair else None
        m.dropped_observations = sum(a.dropped for a in self.agents.values())
        m.total_messages = m.heartbeat_messages + m.refresh_messages + m.repair_messages
        self._log(tick, "*", "end", f"unrepaired={m.unrepaired}")


def simulate(config: SimConfig, net: Optional[GridNetwork] = None, schedule=None) -> SimResult:
    return Simulation(config, net, schedule).run()


def run(config: SimConfig, net: Optional[GridNetwork] = None) -> Metrics:
    return simulate(config, net).metrics


def run_baseline(config: SimConfig, net: Optional[GridNetwork] = None) -> Metrics:
    return run(replace(config, method=Method.FLOODING), net)


# -- comparison -------------------------------------------------------------

CSV_HEADER = [
    "seed", "method", "failures", "self_repairs", "supervisor_repairs",
    "unrepaired", "messages", "mean_detect", "mean_repair",
]


def _fmt(x: Optional[float]) -> str:
    return "n/a" if x is None else f"{x:.6f}"


def metrics_row(seed: int, method: Method, m: Metrics) -> list:
    return [
        seed, Method(method).value, m.failures_injected, m.self_repairs,
        m.supervisor_repairs, m.unrepaired, m.total_messages,
        _fmt(m.mean_detection_latency), _fmt(m.mean_repair_latency),
    ]


@dataclass
class ComparisonReport:
    seeds: list[int]
    heap: list[Metrics]
    baseline: list[Metrics]

    def _wins(self, attr: str) -> tuple[int, int]:
        wins = eligible = 0
        for h, b in zip(self.heap, self.baseline):
            if h.failures_injected == 0 or b.failures_injected == 0:
                continue
            hv, bv = getattr(h, attr), getattr(b, attr)
            if hv is None or bv is None:
                continue
            eligible += 1
            wins += hv < bv
        return wins, eligible

    @property
    def message_wins(self) -> tuple[int, int]:
        return self._wins("total_messages")

    @property
    def latency_wins(self) -> tuple[int, int]:
        return self._wins("mean_repair_latency")

    @staticmethod
    def _rate(pair: tuple[int, int]) -> Optional[float]:
        wins, eligible = pair
        return wins / eligible if eligible else None

    def summary(self) -> str:
        parts = []
        for label, pair in (("messages", self.message_wins), ("repair_latency", self.latency_wins)):
            rate = self._rate(pair)
            shown = "n/a" if rate is None else f"{rate:.3f} ({pair[0]}/{pair[1]})"
            parts.append(f"heap win-rate {label}={shown}")
        return " ".join(parts)

    def rows(self) -> list[list]:
        out = []
        for s, h, b in zip(self.seeds, self.heap, self.baseline):
            out.append(metrics_row(s, Method.HEAP_TABLE, h))
            out.append(metrics_row(s, Method.FLOODING, b))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(self.rows())
        return buf.getvalue()


def compare(config: SimConfig, seeds: Sequence[int], net: Optional[GridNetwork] = None) -> ComparisonReport:
    if not seeds:
        raise ConfigError("compare needs at least one seed")
    config.validate()
    heap, base = [], []
    for s in seeds:
        cfg = replace(config, seed=int(s))
        heap.append(run(replace(cfg, method=Method.HEAP_TABLE), net))
        base.append(run(replace(cfg, method=Method.FLOODING), net))
    return ComparisonReport([int(s) for s in seeds], heap, base)


def config_fields() -> list[str]:
    return [f.name for f in fields(SimConfig)]


def config_dict(config: SimConfig) -> dict:
    d = asdict(config)
    d["method"] = Method(config.method).value
    return d
