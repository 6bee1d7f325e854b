"""Command-line entry point.

Exit codes: 0 ok, 1 invariant violation or unanswered query, 2 usage,
parse or configuration error.
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

from .advisor import DeadNode, load_profiles, answer
from .binomial_heap import BinomialHeap, HeapError, HeapKey, SENTINEL, validate
from .recognition import build
from .simulator import CSV_HEADER, ConfigError, Method, SimConfig, compare, metrics_row, simulate
from .topology import GridNetwork, TopologyError, load_edgelist, random_connected, ring6_network, save_edgelist

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_SIM_KEYS = {f.name: f.type for f in fields(SimConfig)}
_PATH_KEYS = ("topology", "profiles", "csv", "events")


@dataclass(frozen=True)
class Scenario:
    config: SimConfig = field(default_factory=SimConfig)
    seeds: tuple[int, ...] = tuple(range(1, 31))
    topology: Optional[str] = None
    profiles: Optional[str] = None
    csv: Optional[str] = None
    events: Optional[str] = None


def parse_seeds(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            a, b = int(lo), int(hi)
            if b < a:
                raise ValueError(f"empty seed range {part}")
            out.extend(range(a, b + 1))
        else:
            out.append(int(part))
    if not out or any(s < 0 for s in out):
        raise ValueError("seeds must be a non-empty list of unsigned integers")
    return tuple(out)


def format_seeds(seeds: Sequence[int]) -> str:
    parts = []
    i = 0
    while i < len(seeds):
        j = i
        while j + 1 < len(seeds) and seeds[j + 1] == seeds[j] + 1:
            j += 1
        parts.append(str(seeds[i]) if j == i else f"{seeds[i]}-{seeds[j]}")
        i = j + 1
    return ",".join(parts)


def _coerce(key: str, raw: str):
    kind = _SIM_KEYS[key]
    if key == "method":
        return Method(raw)
    if kind in ("int", int):
        return int(raw)
    return float(raw)


def parse_scenario(text: str, base: Optional[Scenario] = None) -> Scenario:
    """Read ``key = value`` lines (``#`` comments) on top of ``base``."""
    scen = base or Scenario()
    sim: dict = {}
    extra: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _SIM_KEYS:
                sim[key] = _coerce(key, value)
            elif key == "seeds":
                extra[key] = parse_seeds(value)
            elif key in _PATH_KEYS:
                extra[key] = value or None
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from None
    config = replace(scen.config, **sim)
    config.validate()
    return replace(scen, config=config, **extra)


def dump_scenario(scen: Scenario) -> str:
    lines = []
    for f in fields(SimConfig):
        v = getattr(scen.config, f.name)
        lines.append(f"{f.name} = {Method(v).value if f.name == 'method' else v}")
    lines.append(f"seeds = {format_seeds(scen.seeds)}")
    for key in _PATH_KEYS:
        v = getattr(scen, key)
        if v is not None:
            lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


# -- commands -------------------------------------------------------------


def cmd_heap_selftest(size: int, seed: int, corrupt: bool = False, out=None) -> int:
    """Random insert/extract/delete/decrease_key traffic checked against a sorted list."""
    out = out or sys.stdout
    rng = random.Random(seed)
    heap = BinomialHeap()
    oracle: dict[int, HeapKey] = {}
    ops = violations = 0

    def check(label: str, against_oracle: bool = True) -> None:
        nonlocal violations
        report = validate(heap)
        if not report.ok:
            violations += len(report.violations)
            for v in report.violations:
                print(f"violation after {label}: {v}", file=out)
        if against_oracle and sorted(heap) != sorted(oracle.values()):
            violations += 1
            print(f"violation after {label}: contents differ from oracle", file=out)

    ids = rng.sample(range(size * 4 + 1), size)
    for i in ids:
        key = HeapKey(rng.randrange(64), i)
        heap.insert(key)
        oracle[i] = key
        ops += 1
        check("insert")
    while oracle:
        op = rng.random()
        if op < 0.4:
            got = heap.extract_min()
            want = min(oracle.values())
            if got != want:
                violations += 1
                print(f"violation after extract_min: got {tuple(got)} want {tuple(want)}", file=out)
            oracle.pop(want.id, None)
            label = "extract_min"
        elif op < 0.7:
            i = rng.choice(sorted(oracle))
            heap.delete(heap.handle(i))
            del oracle[i]
            label = "delete"
        else:
            i = rng.choice(sorted(oracle))
            if oracle[i].distance == 0:
                continue
            key = HeapKey(rng.randrange(oracle[i].distance), i)
            heap.decrease_key(heap.handle(i), key)
            oracle[i] = key
            label = "decrease_key"
        ops += 1
        check(label)

    if corrupt:
        for i in range(8):
            heap.insert(HeapKey(i + 1, i))
        ops += 8
        leaf = heap.head
        while leaf.child is not None:
            leaf = leaf.child
        leaf.key = SENTINEL
        check("planted defect", against_oracle=False)
    print(f"ops={ops} violations={violations}", file=out)
    return EXIT_OK if violations == 0 else EXIT_FAIL


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _network(args) -> GridNetwork:
    if getattr(args, "figure2", False):
        return ring6_network()
    if not args.topology:
        raise ConfigError("give --figure2 or --topology PATH")
    return load_edgelist(_read(args.topology))


def cmd_recognize(net: GridNetwork, root: int, max_depth: Optional[int] = None) -> str:
    return build(net, root, max_depth).dump()


def cmd_advise(net: GridNetwork, profiles_text: str, entry: int, topic: str,
               threshold: float = 0.7, out=None) -> int:
    out = out or sys.stdout
    profiles = load_profiles(profiles_text, threshold)
    if entry not in net:
        raise TopologyError(f"unknown entry node {entry}")
    tables = {i: build(net, i) for i in net.nodes()}
    state = answer(entry, topic, tables, profiles)
    print(state.trace_table(), file=out)
    status = "answered" if state.answered else "no-answer"
    print(f"{status} node={state.best_node} score={state.best_score:.3f} hops={state.hops}", file=out)
    return EXIT_OK if state.answered else EXIT_FAIL


def _scenario(args) -> Scenario:
    scen = Scenario()
    if getattr(args, "scenario", None):
        scen = parse_scenario(_read(args.scenario), scen)
    overrides = {k: getattr(args, k) for k in _SIM_KEYS if getattr(args, k, None) is not None}
    if overrides:
        scen = replace(scen, config=replace(scen.config, **overrides))
    if getattr(args, "seeds", None):
        scen = replace(scen, seeds=parse_seeds(args.seeds))
    for key in _PATH_KEYS:
        if getattr(args, key, None):
            scen = replace(scen, **{key: getattr(args, key)})
    scen.config.validate()
    if args.dump_config:
        Path(args.dump_config).write_text(dump_scenario(scen), encoding="utf-8")
    return scen


def _write(path: Optional[str], text: str, out) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        out.write(text)


def cmd_simulate(scen: Scenario, out=None) -> int:
    out = out or sys.stdout
    net = load_edgelist(_read(scen.topology)) if scen.topology else None
    result = simulate(scen.config, net)
    row = metrics_row(scen.config.seed, scen.config.method, result.metrics)
    text = ",".join(CSV_HEADER) + "\n" + ",".join(str(x) for x in row) + "\n"
    _write(scen.csv, text, out)
    if scen.events:
        Path(scen.events).write_text(result.event_log(), encoding="utf-8")
    return EXIT_OK


def cmd_compare(scen: Scenario, out=None) -> int:
    out = out or sys.stdout
    net = load_edgelist(_read(scen.topology)) if scen.topology else None
    report = compare(scen.config, scen.seeds, net)
    _write(scen.csv, report.to_csv(), out)
    if scen.events:
        logs = []
        for s in scen.seeds:
            for m in Method:
                cfg = replace(scen.config, seed=s, method=m)
                logs.append(f"# seed={s} method={m.value}\n")
                logs.append(simulate(cfg, net).event_log())
        Path(scen.events).write_text("".join(logs), encoding="utf-8")
    print(report.summary(), file=out if scen.csv else sys.stderr)
    return EXIT_OK


def cmd_gen_topology(n: int, fraction: float, seed: int) -> str:
    return save_edgelist(random_connected(n, fraction, seed))


# -- argument parsing -------------------------------------------------------


def _add_topology(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--figure2", action="store_true", help="use the built-in six-node network")
    g.add_argument("--topology", help="edge-list file")


def _add_scenario(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", nargs="?", help="scenario file (key = value lines)")
    for name, kind in _SIM_KEYS.items():
        opt = "--" + name.replace("_", "-")
        if name == "method":
            p.add_argument(opt, dest=name, type=Method, choices=list(Method))
        else:
            p.add_argument(opt, dest=name, type=int if kind in ("int", int) else float)
    p.add_argument("--seeds", help="e.g. 1-30 or 1,4,9")
    p.add_argument("--topology", help="edge-list file instead of a generated network")
    p.add_argument("--csv", help="metrics CSV output path (stdout if omitted)")
    p.add_argument("--events", help="event log output path")
    p.add_argument("--dump-config", help="write the effective scenario to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridrecog", description="Binomial-heap recognition tables for self-healing grid networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("heap-selftest", help="randomised binomial heap invariant check")
    p.add_argument("--size", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corrupt", action="store_true", help="plant a heap-order defect")

    p = sub.add_parser("recognize", help="print a node's recognition table")
    _add_topology(p)
    p.add_argument("root", type=int)
    p.add_argument("--max-depth", type=int)

    p = sub.add_parser("simulate", help="run one simulation, print its metrics row")
    _add_scenario(p)

    p = sub.add_parser("compare", help="heap tables vs flooding across seeds")
    _add_scenario(p)

    p = sub.add_parser("advise", help="route a query through the recognition tables")
    _add_topology(p)
    p.add_argument("--profiles", required=True, help="lines of 'node_id topic score'")
    p.add_argument("--entry", type=int, required=True)
    p.add_argument("--topic", required=True)
    p.add_argument("--threshold", type=float, default=0.7)

    p = sub.add_parser("gen-topology", help="write a random connected edge list")
    p.add_argument("--nodes", type=int, default=100)
    p.add_argument("--extra-edge-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "heap-selftest":
            if args.size < 0:
                raise ConfigError("--size must be >= 0")
            return cmd_heap_selftest(args.size, args.seed, args.corrupt)
        if args.command == "recognize":
            print(cmd_recognize(_network(args), args.root, args.max_depth))
            return EXIT_OK
        if args.command == "simulate":
            return cmd_simulate(_scenario(args))
        if args.command == "compare":
            return cmd_compare(_scenario(args))
        if args.command == "advise":
            return cmd_advise(_network(args), _read(args.profiles), args.entry, args.topic, args.threshold)
        if args.command == "gen-topology":
            _write(args.out, cmd_gen_topology(args.nodes, args.extra_edge_fraction, args.seed), sys.stdout)
            return EXIT_OK
    except (ConfigError, TopologyError, DeadNode, HeapError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
