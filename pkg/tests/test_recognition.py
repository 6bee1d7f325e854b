import random

import pytest

from gridrecog.binomial_heap import validate
from gridrecog.recognition import (
    NoSupervisor,
    StaleTable,
    Update,
    build,
    nearest_supervisor,
    on_node_joined,
    on_node_left,
    refresh,
)
from gridrecog.topology import GridNetwork, UnknownNode, random_connected, ring6_network

from conftest import net_oracle


def oracle_levels(net, root):
    d = net_oracle(net, root)
    del d[root]
    return d


def naive_left(table, gone):
    """What removing ``gone`` without re-levelling anyone would leave behind."""
    levels = {i: d for i, d in table.level_of.items() if i != gone}
    return levels


def check_table(table, net):
    assert table.level_of == oracle_levels(net, table.root)
    assert validate(table.heap).ok
    assert sorted(table.heap) == sorted((d, i) for i, d in table.level_of.items())
    assert table.root not in table.level_of and table.root not in table.heap
    for i, d in table.level_of.items():
        closer = {u for u in net.neighbors(i) if (0 if u == table.root else table.level_of.get(u)) == d - 1}
        assert table.discovered_via[i] == closer and closer
    if table.level_of:
        assert table.heap.minimum().distance == 1


class TestBuild:
    def test_ring_root2(self, ring):
        t = build(ring, 2)
        assert t.level_of == {1: 1, 3: 1, 4: 2, 6: 2, 5: 3}
        assert t.discovered_via[5] == {4, 6}
        assert t.discovered_via[4] == {1} and t.discovered_via[1] == {2}
        check_table(t, ring)

    def test_isolated_root(self):
        t = build(GridNetwork(nodes=[4]), 4)
        assert len(t) == 0 and len(t.heap) == 0

    def test_ring_root5(self, ring):
        t = build(ring, 5)
        assert t.level_of == oracle_levels(ring, 5) == {4: 1, 6: 1, 1: 2, 3: 2, 2: 3}

    def test_unknown_root(self, ring):
        with pytest.raises(UnknownNode):
            build(ring, 99)

    def test_deterministic(self):
        net = random_connected(80, 0.4, 3)
        assert build(net, 7).dump() == build(net, 7).dump()

    def test_max_depth(self, ring):
        t = build(ring, 2, max_depth=2)
        assert t.level_of == {1: 1, 3: 1, 4: 2, 6: 2}

    def test_dump(self, ring):
        assert build(ring, 2).dump().splitlines() == [
            "1 1 discoverers=2",
            "3 1 discoverers=2",
            "4 2 discoverers=1",
            "6 2 discoverers=3",
            "5 3 discoverers=4,6",
        ]

    def test_children_and_levels(self, ring):
        t = build(ring, 2)
        assert t.children() == [1, 3]
        assert t.level(2) == [4, 6]
        assert [tuple(k) for k in t.nearest()] == [(1, 1), (1, 3), (2, 4), (2, 6), (3, 5)]

    def test_bfs_random(self):
        rng = random.Random(0)
        for _ in range(10):
            net = random_connected(rng.randint(1, 120), rng.random(), rng.randrange(1000))
            for root in net.nodes():
                check_table(build(net, root), net)


class TestRefresh:
    def test_unchanged(self, ring):
        t = build(ring, 2)
        s = refresh(t, ring)
        assert not s and t.epoch == 1
        s = refresh(t, ring.copy())
        assert not s and t.epoch == 2

    def test_after_remove_5(self, ring):
        t = build(ring, 2)
        ring.remove_node(5)
        s = refresh(t, ring)
        assert s.removed == {5} and s.added == set() and s.releveled == {}
        check_table(t, ring)

    def test_after_shortcut(self, ring):
        t = build(ring, 2)
        ring.add_edge(2, 5)
        s = refresh(t, ring)
        assert s.releveled == {5: (3, 1)}
        check_table(t, ring)

    def test_level_increase_and_additions(self, ring):
        t = build(ring, 2)
        ring.remove_edge(1, 2)
        ring.add_node(8)
        ring.add_edge(8, 6)
        s = refresh(t, ring)
        assert s.added == {8}
        assert s.releveled == {1: (1, 5), 4: (2, 4)}
        check_table(t, ring)

    def test_root_vanished(self, ring):
        t = build(ring, 2)
        ring.remove_node(2)
        with pytest.raises(UnknownNode):
            refresh(t, ring)

    def test_random_churn(self):
        rng = random.Random(4)
        net = random_connected(60, 0.3, 4)
        t = build(net, 1)
        nxt = 1000
        for _ in range(80):
            r = rng.random()
            if r < 0.3:
                cand = [n for n in net.nodes() if n != 1]
                if cand:
                    net.remove_node(rng.choice(cand))
            elif r < 0.6:
                net.add_node(nxt)
                net.add_edge(nxt, rng.choice(net.nodes()[:-1] or [1]))
                nxt += 1
            else:
                u, v = rng.sample(net.nodes(), 2)
                if not net.has_edge(u, v):
                    net.add_edge(u, v)
            refresh(t, net)
            check_table(t, net)


class TestIncremental:
    def test_leaf_leaves(self):
        net = ring6_network()
        net.add_node(7)
        net.add_edge(7, 5)
        t = build(net, 2)
        assert on_node_left(t, 7) is Update.APPLIED
        net.remove_node(7)
        check_table(t, net)

    def test_node4_leaves_is_applied(self, ring):
        # 5 keeps level 3 through 6, so nothing needs re-levelling.
        t = build(ring, 2)
        assert on_node_left(t, 4) is Update.APPLIED
        ring.remove_node(4)
        assert t.level_of == oracle_levels(ring, 2)
        assert t.discovered_via[5] == {6}
        check_table(t, ring)

    def test_node1_leaves_needs_refresh(self, ring):
        t = build(ring, 2)
        naive = naive_left(t, 1)
        assert on_node_left(t, 1) is Update.NEEDS_FULL_REFRESH
        assert t.stale
        ring.remove_node(1)
        assert naive != oracle_levels(ring, 2)
        with pytest.raises(StaleTable):
            on_node_left(t, 3)
        refresh(t, ring)
        assert not t.stale
        check_table(t, ring)

    def test_join_at_level_two(self, ring):
        t = build(ring, 2)
        ring.add_node(9)
        ring.add_edge(9, 1)
        assert on_node_joined(t, ring, 9) is Update.APPLIED
        assert t.contains(9) == 2
        check_table(t, ring)

    def test_join_that_shortcuts(self, ring):
        t = build(ring, 2)
        ring.add_node(9)
        ring.add_edge(9, 1)
        ring.add_edge(9, 5)
        # 9 lands on level 2 and 5 stays on 3, so nothing else moves.
        assert on_node_joined(t, ring, 9) is Update.APPLIED
        check_table(t, ring)

    def test_join_relevels_third_party(self):
        net = GridNetwork(nodes=range(1, 6), edges=[(1, 2), (2, 3), (3, 4), (4, 5)])
        t = build(net, 1)
        net.add_node(6)
        net.add_edge(6, 1)
        net.add_edge(6, 5)
        assert on_node_joined(t, net, 6) is Update.NEEDS_FULL_REFRESH
        refresh(t, net)
        check_table(t, net)

    def test_join_errors(self, ring):
        t = build(ring, 2)
        with pytest.raises(UnknownNode):
            on_node_joined(t, ring, 50)
        ring.add_node(50)
        with pytest.raises(ValueError):
            on_node_joined(t, ring, 50)
        with pytest.raises(ValueError):
            on_node_joined(t, ring, 4)
        with pytest.raises(UnknownNode):
            on_node_left(t, 50)

    def test_random_sequences_equal_rebuild(self):
        rng = random.Random(21)
        for trial in range(40):
            net = random_connected(rng.randint(3, 40), rng.random(), trial)
            root = rng.choice(net.nodes())
            t = build(net, root)
            nxt = 500
            for _ in range(15):
                if t.stale:
                    refresh(t, net)
                if rng.random() < 0.5 and t.level_of:
                    gone = rng.choice(sorted(t.level_of))
                    naive = naive_left(t, gone)
                    res = on_node_left(t, gone)
                    net.remove_node(gone)
                    if res is Update.NEEDS_FULL_REFRESH:
                        assert naive != oracle_levels(net, root)
                    else:
                        check_table(t, net)
                else:
                    known = [root] + sorted(t.level_of)
                    net.add_node(nxt)
                    for v in rng.sample(known, min(len(known), rng.randint(1, 3))):
                        net.add_edge(nxt, v)
                    if on_node_joined(t, net, nxt) is Update.APPLIED:
                        check_table(t, net)
                    nxt += 1


class TestContains:
    def test_values(self, ring):
        t = build(ring, 2)
        assert t.contains(5) == 3
        assert t.contains(2) is None
        assert t.contains(99) is None


class TestNearestSupervisor:
    def tables(self, net):
        return {r: build(net, r) for r in net.nodes()}

    def test_all_alive(self, ring):
        assert nearest_supervisor(self.tables(ring), 5, lambda n: True) == 4

    def test_only_2_alive(self, ring):
        assert nearest_supervisor(self.tables(ring), 5, lambda n: n == 2) == 2

    def test_isolated(self, ring):
        ring.add_node(7)
        with pytest.raises(NoSupervisor):
            nearest_supervisor(self.tables(ring), 7, lambda n: True)

    def test_brute_force(self):
        rng = random.Random(8)
        for trial in range(60):
            net = random_connected(rng.randint(2, 50), rng.random(), trial)
            tables = self.tables(net)
            live = {n for n in net.nodes() if rng.random() < 0.6}
            failed = rng.choice(net.nodes())
            cands = [(net_oracle(net, r)[failed], r) for r in live if r != failed]
            if not cands:
                with pytest.raises(NoSupervisor):
                    nearest_supervisor(tables, failed, live.__contains__)
                continue
            assert nearest_supervisor(tables, failed, live.__contains__) == min(cands)[1]
