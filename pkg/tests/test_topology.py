import random

import pytest
from hypothesis import given, settings, strategies as st

from gridrecog.topology import (
    DuplicateEdge,
    DuplicateNode,
    GridNetwork,
    ParseError,
    SelfLoop,
    UnknownEdge,
    UnknownNode,
    load_edgelist,
    random_connected,
    ring6_network,
    save_edgelist,
)

from conftest import net_oracle

RING_EDGES = [(1, 2), (1, 4), (2, 3), (3, 6), (4, 5), (5, 6)]


def symmetric(net):
    adj = net.adjacency()
    return all(u in adj[v] for u in adj for v in adj[u]) and all(u not in adj[u] for u in adj)


class TestNodes:
    def test_add_isolated(self, ring):
        ring.add_node(7)
        assert ring.degree(7) == 0 and ring.neighbors(7) == set()

    def test_remove_5_drops_edges(self, ring):
        ring.remove_node(5)
        assert not ring.has_edge(4, 5) and not ring.has_edge(5, 6)
        assert ring.neighbors(4) == {1} and ring.neighbors(6) == {3}
        assert symmetric(ring)

    def test_round_trip(self, ring):
        ring.add_node(9)
        ring.remove_node(9)
        assert ring == ring6_network()

    def test_errors(self, ring):
        with pytest.raises(DuplicateNode):
            ring.add_node(1)
        with pytest.raises(UnknownNode):
            ring.remove_node(42)


class TestEdges:
    def test_add_1_3(self, ring):
        ring.add_edge(1, 3)
        assert ring.degree(1) == sum(1 in e for e in RING_EDGES + [(1, 3)]) == 3

    def test_self_loop(self, ring):
        with pytest.raises(SelfLoop):
            ring.add_edge(1, 1)

    def test_round_trip(self, ring):
        ring.add_edge(1, 3)
        ring.remove_edge(3, 1)
        assert ring == ring6_network()

    def test_errors(self, ring):
        with pytest.raises(DuplicateEdge):
            ring.add_edge(2, 1)
        with pytest.raises(UnknownEdge):
            ring.remove_edge(1, 5)
        with pytest.raises(UnknownNode):
            ring.add_edge(1, 77)

    def test_version_bumps(self, ring):
        v = ring.version
        ring.add_edge(1, 3)
        assert ring.version > v


class TestNeighbors:
    def test_node2(self, ring):
        assert ring.neighbors(2) == {1, 3}

    def test_node5(self, ring):
        assert ring.neighbors(5) == {4, 6}

    def test_isolated(self):
        assert GridNetwork(nodes=[3]).neighbors(3) == set()

    def test_returns_copy(self, ring):
        ring.neighbors(2).add(99)
        assert ring.neighbors(2) == {1, 3}

    def test_unknown(self, ring):
        with pytest.raises(UnknownNode):
            ring.neighbors(0)


class TestSixRing:
    def test_shape(self, ring):
        assert ring.nodes() == [1, 2, 3, 4, 5, 6]
        assert ring.edges() == RING_EDGES
        assert all(ring.degree(n) == 2 for n in ring.nodes())

    def test_bfs_from_2(self, ring):
        assert net_oracle(ring, 2) == {2: 0, 1: 1, 3: 1, 4: 2, 6: 2, 5: 3}

    def test_connected(self, ring):
        assert ring.is_connected()


class TestRandomConnected:
    def test_single(self):
        net = random_connected(1, 0.0, 3)
        assert net.nodes() == [1] and net.edges() == []

    def test_100_half(self):
        net = random_connected(100, 0.5, 42)
        assert len(net) == 100
        assert net.edge_count() == 99 + 50
        assert len(net_oracle(net, 1)) == 100

    def test_deterministic(self):
        assert random_connected(60, 0.3, 9).edges() == random_connected(60, 0.3, 9).edges()
        assert random_connected(60, 0.3, 9).edges() != random_connected(60, 0.3, 10).edges()

    def test_saturates_at_complete(self):
        net = random_connected(6, 10.0, 1)
        assert net.edge_count() == 15

    def test_dense_branch(self):
        net = random_connected(10, 3.0, 5)
        assert net.edge_count() == 9 + 30 and symmetric(net)

    def test_generator_connected_100_pairs(self):
        rng = random.Random(1)
        for _ in range(100):
            n = rng.randint(1, 150)
            seed = rng.randrange(2**32)
            frac = rng.choice([0.0, 0.1, 0.5, 1.0])
            net = random_connected(n, frac, seed)
            assert len(net_oracle(net, net.nodes()[0])) == n
            assert symmetric(net)


class TestEdgeList:
    def test_load_small(self):
        net = load_edgelist("1 2\n2 3")
        assert len(net) == 3 and net.edge_count() == 2

    def test_save_ring(self, ring):
        assert save_edgelist(ring).splitlines() == [f"{u} {v}" for u, v in RING_EDGES]

    def test_self_loop_line(self):
        with pytest.raises(SelfLoop) as exc:
            load_edgelist("1 1")
        assert exc.value.line == 1

    def test_parse_errors_carry_line(self):
        with pytest.raises(ParseError) as exc:
            load_edgelist("# header\n1 2\n2 x\n")
        assert exc.value.line == 3
        with pytest.raises(ParseError):
            load_edgelist("1 2 3")
        with pytest.raises(ParseError):
            load_edgelist("1 2\n2 1")

    def test_comments_and_isolated(self):
        net = load_edgelist("# grid\n1 2  # first\n\n7\n")
        assert net.nodes() == [1, 2, 7] and net.edges() == [(1, 2)]
        assert load_edgelist(save_edgelist(net)) == net

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(1, 500), frac=st.floats(0, 2), seed=st.integers(0, 2**32 - 1))
    def test_round_trip_random(self, n, frac, seed):
        net = random_connected(n, frac, seed)
        assert load_edgelist(save_edgelist(net)) == net

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.booleans(), st.integers(0, 12), st.integers(0, 12)), max_size=80))
    def test_symmetry_under_mutation(self, ops):
        net = GridNetwork(nodes=range(6))
        for add, u, v in ops:
            try:
                if u not in net:
                    net.add_node(u)
                if add:
                    net.add_edge(u, v)
                elif v in net:
                    net.remove_node(v)
            except (SelfLoop, DuplicateEdge, UnknownNode):
                pass
            assert symmetric(net)
