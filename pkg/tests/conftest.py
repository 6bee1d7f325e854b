import collections

import pytest

from gridrecog.topology import ring6_network


def bfs_oracle(edges, nodes, source, allowed=None):
    """Queue-based BFS over a plain edge list; shares no code with the package."""
    adj = {n: [] for n in nodes}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    dist = {source: 0}
    q = collections.deque([source])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in dist and (allowed is None or v in allowed):
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def net_oracle(net, source, allowed=None):
    return bfs_oracle(net.edges(), net.nodes(), source, allowed)


@pytest.fixture
def ring():
    return ring6_network()
