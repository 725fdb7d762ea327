"""Exact s-t max-flow / min-cut on real-capacitated networks.

Dinic's algorithm (BFS level graph, arc-reusing blocking flow) compiled with
numba. Arcs are stored in forward/reverse pairs; pair of arc a is a ^ 1.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import ArgumentError

__all__ = ["FlowNetwork", "max_flow_min_cut"]

_EPS = 1e-12


class FlowNetwork:
    """Directed flow network; arcs are added in forward/reverse pairs."""

    def __init__(self, num_nodes: int, source: int, sink: int):
        if not (0 <= source < num_nodes and 0 <= sink < num_nodes) or source == sink:
            raise ArgumentError("source/sink must be distinct valid node ids")
        self.num_nodes = num_nodes
        self.source = source
        self.sink = sink
        self._from = []
        self._to = []
        self._cap = []

    def add_arc(self, u: int, v: int, capacity: float, reverse_capacity: float = 0.0):
        self.add_arcs(np.array([u]), np.array([v]),
                      np.array([capacity]), np.array([reverse_capacity]))

    def add_arcs(self, u, v, capacity, reverse_capacity=None):
        """Bulk-add forward arcs u->v with paired reverse arcs v->u."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        cap = np.asarray(capacity, dtype=np.float64)
        rcap = (np.zeros_like(cap) if reverse_capacity is None
                else np.asarray(reverse_capacity, dtype=np.float64))
        if np.any(cap < 0) or np.any(rcap < 0):
            raise ArgumentError("arc capacities must be nonnegative")
        if np.any(u < 0) or np.any(v < 0) or np.any(u >= self.num_nodes) or np.any(v >= self.num_nodes):
            raise ArgumentError("arc endpoint out of range")
        # interleave so that the reverse of arc a is a ^ 1
        self._from.append(np.column_stack([u, v]).ravel())
        self._to.append(np.column_stack([v, u]).ravel())
        self._cap.append(np.column_stack([cap, rcap]).ravel())

    def arrays(self):
        if not self._from:
            z = np.empty(0, dtype=np.int64)
            return z, z.copy(), np.empty(0, dtype=np.float64)
        return (np.concatenate(self._from), np.concatenate(self._to),
                np.concatenate(self._cap))


@njit(cache=True)
def _dinic(n, s, t, arc_to, cap, adj_ptr, adj_arc):
    level = np.empty(n, dtype=np.int64)
    it = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    path = np.empty(n + 1, dtype=np.int64)
    from_node = np.empty(n + 1, dtype=np.int64)
    total = 0.0
    while True:
        # BFS: build level graph on residual arcs
        level[:] = -1
        level[s] = 0
        queue[0] = s
        qh, qt = 0, 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            for ai in range(adj_ptr[u], adj_ptr[u + 1]):
                a = adj_arc[ai]
                v = arc_to[a]
                if cap[a] > _EPS and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
        if level[t] < 0:
            break
        it[:n] = adj_ptr[:n]
        # blocking flow with arc reuse via the it[] pointers
        while True:
            u = s
            plen = 0
            found = False
            while True:
                if u == t:
                    found = True
                    break
                advanced = False
                while it[u] < adj_ptr[u + 1]:
                    a = adj_arc[it[u]]
                    v = arc_to[a]
                    if cap[a] > _EPS and level[v] == level[u] + 1:
                        from_node[plen] = u
                        path[plen] = a
                        plen += 1
                        u = v
                        advanced = True
                        break
                    it[u] += 1
                if advanced:
                    continue
                if u == s:
                    break
                level[u] = -1  # dead end, prune
                plen -= 1
                u = from_node[plen]
                it[u] += 1
            if not found:
                break
            bottleneck = np.inf
            for i in range(plen):
                if cap[path[i]] < bottleneck:
                    bottleneck = cap[path[i]]
            for i in range(plen):
                a = path[i]
                cap[a] -= bottleneck
                cap[a ^ 1] += bottleneck
            total += bottleneck
    # source side of the min cut: residual-reachable nodes
    reach = np.zeros(n, dtype=np.bool_)
    reach[s] = True
    queue[0] = s
    qh, qt = 0, 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        for ai in range(adj_ptr[u], adj_ptr[u + 1]):
            a = adj_arc[ai]
            v = arc_to[a]
            if cap[a] > _EPS and not reach[v]:
                reach[v] = True
                queue[qt] = v
                qt += 1
    return total, reach


def max_flow_min_cut(network: FlowNetwork):
    """Solve max flow; returns (flow value, boolean source-side mask).

    The source-side mask is the set of nodes reachable from the source in the
    residual graph, which certifies a minimum cut of capacity equal to the flow.
    """
    arc_from, arc_to, cap = network.arrays()
    n = network.num_nodes
    if len(arc_from) == 0:
        side = np.zeros(n, dtype=bool)
        side[network.source] = True
        return 0.0, side
    order = np.argsort(arc_from, kind="stable")
    adj_arc = order.astype(np.int64)
    adj_ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(adj_ptr, arc_from + 1, 1)
    adj_ptr = np.cumsum(adj_ptr)
    residual = cap.copy()
    flow, side = _dinic(n, network.source, network.sink, arc_to, residual,
                        adj_ptr, adj_arc)
    return float(flow), side
