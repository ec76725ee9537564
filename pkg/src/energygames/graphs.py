"""Plain weighted digraph helpers on dense node ids.

A graph is an adjacency list ``adj[u] = [(v, weight), ...]``.  All cycle
means are exact ``Fraction`` values.
"""
from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Iterable, Optional


def reachable(adj, start: int) -> list:
    seen = {start}
    order = [start]
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v, _ in adj[u]:
            if v not in seen:
                seen.add(v)
                order.append(v)
                queue.append(v)
    return order


def bfs_path(adj, start: int, goal) -> Optional[list]:
    """Shortest node path from ``start`` to a node satisfying ``goal`` (a set or predicate)."""
    test = goal.__contains__ if isinstance(goal, (set, frozenset, dict)) else goal
    parent = {start: None}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        if test(u):
            path = []
            while u is not None:
                path.append(u)
                u = parent[u]
            return path[::-1]
        for v, _ in adj[u]:
            if v not in parent:
                parent[v] = u
                queue.append(v)
    return None


def sccs(adj, nodes: Optional[Iterable[int]] = None) -> list:
    """Strongly connected components of the subgraph induced by ``nodes`` (iterative Tarjan)."""
    nodes = list(range(len(adj))) if nodes is None else list(nodes)
    allowed = set(nodes)
    index = {}
    low = {}
    on_stack = set()
    stack = []
    result = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            u, it = work[-1]
            advanced = False
            for v, _ in it:
                if v not in allowed:
                    continue
                if v not in index:
                    index[v] = low[v] = counter
                    counter += 1
                    stack.append(v)
                    on_stack.add(v)
                    work.append((v, iter(adj[v])))
                    advanced = True
                    break
                if v in on_stack:
                    low[u] = min(low[u], index[v])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[u])
            if low[u] == index[u]:
                comp = []
                while True:
                    x = stack.pop()
                    on_stack.discard(x)
                    comp.append(x)
                    if x == u:
                        break
                result.append(comp)
    return result


def has_cycle(adj, comp) -> bool:
    if len(comp) > 1:
        return True
    u = comp[0]
    return any(v == u for v, _ in adj[u])


def _karp(adj, comp) -> Fraction:
    members = set(comp)
    pos = {u: i for i, u in enumerate(comp)}
    s = len(comp)
    inner = [(pos[u], pos[v], w) for u in comp for v, w in adj[u] if v in members]
    table = [[None] * s for _ in range(s + 1)]
    table[0][0] = 0
    for k in range(1, s + 1):
        prev, cur = table[k - 1], table[k]
        for u, v, w in inner:
            if prev[u] is not None:
                val = prev[u] + w
                if cur[v] is None or val > cur[v]:
                    cur[v] = val
    best = None
    for v in range(s):
        if table[s][v] is None:
            continue
        worst = None
        for k in range(s):
            if table[k][v] is not None:
                val = Fraction(table[s][v] - table[k][v], s - k)
                if worst is None or val < worst:
                    worst = val
        if worst is not None and (best is None or worst > best):
            best = worst
    return best


def _critical_cycle(adj, comp, mean: Fraction) -> list:
    """A cycle inside ``comp`` whose mean weight equals the component's maximum ``mean``."""
    members = set(comp)
    p, q = mean.numerator, mean.denominator
    phi = {u: 0 for u in comp}
    for _ in range(len(comp) + 1):
        changed = False
        for u in comp:
            for v, w in adj[u]:
                if v in members:
                    val = phi[u] + q * w - p
                    if val > phi[v]:
                        phi[v] = val
                        changed = True
        if not changed:
            break
    tight = {u: [v for v, w in adj[u] if v in members and phi[u] + q * w - p == phi[v]]
             for u in comp}
    colour = {}
    for root in comp:
        if root in colour:
            continue
        path = [root]
        colour[root] = 1
        iters = [iter(tight[root])]
        while iters:
            u = path[-1]
            for v in iters[-1]:
                if colour.get(v) == 1:
                    return path[path.index(v):]
                if v not in colour:
                    colour[v] = 1
                    path.append(v)
                    iters.append(iter(tight[v]))
                    break
            else:
                colour[u] = 2
                path.pop()
                iters.pop()
    raise AssertionError("no critical cycle found")


def max_cycle_mean(adj, nodes: Optional[Iterable[int]] = None) -> tuple:
    """Maximum mean over cycles within ``nodes`` and one cycle attaining it.

    Returns ``(None, None)`` when the subgraph is acyclic.
    """
    best, best_comp = None, None
    for comp in sccs(adj, nodes):
        if not has_cycle(adj, comp):
            continue
        comp = sorted(comp)
        mean = _karp(adj, comp)
        if best is None or mean > best:
            best, best_comp = mean, comp
    if best is None:
        return None, None
    return best, _critical_cycle(adj, best_comp, best)


def negate(adj) -> list:
    return [[(v, -w) for v, w in row] for row in adj]


def min_cycle_mean(adj, nodes: Optional[Iterable[int]] = None) -> tuple:
    mean, cyc = max_cycle_mean(negate(adj), nodes)
    return (None, None) if mean is None else (-mean, cyc)


def shortest_distances(adj, start: int) -> tuple:
    """Bellman-Ford from ``start`` over reachable nodes; requires no negative cycle there.

    Returns ``(dist, parent)`` dictionaries.
    """
    dist = {start: 0}
    parent = {start: None}
    nodes = reachable(adj, start)
    for _ in range(len(nodes)):
        changed = False
        for u in nodes:
            du = dist.get(u)
            if du is None:
                continue
            for v, w in adj[u]:
                if v not in dist or du + w < dist[v]:
                    dist[v] = du + w
                    parent[v] = u
                    changed = True
        if not changed:
            return dist, parent
    raise ValueError("negative cycle reachable from start")


def tree_path(parent, node: int) -> list:
    path = []
    while node is not None:
        path.append(node)
        node = parent[node]
    return path[::-1]
