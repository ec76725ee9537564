"""Helpers shared by the test modules."""
import random

from energygames import FiniteStateStrategy, MemoryStructure, Player
from energygames.evaluation import Lasso
from energygames.memory import energy_memory


def random_lasso(a, rng: random.Random, max_len: int = 10):
    """Random walk from the initial vertex, closed at a random earlier occurrence."""
    while True:
        path = [a.initial]
        for _ in range(max_len):
            closers = [j for j, x in enumerate(path) if a.has_edge(path[-1], x)]
            if closers and rng.random() < 0.3:
                j = rng.choice(closers)
                return Lasso(path[:j], path[j:])
            path.append(rng.choice(a.successors(path[-1])))
        closers = [j for j, x in enumerate(path) if a.has_edge(path[-1], x)]
        if closers:
            j = rng.choice(closers)
            return Lasso(path[:j], path[j:])


def lift_lasso(a, mem, nodes, lasso):
    """The product lasso (as product vertex indices) followed by the extended play."""
    index = {node: i for i, node in enumerate(nodes)}
    L, p = len(lasso.prefix), len(lasso.cycle)
    states = [mem.initial]
    seen = {}
    i = 0
    while True:
        pos = i if i < L else L + (i - L) % p
        key = (pos, states[-1])
        if i >= L and key in seen:
            start = seen[key]
            break
        if i >= L:
            seen[key] = i
        k = a.edge_id(lasso.position(i), lasso.position(i + 1))
        states.append(mem.table[states[-1]][k])
        i += 1
    walk = [index[(lasso.position(j), states[j])] for j in range(i)]
    return Lasso(walk[:start], walk[start:])


def counting_strategy(a, cap: int) -> FiniteStateStrategy:
    """On MEMLB: loop at v1 while the counter is below ``cap - 1``, then recharge."""
    v0, v1 = a.index("v0"), a.index("v1")

    def update(s, k):
        u, v = a.edges[k]
        return min(s + 1, cap - 1) if (u, v) == (v1, v1) else 0

    mem = MemoryStructure.from_function(a, cap, 0, update)
    return FiniteStateStrategy.from_function(
        a, Player.P0, mem, lambda v, s: (v1 if s < cap - 1 else v0) if v == v1 else None)


def intro_strategy(a) -> FiniteStateStrategy:
    """Energy counter 0..5: at v0 go to v2 only on empty energy, at v1 return to v0 only then."""
    v0, v1, v2 = (a.index(x) for x in ("v0", "v1", "v2"))
    mem = energy_memory(a, 5, "lu")

    def nxt(v, s):
        if v == v0:
            return v2 if s == 0 else v1
        if v == v1:
            return v0 if s == 0 else v2
        return None

    return FiniteStateStrategy.from_function(a, Player.P0, mem, nxt)


def detour_strategy(a, cap: int, safe: set, period: int) -> FiniteStateStrategy:
    """Energy counter plus a step counter; cycles through the safe successors in turn.

    ``safe`` holds ``(vertex, level)`` pairs from which Player 0 can keep the
    energy within ``[0, cap]``; the result stays inside it but takes detours.
    """
    size = (cap + 2) * period

    def update(s, k):
        e, c = divmod(s, period)
        if e == cap + 1:
            return s
        e2 = e + a.weights[k]
        e2 = e2 if 0 <= e2 <= cap else cap + 1
        return e2 * period + (c + 1) % period

    def nxt(v, s):
        e, c = divmod(s, period)
        options = [u for u in a.successors(v) if e <= cap and (u, e + a.weight(v, u)) in safe]
        return options[c % len(options)] if options else None

    mem = MemoryStructure.from_function(a, size, 0, update)
    return FiniteStateStrategy.from_function(a, Player.P0, mem, nxt)


def safe_pairs(a, cap: int) -> set:
    """(vertex, level) pairs from which Player 0 keeps the energy in ``[0, cap]`` forever."""
    safe = {(v, e) for v in range(a.n) for e in range(cap + 1)}
    changed = True
    while changed:
        changed = False
        for v, e in list(safe):
            ok = [(u, e + a.weight(v, u)) in safe for u in a.successors(v)]
            if not (any(ok) if a.owner[v] == Player.P0 else all(ok)):
                safe.discard((v, e))
                changed = True
    return safe
