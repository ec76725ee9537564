"""Brute-force reference procedures and seeded random instance generators.

Nothing here reuses the solvers: mean-payoff values come from playing out
every pair of positional strategies, capacities from a naive safety fixpoint
over (vertex, level) pairs, and solitaire optima from exhaustive lasso search.
Size limits are hard errors.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Optional

from . import objectives as O
from .arena import R, Player, WeightedArena
from .evaluation import Lasso, ObjectiveValue, avg_energy_of_lasso, mean_payoff_of_lasso
from .memory import energy_memory, is_bottom


class OracleLimitError(ValueError):
    pass


def _cycle_values(a: WeightedArena, succ: list) -> list:
    """Mean of the cycle eventually reached from each vertex of a functional graph."""
    values = [None] * a.n
    for start in range(a.n):
        order = {}
        v = start
        while v not in order:
            order[v] = len(order)
            v = succ[v]
        cyc = list(order)[order[v]:]
        total = sum(a.weight(u, succ[u]) for u in cyc)
        values[start] = Fraction(total, len(cyc))
    return values


def mp_value_by_enumeration(a: WeightedArena, limit: int = 8, pair_limit: int = 10 ** 6) -> list:
    """Per-vertex min over Player 0 positional strategies of max over Player 1's."""
    a.require_integer_mode()
    if a.n > limit:
        raise OracleLimitError(f"arena has {a.n} vertices, oracle limit is {limit}")
    v0 = a.vertices_of(Player.P0)
    v1 = a.vertices_of(Player.P1)
    choices0 = list(itertools.product(*(a.successors(v) for v in v0)))
    choices1 = list(itertools.product(*(a.successors(v) for v in v1)))
    if len(choices0) * len(choices1) > pair_limit:
        raise OracleLimitError("too many positional strategy pairs")
    best = None
    for c0 in choices0:
        worst = None
        for c1 in choices1:
            succ = [None] * a.n
            for v, u in zip(v0, c0):
                succ[v] = u
            for v, u in zip(v1, c1):
                succ[v] = u
            vals = _cycle_values(a, succ)
            worst = vals if worst is None else [max(x, y) for x, y in zip(worst, vals)]
        best = worst if best is None else [min(x, y) for x, y in zip(best, worst)]
    return best


def _recharge_safe(a: WeightedArena, cap: int) -> bool:
    """Greatest fixpoint of (vertex, level) states from which Player 0 can stay non-negative."""
    def step(level, k):
        w = a.weights[k]
        return cap if w is R else level + w

    safe = {(v, c) for v in range(a.n) for c in range(cap + 1)}
    changed = True
    while changed:
        changed = False
        for v, c in list(safe):
            ok = [(a.edges[k][1], step(c, k)) in safe for k in a.out_edges(v)]
            keep = any(ok) if a.owner[v] == Player.P0 else all(ok)
            if not keep:
                safe.discard((v, c))
                changed = True
    return (a.initial, cap) in safe


def default_search_bound(a: WeightedArena) -> int:
    W = max((-w for w in a.weights if w is not R and w < 0), default=0)
    return max(3 * (a.n - 1), a.n) * max(W, 1)


def exists_cap_by_search(a: WeightedArena, cap_max: Optional[int] = None) -> Optional[int]:
    """Least capacity up to ``cap_max`` winning Recharge for Player 0, or None."""
    a.require_recharge_mode()
    cap_max = default_search_bound(a) if cap_max is None else cap_max
    for cap in range(cap_max + 1):
        if _recharge_safe(a, cap):
            return cap
    return None


def _monitor(a: WeightedArena, family):
    if isinstance(family, O.AvgRecharge):
        return energy_memory(a, family.cap, "recharge")
    if isinstance(family, O.AvgEnergyLU):
        return energy_memory(a, family.cap, "lu")
    return None


def _lasso_value(a: WeightedArena, lasso: Lasso, family) -> ObjectiveValue:
    if isinstance(family, O.AvgRecharge):
        return avg_energy_of_lasso(a, lasso, recharge_cap=family.cap)
    if isinstance(family, O.AvgEnergyLU):
        return avg_energy_of_lasso(a, lasso, upper=family.cap)
    if isinstance(family, O.AvgEnergyL):
        return avg_energy_of_lasso(a, lasso)
    if isinstance(family, O.MeanPayoff):
        return ObjectiveValue.finite(mean_payoff_of_lasso(a, lasso))
    raise ValueError(f"{O.describe(family)} has no long-run value")


def solitaire_best_lasso(a: WeightedArena, family, length_bound: int) -> tuple:
    """Best ``(lasso, value)`` over lassos of total length at most ``length_bound``.

    Paths never revisit a (vertex, energy monitor) pair, and every edge back
    to an earlier occurrence of a vertex closes a candidate lasso.  Ties keep
    the first lasso found in depth-first, successor order.
    """
    for v in a.vertices_of(Player.P1):
        if len(a.out_edges(v)) > 1:
            raise ValueError(f"not a solitaire arena: Player 1 chooses at {a.names[v]}")
    if length_bound < 1:
        raise ValueError("length bound must be positive")
    mem = _monitor(a, family)
    best = [None, None]
    path = [a.initial]
    states = [mem.initial if mem else 0]
    keys = {(a.initial, states[0])}

    def consider(j):
        lasso = Lasso(path[:j], path[j:])
        val = _lasso_value(a, lasso, family)
        if best[1] is None or val.sort_key() < best[1].sort_key():
            best[0], best[1] = lasso, val

    def dfs():
        v = path[-1]
        for k in a.out_edges(v):
            u = a.edges[k][1]
            for j, x in enumerate(path):
                if x == u:
                    consider(j)
            if len(path) == length_bound:
                continue
            s = mem.table[states[-1]][k] if mem else 0
            if (u, s) in keys:
                continue
            if mem is not None and is_bottom(mem, s) and best[1] is not None:
                continue
            keys.add((u, s))
            path.append(u)
            states.append(s)
            dfs()
            path.pop()
            states.pop()
            keys.discard((u, s))

    dfs()
    if best[0] is None:
        raise ValueError(f"no lasso closes within length {length_bound}")
    return best[0], best[1]


# -- seeded generators -------------------------------------------------------------

def random_arena(seed: int, n: int = 5, max_out: int = 3, weight: int = 3, p1: float = 0.5,
                 recharge: float = 0.0, nonpositive: bool = False) -> WeightedArena:
    """Random arena on ``v0..v{n-1}`` with out-degree ``1..max_out`` and initial ``v0``.

    With ``recharge > 0`` each edge is an R edge with that probability;
    ``nonpositive`` draws integer weights from ``-weight..0`` only.
    """
    rng = random.Random(seed)
    names = [f"v{i}" for i in range(n)]
    vertices = [(x, "p1" if rng.random() < p1 else "p0") for x in names]
    edges = []
    low, high = -weight, 0 if nonpositive else weight
    for u in names:
        for v in rng.sample(names, rng.randint(1, min(max_out, n))):
            w = R if rng.random() < recharge else rng.randint(low, high)
            edges.append((u, v, w))
    return WeightedArena.build(vertices, edges, names[0])


def random_recharge_arena(seed: int, n: int = 5, max_out: int = 3, weight: int = 3,
                          recharge: float = 0.25) -> WeightedArena:
    return random_arena(seed, n, max_out, weight, recharge=recharge, nonpositive=True)


def random_countdown(seed: int, p0: int = 4, p1: int = 3, max_out: int = 2,
                     weight: int = 4) -> WeightedArena:
    """Random arena obeying the countdown shape rules; ``s0`` is Player 1's zero-loop sink."""
    rng = random.Random(seed)
    zs = [f"u{i}" for i in range(p0)]
    ys = [f"x{i}" for i in range(p1)]
    vertices = [(z, "p0") for z in zs] + [(y, "p1") for y in ys] + [("s0", "p1")]
    edges = [("s0", "s0", 0)]
    for z in zs:
        edges.append((z, "s0", 0))
        k = rng.randint(1, min(max_out, p1, weight))
        targets = rng.sample(ys, k)
        costs = rng.sample(range(1, weight + 1), k)
        edges += [(z, y, -c) for y, c in zip(targets, costs)]
    for y in ys:
        for z in rng.sample(zs, rng.randint(1, min(max_out, p0))):
            edges.append((y, z, 0))
    return WeightedArena.build(vertices, edges, zs[0])
