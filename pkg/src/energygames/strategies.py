"""Executing, verifying, measuring and enumerating finite-state strategies.

Verification works on the strategy product: arena vertices paired with the
strategy's memory state (and, for bounded objectives, an energy counter),
where the strategy owner's vertices keep only the prescribed edge.  Once the
strategy is fixed the opponent's best play is a reachable cycle, so average
objectives reduce to a maximum cycle mean on that graph.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from . import graphs
from . import objectives as O
from .arena import ArenaError, FiniteStateStrategy, MemoryStructure, Player, WeightedArena
from .evaluation import Lasso, ObjectiveValue, avg_energy_of_lasso, mean_payoff_of_lasso
from .memory import energy_memory, is_bottom
from .solvers import countdown_sink


class SearchSpaceError(RuntimeError):
    pass


@dataclass
class Verdict:
    accepted: bool
    witness: Optional[Lasso] = None
    worst_value: Optional[ObjectiveValue] = None


@dataclass
class StrategyProduct:
    """Reachable configurations ``(vertex, memory state, monitor state)``.

    ``adj[i]`` lists ``(j, edge_index)``; the monitor is an energy counter for
    bounded objectives and the constant 0 otherwise.
    """

    nodes: list
    adj: list

    def weighted(self, weight) -> list:
        """Adjacency with ``weight(i, edge_index)`` on each edge, for the graph helpers."""
        return [[(j, weight(i, k)) for j, k in row] for i, row in enumerate(self.adj)]


def strategy_product(a: WeightedArena, sigma: FiniteStateStrategy,
                     monitor: Optional[MemoryStructure] = None) -> StrategyProduct:
    sigma.check(a)
    mem = sigma.memory
    start = (a.initial, mem.initial, monitor.initial if monitor else 0)
    index = {start: 0}
    nodes = [start]
    adj = []
    i = 0
    while i < len(nodes):
        v, s, e = nodes[i]
        if a.owner[v] == sigma.player:
            ks = [a.edge_id(v, sigma.next_move(v, s))]
        else:
            ks = a.out_edges(v)
        row = []
        for k in ks:
            node = (a.edges[k][1], mem.table[s][k], monitor.table[e][k] if monitor else 0)
            j = index.get(node)
            if j is None:
                j = index[node] = len(nodes)
                nodes.append(node)
            row.append((j, k))
        adj.append(row)
        i += 1
    return StrategyProduct(nodes, adj)


def reachable_memory_states(a: WeightedArena, sigma: FiniteStateStrategy) -> set:
    return {s for _, s, _ in strategy_product(a, sigma).nodes}


def canonicalize(a: WeightedArena, sigma: FiniteStateStrategy) -> FiniteStateStrategy:
    """Renumber reachable memory states in discovery order and drop the rest."""
    prod = strategy_product(a, sigma)
    order = {}
    for _, s, _ in prod.nodes:
        if s not in order:
            order[s] = len(order)
    table = []
    for old in order:
        table.append(tuple(order.get(sigma.memory.table[old][k], 0) for k in range(a.m)))
    labels = None
    if sigma.memory.labels is not None:
        labels = tuple(sigma.memory.labels[old] for old in order)
    mem = MemoryStructure(len(order), 0, tuple(table), labels)
    inverse = list(order)
    return FiniteStateStrategy.from_function(
        a, sigma.player, mem, lambda v, s: sigma.next_move(v, inverse[s]))


def strategy_from_lasso(a: WeightedArena, lasso: Lasso,
                        player: Player = Player.P0) -> FiniteStateStrategy:
    """Strategy whose memory counts the position along ``lasso`` and follows it."""
    lasso.validate(a)
    L, p = len(lasso.prefix), len(lasso.cycle)
    size = L + p
    pos = [lasso.position(i) for i in range(size + 1)]

    def after(i):
        return i + 1 if i + 1 < size else L

    def update(i, k):
        return after(i) if a.edges[k] == (pos[i], pos[i + 1]) else i

    mem = MemoryStructure.from_function(a, size, 0, update)
    return FiniteStateStrategy.from_function(
        a, player, mem, lambda v, i: pos[i + 1] if v == pos[i] else None)


# -- witnesses ---------------------------------------------------------------

def _to_lasso(prod: StrategyProduct, path: list, cycle: list) -> Lasso:
    return Lasso([prod.nodes[i][0] for i in path], [prod.nodes[i][0] for i in cycle])


def _lasso_through_cycle(prod: StrategyProduct, cycle: list) -> Lasso:
    path = graphs.bfs_path(prod.adj, 0, set(cycle))
    entry = path[-1]
    at = cycle.index(entry)
    return _to_lasso(prod, path[:-1], cycle[at:] + cycle[:at])


def _lasso_via(prod: StrategyProduct, path: list) -> Lasso:
    """Follow ``path`` and then first edges until a configuration repeats."""
    path = list(path)
    seen = {x: i for i, x in enumerate(path)}
    while True:
        nxt = prod.adj[path[-1]][0][0]
        if nxt in seen:
            at = seen[nxt]
            return _to_lasso(prod, path[:at], path[at:])
        seen[nxt] = len(path)
        path.append(nxt)


def _cycle_in(prod: StrategyProduct, comp: list, through: int) -> list:
    """A cycle inside ``comp`` passing through node ``through``."""
    members = set(comp)
    adj = [[(j, k) for j, k in row if j in members] if i in members else []
           for i, row in enumerate(prod.adj)]
    starts = [j for j, _ in adj[through]]
    if through in starts:
        return [through]
    for s in starts:
        path = graphs.bfs_path(adj, s, {through})
        if path is not None:
            return [through] + path[:-1]
    raise AssertionError("component has no cycle through node")


def _must_reach(prod: StrategyProduct, target: set) -> set:
    """Configurations from which every path eventually hits ``target``."""
    preds = [[] for _ in prod.nodes]
    count = [len(row) for row in prod.adj]
    for i, row in enumerate(prod.adj):
        for j, _ in row:
            preds[j].append(i)
    result = set(target)
    queue = deque(target)
    while queue:
        j = queue.popleft()
        for i in preds[j]:
            if i in result:
                continue
            count[i] -= 1
            if count[i] == 0:
                result.add(i)
                queue.append(i)
    return result


# -- verification ------------------------------------------------------------------

def _monitor_for(a: WeightedArena, obj) -> Optional[tuple]:
    if isinstance(obj, (O.EnergyLU, O.AvgEnergyLU)):
        return energy_memory(a, obj.cap, "lu"), obj.cap, False
    if isinstance(obj, (O.Recharge, O.AvgRecharge)):
        return energy_memory(a, obj.cap, "recharge"), obj.cap, True
    return None


def _evaluate(a: WeightedArena, lasso: Lasso, cap: int, recharge: bool) -> ObjectiveValue:
    if recharge:
        return avg_energy_of_lasso(a, lasso, recharge_cap=cap)
    return avg_energy_of_lasso(a, lasso, upper=cap)


def _bounded(a, sigma, obj, mem, cap, recharge) -> Verdict:
    prod = strategy_product(a, sigma, mem)
    bad = {i for i, (_, _, e) in enumerate(prod.nodes) if is_bottom(mem, e)}
    if bad:
        path = graphs.bfs_path(prod.adj, 0, bad)
        witness = _lasso_via(prod, path)
        return Verdict(False, witness, _evaluate(a, witness, cap, recharge))
    if isinstance(obj, (O.EnergyLU, O.Recharge)):
        return Verdict(True)
    levels = prod.weighted(lambda i, k: prod.nodes[i][2])
    mean, cyc = graphs.max_cycle_mean(levels)
    witness = _lasso_through_cycle(prod, cyc)
    worst = ObjectiveValue.finite(mean)
    return Verdict(obj.t is None or mean <= obj.t, witness, worst)


def _weights_graph(a, prod):
    return prod.weighted(lambda i, k: a.weights[k])


def _energy_l(a, sigma) -> tuple:
    """Lower-bound check on the plain strategy product; returns (verdict or None, product)."""
    a.require_integer_mode()
    prod = strategy_product(a, sigma)
    adj = _weights_graph(a, prod)
    mean, cyc = graphs.min_cycle_mean(adj)
    if mean is not None and mean < 0:
        witness = _lasso_through_cycle(prod, cyc)
        return Verdict(False, witness, avg_energy_of_lasso(a, witness)), prod
    dist, parent = graphs.shortest_distances(adj, 0)
    low = min(dist, key=lambda i: (dist[i], i))
    if dist[low] < 0:
        witness = _lasso_via(prod, graphs.tree_path(parent, low))
        return Verdict(False, witness, avg_energy_of_lasso(a, witness)), prod
    return None, prod


def _avg_energy_l(a, sigma, obj) -> Verdict:
    bad, prod = _energy_l(a, sigma)
    if bad is not None:
        return bad
    adj = _weights_graph(a, prod)
    mean, cyc = graphs.max_cycle_mean(adj)
    if mean is not None and mean > 0:
        witness = _lasso_through_cycle(prod, cyc)
        return Verdict(False, witness, avg_energy_of_lasso(a, witness))
    dist, _ = graphs.shortest_distances(graphs.negate(adj), 0)
    top = -min(dist.values())
    return verify_strategy(a, sigma, O.AvgEnergyLU(top, obj.t))


def energy_bound(a: WeightedArena, sigma: FiniteStateStrategy) -> Optional[int]:
    """Largest energy level on any consistent play, or None if unbounded."""
    a.require_integer_mode()
    prod = strategy_product(a, sigma)
    adj = _weights_graph(a, prod)
    mean, _ = graphs.max_cycle_mean(adj)
    if mean is not None and mean > 0:
        return None
    dist, _ = graphs.shortest_distances(graphs.negate(adj), 0)
    return -min(dist.values())


def _mean_payoff(a, sigma, obj, maximizer: bool) -> Verdict:
    a.require_integer_mode()
    prod = strategy_product(a, sigma)
    adj = _weights_graph(a, prod)
    if maximizer:
        mean, cyc = graphs.max_cycle_mean(adj)
        ok = obj.t is None or mean <= obj.t
    else:
        mean, cyc = graphs.min_cycle_mean(adj)
        ok = obj.t is not None and mean > obj.t
    witness = _lasso_through_cycle(prod, cyc)
    return Verdict(ok, witness, ObjectiveValue.finite(mean_payoff_of_lasso(a, witness)))


def _parity(a, sigma, obj, player: Player) -> Verdict:
    prod = strategy_product(a, sigma)
    color = [obj.colors[v] for v, _, _ in prod.nodes]
    for k in sorted(set(color)):
        if k % 2 == int(player):
            continue
        allowed = [i for i in range(len(prod.nodes)) if color[i] <= k]
        for comp in graphs.sccs(prod.adj, allowed):
            if not graphs.has_cycle(prod.adj, comp):
                continue
            hits = [i for i in comp if color[i] == k]
            if hits:
                cyc = _cycle_in(prod, comp, hits[0])
                return Verdict(False, _lasso_through_cycle(prod, cyc))
    return Verdict(True)


def _countdown(a, sigma, obj, player: Player) -> Verdict:
    sink = countdown_sink(a)
    mem = energy_memory(a, obj.budget, "recharge")
    prod = strategy_product(a, sigma, mem)
    target = {i for i, (v, _, e) in enumerate(prod.nodes) if v == sink and e == 0}
    if player == Player.P1:
        if not target:
            return Verdict(True)
        return Verdict(False, _lasso_via(prod, graphs.bfs_path(prod.adj, 0, target)))
    good = _must_reach(prod, target)
    if 0 in good:
        return Verdict(True)
    path = [0]
    seen = {0: 0}
    while True:
        nxt = next(j for j, _ in prod.adj[path[-1]] if j not in good)
        if nxt in seen:
            return Verdict(False, _to_lasso(prod, path[:seen[nxt]], path[seen[nxt]:]))
        seen[nxt] = len(path)
        path.append(nxt)


def _verify_p1(a, sigma, obj) -> Verdict:
    """Player 1 strategies: accepted iff every consistent play violates ``obj``."""
    if isinstance(obj, O.MeanPayoff):
        return _mean_payoff(a, sigma, obj, maximizer=False)
    if isinstance(obj, O.Parity):
        return _parity(a, sigma, obj, Player.P1)
    if isinstance(obj, O.Countdown):
        return _countdown(a, sigma, obj, Player.P1)
    if isinstance(obj, (O.EnergyLU, O.Recharge)):
        mem, cap, recharge = _monitor_for(a, obj)
        prod = strategy_product(a, sigma, mem)
        bad = {i for i, (_, _, e) in enumerate(prod.nodes) if is_bottom(mem, e)}
        if 0 in _must_reach(prod, bad):
            return Verdict(True)
        safe = [i for i in range(len(prod.nodes)) if i not in bad]
        for comp in graphs.sccs(prod.adj, safe):
            if graphs.has_cycle(prod.adj, comp):
                path = graphs.bfs_path(prod.adj, 0, set(comp))
                if path is not None:
                    cyc = _cycle_in(prod, comp, path[-1])
                    return Verdict(False, _lasso_through_cycle(prod, cyc))
        raise AssertionError("safe play exists but no safe cycle found")
    raise ValueError(f"Player 1 verification is not supported for {O.describe(obj)}")


def verify_strategy(a: WeightedArena, sigma: FiniteStateStrategy, obj) -> Verdict:
    """Accepted iff every play consistent with ``sigma`` is won by ``sigma``'s owner.

    A ``None`` threshold in an average objective only measures the worst value.
    """
    if sigma.player == Player.P1:
        return _verify_p1(a, sigma, obj)
    if isinstance(obj, O.EnergyL):
        bad, _ = _energy_l(a, sigma)
        return bad if bad is not None else Verdict(True)
    if isinstance(obj, O.AvgEnergyL):
        return _avg_energy_l(a, sigma, obj)
    if isinstance(obj, O.MeanPayoff):
        return _mean_payoff(a, sigma, obj, maximizer=True)
    if isinstance(obj, O.Parity):
        return _parity(a, sigma, obj, Player.P0)
    if isinstance(obj, O.Countdown):
        return _countdown(a, sigma, obj, Player.P0)
    monitor = _monitor_for(a, obj)
    if monitor is None:
        raise ValueError(f"unsupported objective {obj!r}")
    return _bounded(a, sigma, obj, *monitor)


def worst_consistent_value(a: WeightedArena, sigma: FiniteStateStrategy, family) -> ObjectiveValue:
    """Supremum over consistent plays of the family's long-run quantity (threshold ignored)."""
    if not isinstance(family, O.AVERAGE_OBJECTIVES):
        raise ValueError(f"{O.describe(family)} has no long-run value")
    probe = type(family)(**{k: v for k, v in vars(family).items() if k != "t"})
    return verify_strategy(a, sigma, probe).worst_value


# -- enumeration ---------------------------------------------------------------------

def enumerate_strategies(a: WeightedArena, memory_size: int, player: Player = Player.P0,
                         limit: int = 10 ** 7) -> Iterator[FiniteStateStrategy]:
    """All strategies with exactly ``memory_size`` reachable memory states, one per relabeling class.

    Undetermined table entries are filled lazily while exploring the strategy
    product breadth-first, and fresh states are numbered in discovery order,
    so every reachable behaviour is produced exactly once.  Raises
    SearchSpaceError once more than ``limit`` search steps are needed.
    """
    if memory_size < 1:
        raise ValueError("memory size must be positive")
    k = memory_size
    nodes = [(a.initial, 0)]
    seen = {nodes[0]}
    upd = {}
    moves = {}
    used = [1]
    steps = [0]

    def build():
        table = tuple(tuple(upd.get((s, e), 0) for e in range(a.m)) for s in range(k))
        mem = MemoryStructure(k, 0, table)
        return FiniteStateStrategy.from_function(a, player, mem, lambda v, s: moves.get((v, s)))

    def step(i, j, e, s2):
        node = (a.edges[e][1], s2)
        added = node not in seen
        if added:
            seen.add(node)
            nodes.append(node)
        yield from visit(i, j + 1)
        if added:
            seen.discard(node)
            nodes.pop()

    def visit(i, j):
        steps[0] += 1
        if steps[0] > limit:
            raise SearchSpaceError(f"strategy enumeration exceeded {limit} steps")
        if i == len(nodes):
            if used[0] == k:
                yield build()
            return
        v, s = nodes[i]
        if a.owner[v] == player:
            if (v, s) not in moves:
                for u in a.successors(v):
                    moves[(v, s)] = u
                    yield from visit(i, j)
                del moves[(v, s)]
                return
            edges = [a.edge_id(v, moves[(v, s)])]
        else:
            edges = a.out_edges(v)
        if j == len(edges):
            yield from visit(i + 1, 0)
            return
        e = edges[j]
        if (s, e) in upd:
            yield from step(i, j, e, upd[(s, e)])
            return
        options = list(range(used[0])) + ([used[0]] if used[0] < k else [])
        for s2 in options:
            fresh = s2 == used[0]
            if fresh:
                used[0] += 1
            upd[(s, e)] = s2
            yield from step(i, j, e, s2)
            del upd[(s, e)]
            if fresh:
                used[0] -= 1

    yield from visit(0, 0)


# -- strategy file format ------------------------------------------------------------

def serialize_strategy(sigma: FiniteStateStrategy, a: WeightedArena) -> bytes:
    mem = sigma.memory
    lines = ["strategy", f"player p{int(sigma.player)}", f"memory {mem.size}",
             f"initmem {mem.initial}"]
    for s in range(mem.size):
        for k, (u, v) in enumerate(a.edges):
            lines.append(f"upd {s} {a.names[u]} {a.names[v]} {mem.table[s][k]}")
    for v in a.vertices_of(sigma.player):
        for s in range(mem.size):
            lines.append(f"move {a.names[v]} {s} {a.names[sigma.next_move(v, s)]}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_strategy(text, a: WeightedArena) -> FiniteStateStrategy:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    header = False
    player = None
    size = initial = None
    upd = {}
    moves = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if not header:
                if parts != ["strategy"]:
                    raise ValueError("expected 'strategy' header")
                header = True
            elif parts[0] == "player" and len(parts) == 2:
                player = Player.parse(parts[1])
            elif parts[0] == "memory" and len(parts) == 2:
                size = int(parts[1])
            elif parts[0] == "initmem" and len(parts) == 2:
                initial = int(parts[1])
            elif parts[0] == "upd" and len(parts) == 5:
                k = a.edge_id(a.index(parts[2]), a.index(parts[3]))
                upd[(int(parts[1]), k)] = int(parts[4])
            elif parts[0] == "move" and len(parts) == 4:
                moves[(a.index(parts[1]), int(parts[2]))] = a.index(parts[3])
            else:
                raise ValueError(f"syntax error: {line!r}")
        except (ValueError, KeyError) as exc:
            raise ArenaError(str(exc), lineno) from None
    if size is None or initial is None:
        raise ArenaError("strategy needs 'memory' and 'initmem' lines")
    missing = [(s, k) for s in range(size) for k in range(a.m) if (s, k) not in upd]
    if missing:
        s, k = missing[0]
        u, v = a.edges[k]
        raise ArenaError(f"update undefined for state {s} on {a.names[u]} -> {a.names[v]}")
    if player is None:
        owners = {a.owner[v] for v, _ in moves}
        player = owners.pop() if len(owners) == 1 else Player.P0
    mem = MemoryStructure(size, initial,
                          tuple(tuple(upd[(s, k)] for k in range(a.m)) for s in range(size)))
    sigma = FiniteStateStrategy(player, mem, moves)
    sigma.check(a)
    return sigma
