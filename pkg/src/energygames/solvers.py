"""Decision procedures: attractors, three-color parity, mean-payoff, bounded energy, countdown.

Player 0 is always the minimizer of long-run quantities.  Every solver
reports the winner from the arena's initial vertex and, where the algorithm
yields one, a winning strategy for that player over the solved arena.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from . import graphs
from .arena import R, ArenaError, FiniteStateStrategy, Player, WeightedArena, max_abs_weight, product_with_map
from .memory import energy_memory, is_bottom, pullback


@dataclass
class SolveResult:
    winner: Player
    strategy: Optional[FiniteStateStrategy] = None
    certificate: dict = field(default_factory=dict)
    value: Optional[Fraction] = None


def format_certificate(a: WeightedArena, cert: Mapping) -> str:
    """Line-oriented text dump of a solver certificate."""
    lines = []
    for key in sorted(cert):
        val = cert[key]
        if key.startswith("region"):
            names = " ".join(a.names[v] for v in sorted(val))
            lines.append(f"{key} {names}".rstrip())
        elif key == "measure":
            for v, m in enumerate(val):
                lines.append(f"measure {a.names[v]} {'TOP' if m is None else m}")
        elif key == "countdown":
            for (v, b), win in sorted(val.items()):
                lines.append(f"countdown {a.names[v]} {b} {'p0' if win else 'p1'}")
        elif key == "product_region":
            for name in sorted(val):
                lines.append(f"product_region {name}")
        else:
            lines.append(f"{key} {val}")
    return "\n".join(lines) + "\n"


# -- attractors ----------------------------------------------------------------

def _attractor(a: WeightedArena, player: Player, target: Iterable[int],
               within: Optional[set] = None) -> tuple:
    """Attractor inside the subgame ``within`` plus attractor moves for ``player``."""
    within = set(range(a.n)) if within is None else within
    result = set(target) & within
    strategy = {}
    count = {}
    for v in within:
        if v not in result:
            count[v] = sum(1 for u in a.successors(v) if u in within)
    queue = deque(sorted(result))
    while queue:
        u = queue.popleft()
        for k in a.in_edges(u):
            v = a.edges[k][0]
            if v not in within or v in result:
                continue
            if a.owner[v] == player:
                result.add(v)
                strategy[v] = u
                queue.append(v)
            else:
                count[v] -= 1
                if count[v] == 0:
                    result.add(v)
                    queue.append(v)
    return result, strategy


def attractor(a: WeightedArena, player: Player, target: Iterable[int]) -> set:
    return _attractor(a, player, target)[0]


# -- parity ---------------------------------------------------------------------

def _zielonka(a: WeightedArena, colors: Mapping, game: set) -> tuple:
    """Winning regions and positional strategies of both players on subgame ``game``."""
    if not game:
        return (set(), set()), ({}, {})
    top = max(colors[v] for v in game)
    i = Player(top % 2)
    opp = i.opponent
    attr, attr_moves = _attractor(a, i, [v for v in game if colors[v] == top], game)
    (w0, w1), (s0, s1) = _zielonka(a, colors, game - attr)
    sub_win = (w0, w1)
    sub_strat = (s0, s1)
    if not sub_win[opp]:
        strat = dict(sub_strat[i])
        strat.update(attr_moves)
        for v in attr:
            if a.owner[v] == i and v not in strat:
                strat[v] = min(u for u in a.successors(v) if u in game)
        wins = [set(), set()]
        wins[i] = set(game)
        strats = [{}, {}]
        strats[i] = strat
        return tuple(wins), tuple(strats)
    battr, battr_moves = _attractor(a, opp, sub_win[opp], game)
    (r0, r1), (t0, t1) = _zielonka(a, colors, game - battr)
    rest_win, rest_strat = (r0, r1), (t0, t1)
    wins = [set(), set()]
    strats = [{}, {}]
    wins[opp] = set(rest_win[opp]) | battr
    strats[opp] = dict(rest_strat[opp])
    strats[opp].update(battr_moves)
    strats[opp].update(sub_strat[opp])
    wins[i] = set(rest_win[i])
    strats[i] = dict(rest_strat[i])
    return tuple(wins), tuple(strats)


def parity_regions(a: WeightedArena, colors: Mapping) -> tuple:
    for v in range(a.n):
        if colors.get(v) not in (0, 1, 2):
            raise ValueError(f"vertex {a.names[v]} needs a color in {{0, 1, 2}}")
    return _zielonka(a, colors, set(range(a.n)))


def solve_parity3(a: WeightedArena, colors: Mapping) -> SolveResult:
    """Max-parity game with colors 0..2 via recursive attractor decomposition."""
    (w0, w1), strats = parity_regions(a, colors)
    winner = Player.P0 if a.initial in w0 else Player.P1
    region = w0 if winner == Player.P0 else w1
    choice = {v: u for v, u in strats[winner].items() if v in region}
    strategy = FiniteStateStrategy.positional(a, winner, choice)
    return SolveResult(winner, strategy, {"region_p0": w0, "region_p1": w1})


# -- energy progress measures ---------------------------------------------------

def energy_measure(a: WeightedArena, weights, player: Player) -> tuple:
    """Least small progress measure for ``player`` keeping the weight sum bounded below.

    Returns ``(f, choice)``: ``f[v]`` is the minimal initial credit from ``v``
    (None if ``player`` cannot win from ``v`` with any credit) and ``choice``
    the credit-preserving successor for ``player``'s winning vertices.
    """
    n = a.n
    worst = max((-w for w in weights if w < 0), default=0)
    top = n * worst + 1
    succ = [[(a.edges[k][1], weights[k]) for k in a.out_edges(v)] for v in range(n)]
    pred = [[a.edges[k][0] for k in a.in_edges(v)] for v in range(n)]
    mine = [a.owner[v] == player for v in range(n)]
    f = [0] * n

    def lifted(v):
        vals = []
        for u, w in succ[v]:
            fu = f[u]
            if fu >= top:
                vals.append(top)
            else:
                val = fu - w
                vals.append(0 if val < 0 else (val if val < top else top))
        return min(vals) if mine[v] else max(vals)

    queue = deque(range(n))
    queued = [True] * n
    while queue:
        v = queue.popleft()
        queued[v] = False
        if f[v] >= top:
            continue
        new = lifted(v)
        if new > f[v]:
            f[v] = new
            for u in pred[v]:
                if not queued[u] and f[u] < top:
                    queued[u] = True
                    queue.append(u)
    choice = {}
    for v in range(n):
        if mine[v] and f[v] < top:
            best = None
            for u, w in succ[v]:
                if f[u] >= top:
                    continue
                val = max(0, f[u] - w)
                if best is None or (val, u) < best:
                    best = (val, u)
            choice[v] = best[1]
    return [x if x < top else None for x in f], choice


def _scaled(a: WeightedArena, t: Fraction) -> list:
    """Integer weights ``q*w - p`` for threshold ``t = p/q``."""
    a.require_integer_mode()
    p, q = t.numerator, t.denominator
    return [q * w - p for w in a.weights]


def mean_payoff_region(a: WeightedArena, t) -> tuple:
    """Player 0's winning region for MP(t) and her positional strategy on it."""
    t = Fraction(t)
    shifted = _scaled(a, t)
    f, choice = energy_measure(a, [-x for x in shifted], Player.P0)
    return {v for v in range(a.n) if f[v] is not None}, choice, f


def _mean_payoff_p1(a: WeightedArena, t: Fraction) -> tuple:
    """Player 1's region for strictly exceeding ``t``, via weights ``n*(q*w - p) - 1``."""
    n = a.n
    weights = [n * x - 1 for x in _scaled(a, t)]
    f, choice = energy_measure(a, weights, Player.P1)
    return {v for v in range(a.n) if f[v] is not None}, choice


def solve_mean_payoff_threshold(a: WeightedArena, t) -> SolveResult:
    """Player 0 wins iff she can force ``limsup (1/n) EL <= t``."""
    t = Fraction(t)
    region, choice, f = mean_payoff_region(a, t)
    if a.initial in region:
        strategy = FiniteStateStrategy.positional(a, Player.P0, choice)
        return SolveResult(Player.P0, strategy, {"region_p0": region, "measure": f})
    region1, choice1 = _mean_payoff_p1(a, t)
    if region1 | region != set(range(a.n)) or region1 & region:
        raise AssertionError("mean-payoff regions do not partition the arena")
    strategy = FiniteStateStrategy.positional(a, Player.P1, choice1)
    return SolveResult(Player.P1, strategy, {"region_p0": region, "region_p1": region1, "measure": f})


def _one_player_values(a: WeightedArena, chooser: Player) -> list:
    """Values when only ``chooser`` has real choices: best reachable cycle mean."""
    adj = [[(a.edges[k][1], a.weights[k]) for k in a.out_edges(v)] for v in range(a.n)]
    comps = graphs.sccs(adj)  # sinks first
    comp_of = {}
    for i, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = i
    best = [None] * len(comps)
    for i, comp in enumerate(comps):
        cand = []
        if graphs.has_cycle(adj, comp):
            if chooser == Player.P0:
                cand.append(graphs.min_cycle_mean(adj, comp)[0])
            else:
                cand.append(graphs.max_cycle_mean(adj, comp)[0])
        for v in comp:
            for u, _ in adj[v]:
                j = comp_of[u]
                if j != i:
                    cand.append(best[j])
        best[i] = min(cand) if chooser == Player.P0 else max(cand)
    return [best[comp_of[v]] for v in range(a.n)]


def _candidates(n: int, bound: int) -> list:
    values = set()
    for q in range(1, n + 1):
        for p in range(-q * bound, q * bound + 1):
            values.add(Fraction(p, q))
    return sorted(values)


def mean_payoff_values(a: WeightedArena) -> list:
    """Exact mean-payoff value of every vertex (Player 0 minimizing)."""
    a.require_integer_mode()
    for chooser in (Player.P0, Player.P1):
        other = chooser.opponent
        if all(len(a.out_edges(v)) == 1 for v in a.vertices_of(other)):
            return _one_player_values(a, chooser)
    cands = _candidates(a.n, max_abs_weight(a))
    values = [None] * a.n
    probes = {}

    def region(i):
        if i not in probes:
            probes[i] = mean_payoff_region(a, cands[i])[0]
        return probes[i]

    # the value is the least candidate at which Player 0 wins; split all vertices at once
    stack = [(0, len(cands) - 1, list(range(a.n)))]
    while stack:
        lo, hi, verts = stack.pop()
        if not verts:
            continue
        if lo == hi:
            for v in verts:
                values[v] = cands[lo]
            continue
        mid = (lo + hi) // 2
        won = region(mid)
        stack.append((lo, mid, [v for v in verts if v in won]))
        stack.append((mid + 1, hi, [v for v in verts if v not in won]))
    return values


def mean_payoff_value(a: WeightedArena, v: Optional[int] = None) -> Fraction:
    v = a.initial if v is None else v
    return mean_payoff_values(a)[v]


# -- bounded energy ---------------------------------------------------------------

def solve_energy_l(a: WeightedArena) -> SolveResult:
    """Energy_L with initial energy 0: Player 0 wins iff her minimal credit is 0."""
    a.require_integer_mode()
    f, choice = energy_measure(a, list(a.weights), Player.P0)
    winner = Player.P0 if f[a.initial] == 0 else Player.P1
    strategy = FiniteStateStrategy.positional(a, Player.P0, choice) if winner == Player.P0 else None
    return SolveResult(winner, strategy, {"measure": f})


def _solve_safety_product(a: WeightedArena, mem) -> SolveResult:
    prod, nodes = product_with_map(a, mem, lambda k, s: 0)
    bad = {i for i, (_, s) in enumerate(nodes) if is_bottom(mem, s)}
    lost, p1_moves = _attractor(prod, Player.P1, bad)
    safe = set(range(prod.n)) - lost
    if prod.initial in safe:
        choice = {}
        for i in safe:
            if prod.owner[i] == Player.P0:
                choice[i] = min(u for u in prod.successors(i) if u in safe)
        strategy = pullback(a, mem, nodes, choice, Player.P0)
        winner = Player.P0
    else:
        strategy = pullback(a, mem, nodes, p1_moves, Player.P1)
        winner = Player.P1
    cert = {"product_region": {prod.names[i] for i in safe}}
    return SolveResult(winner, strategy, cert)


def solve_energy_lu(a: WeightedArena, cap: int) -> SolveResult:
    """Energy kept within ``[0, cap]`` from initial energy 0; safety on the counter product."""
    return _solve_safety_product(a, energy_memory(a, cap, "lu"))


def solve_recharge(a: WeightedArena, cap: int) -> SolveResult:
    """Recharge(cap): the recharge energy level never drops below 0."""
    return _solve_safety_product(a, energy_memory(a, cap, "recharge"))


# -- countdown ------------------------------------------------------------------------

class CountdownShapeError(ArenaError):
    pass


def countdown_sink(a: WeightedArena) -> int:
    """Validate the countdown shape rules and return the sink vertex."""
    def bad(rule, msg):
        raise CountdownShapeError(f"countdown rule {rule}: {msg}")

    if a.owner[a.initial] != Player.P0:
        bad(1, "initial vertex must belong to Player 0")
    sinks = [v for v in a.vertices_of(Player.P1) if a.has_edge(v, v)]
    if len(sinks) != 1:
        bad(1, "need exactly one Player 1 sink vertex with a self loop")
    sink = sinks[0]
    if a.successors(sink) != [sink]:
        bad(2, f"sink {a.names[sink]} may only have its self loop")
    for v in a.vertices_of(Player.P0):
        if not a.has_edge(v, sink):
            bad(2, f"{a.names[v]} has no edge to the sink")
        seen = set()
        for k in a.out_edges(v):
            u = a.edges[k][1]
            w = a.weights[k]
            if w is R:
                bad(4, f"recharge label on {a.names[v]} -> {a.names[u]}")
            if u == sink:
                if w != 0:
                    bad(4, f"edge {a.names[v]} -> {a.names[u]} must have weight 0")
                continue
            if a.owner[u] != Player.P1:
                bad(2, f"edge {a.names[v]} -> {a.names[u]} joins two Player 0 vertices")
            if w >= 0:
                bad(3, f"edge {a.names[v]} -> {a.names[u]} must have negative weight")
            if w in seen:
                bad(3, f"{a.names[v]} has two outgoing edges of weight {w}")
            seen.add(w)
    for v in a.vertices_of(Player.P1):
        if v == sink:
            if a.weights[a.edge_id(sink, sink)] != 0:
                bad(4, "sink self loop must have weight 0")
            continue
        for k in a.out_edges(v):
            u = a.edges[k][1]
            if a.owner[u] != Player.P0:
                bad(2, f"edge {a.names[v]} -> {a.names[u]} must lead to Player 0")
            if a.weights[k] != 0:
                bad(4, f"edge {a.names[v]} -> {a.names[u]} must have weight 0")
    return sink


def countdown_table(a: WeightedArena, budget: int) -> dict:
    """Winner (True = Player 0) of every reachable (vertex, remaining budget) state."""
    if budget < 0:
        raise ValueError("countdown budget must be non-negative")
    sink = countdown_sink(a)
    start = (a.initial, budget)
    seen = {start}
    stack = [start]
    while stack:
        v, b = stack.pop()
        if v == sink:
            continue
        for k in a.out_edges(v):
            nb = b + a.weights[k]
            state = (a.edges[k][1], nb)
            if nb >= 0 and state not in seen:
                seen.add(state)
                stack.append(state)
    win = {}
    # Player 0 steps strictly lower the budget (or enter the sink at the same budget);
    # Player 1 steps keep it and lead to Player 0
    rank = {v: (0 if v == sink else 1 if a.owner[v] == Player.P0 else 2) for v in range(a.n)}
    for v, b in sorted(seen, key=lambda s: (s[1], rank[s[0]])):
        if v == sink:
            win[(v, b)] = b == 0
            continue
        outcomes = []
        for k in a.out_edges(v):
            nb = b + a.weights[k]
            outcomes.append(nb >= 0 and win[(a.edges[k][1], nb)])
        win[(v, b)] = any(outcomes) if a.owner[v] == Player.P0 else all(outcomes)
    return win


def solve_countdown(a: WeightedArena, budget: int) -> SolveResult:
    """Player 0 must reach the sink with the budget spent exactly."""
    table = countdown_table(a, budget)
    winner = Player.P0 if table[(a.initial, budget)] else Player.P1
    mem = energy_memory(a, budget, "recharge")

    def nxt(v, s):
        if is_bottom(mem, s):
            return None
        for k in a.out_edges(v):
            nb = s + a.weights[k]
            good = nb >= 0 and table.get((a.edges[k][1], nb), False)
            if good == (winner == Player.P0):
                return a.edges[k][1]
        return None

    strategy = FiniteStateStrategy.from_function(a, winner, mem, nxt)
    return SolveResult(winner, strategy, {"countdown": table})
