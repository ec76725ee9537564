"""Reductions between the game families, plus the strategy-bounding transformation.

* average-bounded recharge / average bounded energy -> mean-payoff, by
  tracking the energy level in memory and paying it as the edge weight;
* existence of a recharge capacity -> three-color parity, by splitting
  vertices according to the kind of edge that enters them;
* countdown -> average-bounded recharge, and the capacity gadget;
* bounded existence of an energy capacity or an average-energy threshold;
* turning a strategy with bounded average energy into one with bounded energy.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from . import graphs
from . import objectives as O
from .arena import (R, ArenaError, FiniteStateStrategy, MemoryStructure, Player, WeightedArena,
                    max_abs_weight, max_positive_weight, product_with_map, serialize_arena)
from .evaluation import Lasso, ObjectiveValue
from .memory import BOTTOM, energy_memory, is_bottom, pullback
from .solvers import (SolveResult, countdown_sink, mean_payoff_value, solve_energy_lu,
                      solve_mean_payoff_threshold, solve_parity3)
from .strategies import energy_bound, strategy_product, verify_strategy


@dataclass
class ReductionOutput:
    """Reduced arena plus, per reduced vertex, the original vertex and memory label."""

    arena: WeightedArena
    back_map: tuple  # reduced vertex -> (original vertex index or None, memory label or None)
    objective_note: str
    memory: Optional[MemoryStructure] = None
    nodes: Optional[tuple] = None  # product nodes (vertex, state) when built as a product
    threshold: Optional[int] = None  # integer mean-payoff threshold on the reduced weights

    def serialize(self, source: WeightedArena) -> bytes:
        origin = tuple((source.names[v] if v is not None else "-", label if label is not None else "-")
                       for v, label in self.back_map)
        return serialize_arena(replace(self.arena, origin=origin), [self.objective_note])


def _energy_product(a: WeightedArena, cap: int, t, mode: str) -> ReductionOutput:
    if cap < 0:
        raise ValueError("capacity must be non-negative")
    t = Fraction(t)
    p, q = t.numerator, t.denominator
    mem = energy_memory(a, cap, mode)
    bottom = cap + 1
    prod, nodes = product_with_map(a, mem, lambda k, s: p + 1 if s == bottom else q * s)
    back = tuple((v, mem.label(s)) for v, s in nodes)
    name = "avg-recharge" if mode == "recharge" else "avg-energy-lu"
    note = f"mean-payoff threshold {p} (scaled by {q}) for {name} cap={cap} t={t}"
    return ReductionOutput(prod, back, note, mem, nodes, p)


def reduce_avg_recharge(a: WeightedArena, cap: int, t) -> ReductionOutput:
    """Product with the recharge counter; edges pay the current level, bottom pays above ``t``."""
    a.require_recharge_mode()
    return _energy_product(a, cap, t, "recharge")


def reduce_avg_energy_lu(a: WeightedArena, cap: int, t) -> ReductionOutput:
    """Product with a counter that drops to bottom when the energy leaves ``[0, cap]``."""
    a.require_integer_mode()
    return _energy_product(a, cap, t, "lu")


def solve_reduced(a: WeightedArena, red: ReductionOutput) -> SolveResult:
    """Solve the reduced mean-payoff game and pull the winner's strategy back to ``a``."""
    res = solve_mean_payoff_threshold(red.arena, red.threshold)
    choice = {i: res.strategy.next_move(i, 0) for i in red.arena.vertices_of(res.winner)}
    strategy = pullback(a, red.memory, red.nodes, choice, res.winner)
    return SolveResult(res.winner, strategy, res.certificate)


def solve_avg_recharge(a: WeightedArena, cap: int, t) -> SolveResult:
    return solve_reduced(a, reduce_avg_recharge(a, cap, t))


def solve_avg_energy_lu(a: WeightedArena, cap: int, t) -> SolveResult:
    return solve_reduced(a, reduce_avg_energy_lu(a, cap, t))


def _optimal(red: ReductionOutput, cap: int) -> ObjectiveValue:
    value = mean_payoff_value(red.arena)
    return ObjectiveValue.infinite() if value > cap else ObjectiveValue.finite(value)


def avg_recharge_value(a: WeightedArena, cap: int) -> ObjectiveValue:
    """Least threshold Player 0 can guarantee for AvgRecharge(cap); +inf if violations are forced.

    With the bottom weight set to ``cap + 1`` every cycle avoiding bottom has
    mean at most ``cap``, so a value above ``cap`` means bottom is unavoidable.
    """
    return _optimal(reduce_avg_recharge(a, cap, cap), cap)


def avg_energy_lu_value(a: WeightedArena, cap: int) -> ObjectiveValue:
    return _optimal(reduce_avg_energy_lu(a, cap, cap), cap)


# -- existence of a recharge capacity -----------------------------------------------

KINDS = ("zero", "dec", "R")  # indexed by parity color 0, 1, 2


def edge_kind(w) -> int:
    if w is R:
        return 2
    return 1 if w < 0 else 0


@dataclass
class TripledArena:
    arena: WeightedArena
    colors: dict
    back_map: tuple  # tripled vertex -> (original vertex, kind)


def reduce_exists_cap_to_parity(a: WeightedArena) -> TripledArena:
    """Split each vertex by the kind of its incoming edge; color = kind."""
    a.require_recharge_mode()
    copies = {(a.initial, 0)}
    for (u, v), w in zip(a.edges, a.weights):
        copies.add((v, edge_kind(w)))
    order = sorted(copies, key=lambda c: (c[0] != a.initial or c[1] != 0, c[0], c[1]))
    index = {c: i for i, c in enumerate(order)}
    names = tuple(f"{a.names[v]}@{KINDS[k]}" for v, k in order)
    owner = tuple(a.owner[v] for v, _ in order)
    edges, weights = [], []
    for i, (u, _) in enumerate(order):
        for e in a.out_edges(u):
            v = a.edges[e][1]
            edges.append((i, index[(v, edge_kind(a.weights[e]))]))
            weights.append(a.weights[e])
    origin = tuple((a.names[v], KINDS[k]) for v, k in order)
    tripled = WeightedArena(names, owner, tuple(edges), tuple(weights), 0, origin)
    colors = {i: k for i, (_, k) in enumerate(order)}
    return TripledArena(tripled, colors, tuple(order))


def kind_memory(a: WeightedArena) -> MemoryStructure:
    """Three states remembering the kind of the last edge taken (initially zero)."""
    return MemoryStructure.from_function(a, 3, 0, lambda s, k: edge_kind(a.weights[k]), KINDS)


@dataclass
class CapResult:
    """Outcome of a capacity search: ``found`` with a capacity, or not found up to ``cap_max``."""

    found: bool
    cap: Optional[int] = None
    strategy: Optional[FiniteStateStrategy] = None
    cap_max: Optional[int] = None
    minimal: bool = False

    @property
    def threshold(self) -> Optional[int]:
        """Average-energy threshold witnessed by the capacity (levels never exceed it)."""
        return self.cap


def exists_cap_recharge(a: WeightedArena) -> CapResult:
    """Decide whether some capacity lets Player 0 win Recharge, via the parity route.

    The witness capacity is the number of decrement copies times the largest
    decrement; the pulled-back strategy uses the kind memory and is verified.
    """
    trip = reduce_exists_cap_to_parity(a)
    res = solve_parity3(trip.arena, trip.colors)
    if res.winner == Player.P1:
        return CapResult(False)
    W = max((-w for w in a.weights if w is not R and w < 0), default=0)
    decrements = sum(1 for _, k in trip.back_map if k == 1)
    cap = decrements * W
    index = {c: i for i, c in enumerate(trip.back_map)}

    def nxt(v, s):
        i = index.get((v, s))
        if i is None:
            return None
        return trip.back_map[res.strategy.next_move(i, 0)][0]

    strategy = FiniteStateStrategy.from_function(a, Player.P0, kind_memory(a), nxt)
    if not verify_strategy(a, strategy, O.Recharge(cap)).accepted:
        raise AssertionError(f"parity strategy does not win Recharge({cap})")
    return CapResult(True, cap, strategy)


def default_cap_max(a: WeightedArena) -> int:
    return a.n * max(max_abs_weight(a), 1) * 2 ** 8


def exists_cap_energy_lu(a: WeightedArena, cap_max: Optional[int] = None) -> CapResult:
    """Least ``cap <= cap_max`` for which Player 0 wins Energy_LU(cap), by binary search."""
    a.require_integer_mode()
    cap_max = default_cap_max(a) if cap_max is None else cap_max
    if cap_max < 0:
        raise ValueError("cap_max must be non-negative")
    if solve_energy_lu(a, cap_max).winner != Player.P0:
        return CapResult(False, cap_max=cap_max)
    lo, hi = 0, cap_max
    while lo < hi:
        mid = (lo + hi) // 2
        if solve_energy_lu(a, mid).winner == Player.P0:
            hi = mid
        else:
            lo = mid + 1
    return CapResult(True, lo, solve_energy_lu(a, lo).strategy, cap_max, minimal=True)


def exists_threshold_avg_energy_l(a: WeightedArena, cap_max: Optional[int] = None) -> CapResult:
    """Some threshold is achievable iff some capacity is; the capacity doubles as threshold."""
    return exists_cap_energy_lu(a, cap_max)


# -- countdown -----------------------------------------------------------------------

def _fresh(a: WeightedArena, base: str) -> str:
    taken = set(a.names)
    name = base
    while name in taken:
        name += "'"
    return name


def reduce_countdown_to_avg_recharge(a: WeightedArena, budget: int) -> ReductionOutput:
    """Fresh Player 1 start with a recharge edge to the old start; target AvgRecharge(budget, 0)."""
    countdown_sink(a)
    start = _fresh(a, "start")
    vertices = [(start, Player.P1)] + [(a.names[v], a.owner[v]) for v in range(a.n)]
    edges = [(start, a.names[a.initial], R)]
    edges += [(a.names[u], a.names[v], w) for (u, v), w in zip(a.edges, a.weights)]
    out = WeightedArena.build(vertices, edges, start)
    back = ((None, None),) + tuple((v, None) for v in range(a.n))
    return ReductionOutput(out, back, f"avg-recharge cap={budget} t=0")


def build_fig4_gadget(a: WeightedArena, budget: int) -> WeightedArena:
    """Prefix a countdown game with a gadget forcing entry at energy level exactly ``budget``.

    ``g0`` (Player 0) burns one unit per self loop and moves to ``g1``
    (Player 1), which either enters the countdown game or takes ``-budget`` to
    the zero-loop ``g2``.
    """
    countdown_sink(a)
    g0, g1, g2 = (_fresh(a, n) for n in ("g0", "g1", "g2"))
    vertices = [(g0, Player.P0), (g1, Player.P1), (g2, Player.P0)]
    vertices += [(a.names[v], a.owner[v]) for v in range(a.n)]
    edges = [(g0, g0, -1), (g0, g1, 0), (g1, g2, -budget), (g1, a.names[a.initial], 0), (g2, g2, 0)]
    edges += [(a.names[u], a.names[v], w) for (u, v), w in zip(a.edges, a.weights)]
    return WeightedArena.build(vertices, edges, g0)


def gadget_sweep(a: WeightedArena, budget: int, caps=None) -> Optional[int]:
    """Least capacity in ``caps`` (default ``0..budget+2``) at which Player 0 wins the gadget game."""
    g = build_fig4_gadget(a, budget)
    caps = range(budget + 3) if caps is None else caps
    for cap in caps:
        if solve_avg_recharge(g, cap, 0).winner == Player.P0:
            return cap
    return None


# -- bounding a strategy's energy ------------------------------------------------------

class BoundifyError(ValueError):
    def __init__(self, message: str, witness: Optional[Lasso] = None):
        super().__init__(message)
        self.witness = witness


def _peaks(prod, above: list) -> dict:
    """Highest energy reachable from each above-threshold configuration without dropping."""
    inside = set(above)
    adj = [[(j, 0) for j, _ in row if j in inside] if i in inside else []
           for i, row in enumerate(prod.adj)]
    peak = {}
    for comp in graphs.sccs(adj, above):  # successors' components come first
        members = set(comp)
        best = max(prod.nodes[i][2] for i in comp)
        for i in comp:
            for j, _ in adj[i]:
                if j not in members:
                    best = max(best, peak[j])
        for i in comp:
            peak[i] = best
    return peak


def boundify_strategy(a: WeightedArena, sigma: FiniteStateStrategy, t) -> tuple:
    """Strategy with bounded energy from one winning AvgEnergy_L(t).

    Configurations (vertex, memory, energy) of ``sigma`` are explored; every
    time the energy rises above ``t`` the memory jumps to the configuration
    at the same vertex and level whose excursion above ``t`` peaks lowest.
    Returns ``(strategy, certified_cap)``; the strategy is verified against
    Energy_LU(certified_cap).
    """
    t = Fraction(t)
    verdict = verify_strategy(a, sigma, O.AvgEnergyL(t))
    if not verdict.accepted:
        raise BoundifyError(f"strategy does not win {O.describe(O.AvgEnergyL(t))}", verdict.witness)
    bound = energy_bound(a, sigma)
    if bound is None:
        raise BoundifyError("energy diverges above the threshold although the average is bounded")
    prod = strategy_product(a, sigma, energy_memory(a, bound, "lu"))
    above = [i for i, (_, _, e) in enumerate(prod.nodes) if e > t]
    peak = _peaks(prod, above)
    W = max_positive_weight(a)
    rep = {}
    for i in above:
        v, m, e = prod.nodes[i]
        if e <= t + W:
            key = (peak[i], m)
            if (v, e) not in rep or key < rep[(v, e)][0]:
                rep[(v, e)] = (key, m)
    rep = {k: m for k, (_, m) in rep.items()}

    def build(cap):
        M = sigma.memory.size
        size = M * (cap + 1) + 1
        bottom = size - 1

        def update(s, k):
            if s == bottom:
                return bottom
            m, e = divmod(s, cap + 1)
            e2 = e + a.weights[k]
            if not 0 <= e2 <= cap:
                return bottom
            m2 = sigma.memory.table[m][k]
            if e <= t < e2:
                m2 = rep.get((a.edges[k][1], e2), m2)  # absent only off the reachable part
            return m2 * (cap + 1) + e2

        labels = [f"{sigma.memory.label(m)}/{e}" for m in range(M) for e in range(cap + 1)]
        mem = MemoryStructure.from_function(a, size, sigma.memory.initial * (cap + 1), update,
                                            labels + [BOTTOM])
        return FiniteStateStrategy.from_function(
            a, Player.P0, mem,
            lambda v, s: None if s == bottom else sigma.next_move(v, s // (cap + 1)))

    wide = build(bound)
    levels = [s % (bound + 1) for _, s, _ in strategy_product(a, wide).nodes
              if s != wide.memory.size - 1]
    cap = max(levels)
    result = build(cap)
    if not verify_strategy(a, result, O.EnergyLU(cap)).accepted:
        raise AssertionError("bounded strategy leaves the certified energy range")
    return result, cap
