import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from energygames import ArenaError, FiniteStateStrategy, Lasso, MemoryStructure, Player, WeightedArena, load_fixture
from energygames import objectives as O
from energygames.evaluation import ObjectiveValue, avg_energy_of_lasso, mean_payoff_of_lasso
from energygames.oracle import random_arena, random_recharge_arena
from energygames.reductions import solve_avg_recharge
from energygames.solvers import solve_energy_lu, solve_mean_payoff_threshold
from energygames.strategies import (SearchSpaceError, canonicalize, enumerate_strategies, parse_strategy,
                                    reachable_memory_states, serialize_strategy, strategy_from_lasso,
                                    strategy_product, verify_strategy, worst_consistent_value)

from support import counting_strategy


def test_product_shape():
    a = load_fixture("INTRO")
    sigma = FiniteStateStrategy.positional(a, Player.P0, {0: 2, 1: 0})
    prod = strategy_product(a, sigma)
    for i, (v, s, _) in enumerate(prod.nodes):
        if a.owner[v] == Player.P0:
            assert len(prod.adj[i]) == 1
        else:
            assert len(prod.adj[i]) == len(a.out_edges(v))
    assert prod.nodes[0] == (a.initial, 0, 0)


def test_memlb_counting_strategy_accepted():
    a = load_fixture("MEMLB")
    sigma = counting_strategy(a, 4)
    v = verify_strategy(a, sigma, O.AvgRecharge(4, Fraction(2)))
    assert v.accepted
    assert v.worst_value == ObjectiveValue.finite(2)
    assert len(reachable_memory_states(a, sigma)) == 4


def test_memlb_two_state_strategy_rejected():
    a = load_fixture("MEMLB")
    best = min((worst_consistent_value(a, s, O.AvgRecharge(4)) for s in enumerate_strategies(a, 2)),
               key=ObjectiveValue.sort_key)
    assert best == ObjectiveValue.finite(3)
    for sigma in enumerate_strategies(a, 2):
        v = verify_strategy(a, sigma, O.AvgRecharge(4, Fraction(2)))
        assert not v.accepted
        # the witness really fails the objective
        assert not avg_energy_of_lasso(a, v.witness, recharge_cap=4).within(2)


def test_zero_weights_energy_l_accepted():
    a = WeightedArena.build([("a", "p0"), ("b", "p1")], [("a", "b", 0), ("b", "a", 0), ("a", "a", 0)], "a")
    for sigma in enumerate_strategies(a, 1):
        assert verify_strategy(a, sigma, O.EnergyL()).accepted


def test_worst_value_tradeoff_lassos():
    a = load_fixture("TRADEOFF")
    cap1 = strategy_from_lasso(a, Lasso.parse("cycle: v0 v1 v2 v0", a))
    assert worst_consistent_value(a, cap1, O.AvgRecharge(1)) == ObjectiveValue.finite(Fraction(3, 4))
    cap2 = strategy_from_lasso(a, Lasso.parse("cycle: v0 v1 v2 v0 v1 v2 v0", a))
    assert worst_consistent_value(a, cap2, O.AvgRecharge(2)) == ObjectiveValue.finite(Fraction(9, 7))
    z = WeightedArena.build([("z", "p0")], [("z", "z", 0)], "z")
    only = next(enumerate_strategies(z, 1))
    assert worst_consistent_value(z, only, O.AvgEnergyL()) == ObjectiveValue.finite(0)


def test_worst_value_needs_average_family():
    a = load_fixture("MEMLB")
    with pytest.raises(ValueError):
        worst_consistent_value(a, counting_strategy(a, 4), O.Recharge(4))


def test_enumeration_memlb_positional():
    a = load_fixture("MEMLB")
    strategies = list(enumerate_strategies(a, 1))
    assert len(strategies) == 2
    values = sorted((worst_consistent_value(a, s, O.AvgRecharge(4)) for s in strategies),
                    key=ObjectiveValue.sort_key)
    assert values[0] == ObjectiveValue.finite(Fraction(7, 2))
    assert values[1].kind == "violated"


def test_enumeration_single_successor():
    a = WeightedArena.build([("a", "p0"), ("b", "p0")], [("a", "b", 1), ("b", "a", -1)], "a")
    assert len(list(enumerate_strategies(a, 1))) == 1
    # larger memories only count steps; the induced play stays the same
    bigger = list(enumerate_strategies(a, 3))
    assert bigger
    assert {str(worst_consistent_value(a, s, O.MeanPayoff())) for s in bigger} == {"0/1"}


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_enumeration_memlb_best_value(n):
    a = load_fixture("MEMLB")
    best = min((worst_consistent_value(a, s, O.AvgRecharge(4)) for s in enumerate_strategies(a, n)),
               key=ObjectiveValue.sort_key)
    assert best == ObjectiveValue.finite(4 - Fraction(n, 2))


def test_enumeration_is_canonical_and_exact():
    a = load_fixture("INTRO")
    seen = set()
    for sigma in enumerate_strategies(a, 2):
        assert len(reachable_memory_states(a, sigma)) == 2
        key = serialize_strategy(canonicalize(a, sigma), a)
        assert key not in seen
        seen.add(key)
    assert seen


def test_enumeration_guard():
    a = load_fixture("INTRO")
    with pytest.raises(SearchSpaceError):
        list(enumerate_strategies(a, 3, limit=50))


def test_strategy_file_roundtrip():
    a = load_fixture("INTRO")
    sigma = solve_energy_lu(a, 5).strategy
    text = serialize_strategy(sigma, a)
    back = parse_strategy(text, a)
    assert back.memory.table == sigma.memory.table
    assert dict(back.moves) == dict(sigma.moves)
    assert back.player == Player.P0
    assert verify_strategy(a, back, O.EnergyLU(5)).accepted


def test_strategy_file_errors():
    a = load_fixture("INTRO")
    with pytest.raises(ArenaError):
        parse_strategy("strategy\nmemory 1\ninitmem 0\n", a)
    with pytest.raises(ArenaError, match="line 2"):
        parse_strategy("strategy\nupd 0 v0 v9 0\n", a)


def test_canonicalize_drops_unreachable_states():
    a = load_fixture("INTRO")
    mem = MemoryStructure(3, 2, tuple((2,) * a.m for _ in range(3)))
    sigma = FiniteStateStrategy.from_function(a, Player.P0, mem, lambda v, s: None)
    c = canonicalize(a, sigma)
    assert c.memory.size == 1
    assert verify_strategy(a, c, O.MeanPayoff(10)).accepted == verify_strategy(a, sigma, O.MeanPayoff(10)).accepted


def sample_lassos(a, sigma, rng, count):
    """Random consistent plays, closed once a (vertex, memory) pair repeats."""
    for _ in range(count):
        v, s = a.initial, sigma.memory.initial
        seen = {}
        walk = []
        while (v, s) not in seen:
            seen[(v, s)] = len(walk)
            walk.append(v)
            u = sigma.next_move(v, s) if a.owner[v] == sigma.player else rng.choice(a.successors(v))
            s = sigma.memory.update(s, a.edge_id(v, u))
            v = u
        j = seen[(v, s)]
        yield Lasso(walk[:j], walk[j:])


def satisfies(a, lasso, obj):
    if isinstance(obj, O.AvgRecharge):
        return avg_energy_of_lasso(a, lasso, recharge_cap=obj.cap).within(obj.t)
    if isinstance(obj, O.MeanPayoff):
        return mean_payoff_of_lasso(a, lasso) <= obj.t
    if isinstance(obj, O.EnergyLU):
        return avg_energy_of_lasso(a, lasso, upper=obj.cap).kind != "violated"
    raise AssertionError(obj)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4), st.integers(0, 3), st.fractions(0, 3, max_denominator=3))
def test_verdicts_agree_with_sampled_plays(seed, n, cap, t):
    a = random_recharge_arena(seed, n)
    rng = random.Random(seed)
    obj = O.AvgRecharge(cap, t)
    sigma = solve_avg_recharge(a, cap, t).strategy
    if sigma.player == Player.P1:
        sigma = next(enumerate_strategies(a, 1))
    v = verify_strategy(a, sigma, obj)
    if v.accepted:
        for l in sample_lassos(a, sigma, rng, 200):
            assert satisfies(a, l, obj)
    else:
        assert not satisfies(a, v.witness, obj)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5), st.fractions(-3, 3, max_denominator=4), st.integers(0, 4))
def test_verdicts_integer_objectives(seed, n, t, cap):
    a = random_arena(seed, n, weight=3)
    rng = random.Random(seed)
    for sigma in (solve_mean_payoff_threshold(a, 0).strategy, next(enumerate_strategies(a, 1))):
        if sigma.player != Player.P0:
            continue
        for obj in (O.MeanPayoff(t), O.EnergyLU(cap)):
            v = verify_strategy(a, sigma, obj)
            if v.accepted:
                for l in sample_lassos(a, sigma, rng, 100):
                    assert satisfies(a, l, obj)
            else:
                assert not satisfies(a, v.witness, obj)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5), st.integers(0, 3))
def test_solitaire_worst_value_is_the_unique_play(seed, n, cap):
    a = random_recharge_arena(seed, n)
    solitaire = WeightedArena(a.names, (Player.P0,) * a.n, a.edges, a.weights, a.initial)
    sigma = next(enumerate_strategies(solitaire, 1))
    (play,) = list(sample_lassos(solitaire, sigma, random.Random(0), 1))
    expected = avg_energy_of_lasso(solitaire, play, recharge_cap=cap)
    got = worst_consistent_value(solitaire, sigma, O.AvgRecharge(cap))
    if expected.kind == "violated":
        assert got.kind == "violated"
    else:
        assert got == expected
