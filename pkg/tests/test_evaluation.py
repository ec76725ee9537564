import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from energygames import ArenaError, Lasso, load_fixture
from energygames.arena import WeightedArena
from energygames.evaluation import (ObjectiveValue, Reason, avg_energy_of_lasso, energy_level,
                                    mean_payoff_of_lasso, prefix_average, prefix_mean_payoff,
                                    recharge_energy_level)
from energygames.oracle import random_arena, random_recharge_arena

from support import random_lasso


def path(a, text):
    return a.path_from_names(text.split())


def lasso(a, text):
    return Lasso.parse(text, a)


def zero_loop():
    return WeightedArena.build([("z", "p0")], [("z", "z", 0)], "z")


def test_energy_levels_intro():
    a = load_fixture("INTRO")
    assert energy_level(a, path(a, "v0 v2")) == 3
    assert energy_level(a, path(a, "v0 v2 v0")) == 5
    assert energy_level(a, path(a, "v0 v2 v0 v1")) == 4
    assert energy_level(a, path(a, "v0 v1 v2")) == -2
    assert energy_level(a, path(a, "v1")) == 0


def test_energy_level_rejects_recharge():
    a = load_fixture("MEMLB")
    with pytest.raises(ArenaError):
        energy_level(a, path(a, "v0 v1 v0"))


def test_recharge_levels_memlb():
    a = load_fixture("MEMLB")
    assert recharge_energy_level(a, 4, path(a, "v0 v1 v1")) == 2
    assert recharge_energy_level(a, 4, path(a, "v0 v1 v1 v1 v1 v0")) == 4
    assert recharge_energy_level(a, 7, path(a, "v1")) == 7


def test_intro_average_is_four():
    a = load_fixture("INTRO")
    assert avg_energy_of_lasso(a, lasso(a, "prefix: v0 ; cycle: v2 v0 v1")) == ObjectiveValue.finite(4)


@pytest.mark.parametrize("cap, text, expected", [
    (1, "cycle: v0 v1 v2 v0", Fraction(3, 4)),
    (2, "cycle: v0 v1 v2 v0 v1 v2 v0", Fraction(9, 7)),
    (3, "cycle: v0 v3 v4 v5 v0", Fraction(3, 5)),
])
def test_tradeoff_witness_lassos(cap, text, expected):
    a = load_fixture("TRADEOFF")
    assert avg_energy_of_lasso(a, lasso(a, text), recharge_cap=cap) == ObjectiveValue.finite(expected)


def test_tradeoff_witness_with_missing_self_loop_is_rejected():
    a = load_fixture("TRADEOFF")
    with pytest.raises(ArenaError):
        lasso(a, "cycle: v0 v3 v4 v4 v0")


def test_zero_loop_and_mean_payoff():
    z = zero_loop()
    assert avg_energy_of_lasso(z, Lasso((), (0,))) == ObjectiveValue.finite(0)
    neg = WeightedArena.build([("a", "p0")], [("a", "a", -1)], "a")
    assert mean_payoff_of_lasso(neg, Lasso((), (0,))) == -1
    two = WeightedArena.build([("a", "p0"), ("b", "p1")], [("a", "b", 3), ("b", "a", -1)], "a")
    assert mean_payoff_of_lasso(two, Lasso((), (0, 1))) == 1


def test_plain_mode_outcomes():
    up = WeightedArena.build([("a", "p0")], [("a", "a", 1)], "a")
    assert avg_energy_of_lasso(up, Lasso((), (0,))).kind == "inf"
    assert avg_energy_of_lasso(up, Lasso((), (0,)), upper=3) == ObjectiveValue.violated(Reason.UPPER_BOUND, 4)
    down = WeightedArena.build([("a", "p0")], [("a", "a", -1)], "a")
    assert avg_energy_of_lasso(down, Lasso((), (0,))) == ObjectiveValue.violated(Reason.LOWER_BOUND, 1)


def test_recharge_violation_index():
    a = load_fixture("MEMLB")
    always_loop = lasso(a, "prefix: v0 ; cycle: v1")
    assert avg_energy_of_lasso(a, always_loop, recharge_cap=4) == ObjectiveValue.violated(
        Reason.NEGATIVE_RECHARGE, 5)


def test_mode_mismatch():
    a = load_fixture("MEMLB")
    with pytest.raises(ArenaError):
        avg_energy_of_lasso(a, lasso(a, "cycle: v0 v1"))
    b = load_fixture("INTRO")
    with pytest.raises(ArenaError):
        avg_energy_of_lasso(b, lasso(b, "cycle: v0 v1"), recharge_cap=3)


def test_lasso_text_roundtrip():
    a = load_fixture("INTRO")
    l = lasso(a, "prefix: v0 ; cycle: v2 v0 v1")
    assert l.format(a) == "prefix: v0 ; cycle: v2 v0 v1"
    assert Lasso.parse(l.format(a), a) == l
    with pytest.raises(ArenaError):
        lasso(a, "prefix: v1 ; cycle: v0")
    with pytest.raises(ValueError):
        Lasso.parse("nonsense", a)


def _first_negative(levels):
    return next((i for i, x in enumerate(levels) if x < 0), None)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5), st.integers(0, 4), st.integers(1, 3))
def test_recharge_value_matches_unrolled_play(seed, n, cap, k):
    a = random_recharge_arena(seed, n)
    rng = random.Random(seed)
    l = random_lasso(a, rng)
    val = avg_energy_of_lasso(a, l, recharge_cap=cap)
    assert avg_energy_of_lasso(a, l.rotated(), recharge_cap=cap).sort_key() == val.sort_key()
    assert avg_energy_of_lasso(a, l.repeated(k), recharge_cap=cap) == val
    horizon = len(l.prefix) + len(l.cycle) * (4 * cap + 6)
    play = l.unroll(horizon)
    levels = [recharge_energy_level(a, cap, play[:i + 1]) for i in range(horizon)]
    bad = _first_negative(levels)
    if val.kind == "violated":
        assert bad == val.index
    else:
        assert bad is None
        # the average over whole periods after the prefix is exactly the value
        start = len(l.prefix) + len(l.cycle)
        window = levels[start:start + len(l.cycle)]
        assert Fraction(sum(window), len(window)) == val.value


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5))
def test_plain_value_matches_unrolled_play(seed, n):
    a = random_arena(seed, n, weight=2)
    l = random_lasso(a, random.Random(seed))
    val = avg_energy_of_lasso(a, l)
    drift = energy_level(a, list(l.cycle) + [l.cycle[0]])
    horizon = len(l.prefix) + len(l.cycle) * 30
    play = l.unroll(horizon)
    levels = [energy_level(a, play[:i + 1]) for i in range(horizon)]
    bad = _first_negative(levels)
    if val.kind == "violated":
        assert bad == val.index and val.reason == Reason.LOWER_BOUND
        return
    assert bad is None
    if drift > 0:
        assert val.kind == "inf"
    else:
        assert drift == 0
        assert avg_energy_of_lasso(a, l.rotated()) == val
        p = len(l.cycle)
        long_avg = prefix_average(a, l, len(l.prefix) + 100 * p)
        assert abs(long_avg - val.value) <= Fraction(len(l.prefix) + p, 100 * p) * (max(map(abs, levels)) + 1)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5))
def test_mean_payoff_is_limit_of_prefix_means(seed, n):
    a = random_arena(seed, n, weight=4)
    l = random_lasso(a, random.Random(seed))
    mp = mean_payoff_of_lasso(a, l)
    p = len(l.cycle)
    for reps in (10, 100):
        length = len(l.prefix) + reps * p
        # the gap is the prefix contribution spread over the length
        gap = abs(prefix_mean_payoff(a, l, length) - mp)
        assert gap <= Fraction(4 * (len(l.prefix) + p), length)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 5), st.data())
def test_energy_level_additive(seed, n, data):
    a = random_arena(seed, n)
    walk = [a.initial]
    rng = random.Random(seed)
    for _ in range(8):
        walk.append(rng.choice(a.successors(walk[-1])))
    cut = data.draw(st.integers(0, len(walk) - 1))
    assert energy_level(a, walk) == energy_level(a, walk[:cut + 1]) + energy_level(a, walk[cut:])
