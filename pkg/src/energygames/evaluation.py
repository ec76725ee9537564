"""Exact energy levels and long-run values of ultimately periodic plays."""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

from .arena import R, ArenaError, WeightedArena


def energy_level(a: WeightedArena, prefix: Sequence[int]) -> int:
    total = 0
    for k in a.path_ids(prefix):
        w = a.weights[k]
        if w is R:
            raise ArenaError("recharge edge on path; use recharge_energy_level")
        total += w
    return total


def recharge_energy_level(a: WeightedArena, cap: int, prefix: Sequence[int]) -> int:
    """``cap`` plus the weight of the longest suffix without a recharge edge."""
    level = cap
    for k in a.path_ids(prefix):
        w = a.weights[k]
        level = cap if w is R else level + w
    return level


@dataclass(frozen=True)
class Lasso:
    """The play ``prefix . cycle^omega`` (vertex indices); the prefix may be empty."""

    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise ValueError("lasso cycle must be non-empty")

    def validate(self, a: WeightedArena) -> None:
        first = self.prefix[0] if self.prefix else self.cycle[0]
        if first != a.initial:
            raise ArenaError("lasso does not start at the initial vertex")
        a.path_ids(list(self.prefix) + list(self.cycle) + [self.cycle[0]])

    def position(self, i: int) -> int:
        """Vertex at position ``i`` of the infinite play."""
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def unroll(self, length: int) -> list:
        return [self.position(i) for i in range(length)]

    def rotated(self) -> "Lasso":
        """Same play, with the first cycle vertex moved into the prefix."""
        return Lasso(self.prefix + self.cycle[:1], self.cycle[1:] + self.cycle[:1])

    def repeated(self, k: int) -> "Lasso":
        return Lasso(self.prefix, self.cycle * k)

    def format(self, a: WeightedArena) -> str:
        pre = " ".join(a.names[v] for v in self.prefix)
        cyc = " ".join(a.names[v] for v in self.cycle)
        return f"prefix: {pre} ; cycle: {cyc}" if pre else f"cycle: {cyc}"

    @classmethod
    def parse(cls, text: str, a: WeightedArena) -> "Lasso":
        m = re.fullmatch(r"\s*(?:prefix:(?P<p>[^;]*);)?\s*cycle:(?P<c>.*)", text)
        if not m:
            raise ValueError(f"cannot parse lasso {text!r}")
        pre = (m.group("p") or "").split()
        lasso = cls(tuple(a.path_from_names(pre)),
                    tuple(a.path_from_names(m.group("c").split())))
        lasso.validate(a)
        return lasso


class Reason(Enum):
    LOWER_BOUND = "LowerBound"
    UPPER_BOUND = "UpperBound"
    NEGATIVE_RECHARGE = "NegativeRecharge"


@dataclass(frozen=True)
class ObjectiveValue:
    """``finite`` (with ``value``), ``inf``, or ``violated`` (with reason and earliest index)."""

    kind: str
    value: Optional[Fraction] = None
    reason: Optional[Reason] = None
    index: Optional[int] = None

    @classmethod
    def finite(cls, value) -> "ObjectiveValue":
        return cls("finite", Fraction(value))

    @classmethod
    def infinite(cls) -> "ObjectiveValue":
        return cls("inf")

    @classmethod
    def violated(cls, reason: Reason, index: int) -> "ObjectiveValue":
        return cls("violated", reason=reason, index=index)

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    def sort_key(self) -> tuple:
        """Finite values order by value, then +inf, then any violation."""
        if self.kind == "finite":
            return (0, self.value)
        return (1, 0) if self.kind == "inf" else (2, 0)

    def within(self, t) -> bool:
        return self.kind == "finite" and self.value <= t

    def __str__(self) -> str:
        if self.kind == "finite":
            return f"{self.value.numerator}/{self.value.denominator}"
        if self.kind == "inf":
            return "+inf"
        reason = self.reason.value if self.reason is not None else ""
        return f"violated({reason}@{self.index})"


def _levels(a: WeightedArena, play: Sequence[int], cap: Optional[int]) -> list:
    """Energy level (or recharge level when ``cap`` is set) at each position of ``play``."""
    level = 0 if cap is None else cap
    out = [level]
    for k in a.path_ids(play):
        w = a.weights[k]
        level = cap if w is R else level + w
        out.append(level)
    return out


def _drift_index(start: int, period: int, base: Sequence[int], drift: int,
                 bad) -> Optional[int]:
    """Earliest position ``start + k*period + j`` where ``bad(base[j] + k*drift)`` holds.

    ``bad`` is ``('lt', bound)`` or ``('gt', bound)``; the sequence moves by
    ``drift`` per period.
    """
    op, bound = bad
    best = None
    for j, b in enumerate(base):
        if op == "lt":
            if b < bound:
                k = 0
            elif drift < 0:
                k = (b - bound) // (-drift) + 1
            else:
                continue
        else:
            if b > bound:
                k = 0
            elif drift > 0:
                k = (bound - b) // drift + 1
            else:
                continue
        idx = start + k * period + j
        if best is None or idx < best:
            best = idx
    return best


def avg_energy_of_lasso(a: WeightedArena, lasso: Lasso, recharge_cap: Optional[int] = None,
                        upper: Optional[int] = None) -> ObjectiveValue:
    """Long-run average of the energy levels along ``lasso``.

    Plain mode (``recharge_cap`` is None) always tracks the lower bound 0 and,
    when ``upper`` is given, the upper bound as well.  With ``recharge_cap``
    the recharge energy level is averaged and must stay non-negative.
    """
    lasso.validate(a)
    L, p = len(lasso.prefix), len(lasso.cycle)
    if recharge_cap is None:
        a.require_integer_mode()
        levels = _levels(a, lasso.unroll(L + p + 1), None)
        base = levels[L:L + p]
        drift = levels[L + p] - levels[L]
        hits = []
        for i in range(L):
            if levels[i] < 0:
                hits.append((i, Reason.LOWER_BOUND))
                break
        lo = _drift_index(L, p, base, drift, ("lt", 0))
        if lo is not None:
            hits.append((lo, Reason.LOWER_BOUND))
        if upper is not None:
            for i in range(L):
                if levels[i] > upper:
                    hits.append((i, Reason.UPPER_BOUND))
                    break
            hi = _drift_index(L, p, base, drift, ("gt", upper))
            if hi is not None:
                hits.append((hi, Reason.UPPER_BOUND))
        if hits:
            idx, reason = min(hits, key=lambda h: h[0])
            return ObjectiveValue.violated(reason, idx)
        if drift > 0:
            return ObjectiveValue.infinite()
        return ObjectiveValue.finite(Fraction(sum(base), p))

    a.require_recharge_mode()
    play = lasso.unroll(L + 2 * p + 1)
    levels = _levels(a, play, recharge_cap)
    cycle_ids = a.path_ids(list(lasso.cycle) + [lasso.cycle[0]])
    if any(a.weights[k] is R for k in cycle_ids):
        for i in range(L + 2 * p):
            if levels[i] < 0:
                return ObjectiveValue.violated(Reason.NEGATIVE_RECHARGE, i)
        return ObjectiveValue.finite(Fraction(sum(levels[L + p:L + 2 * p]), p))
    for i in range(L):
        if levels[i] < 0:
            return ObjectiveValue.violated(Reason.NEGATIVE_RECHARGE, i)
    base = levels[L:L + p]
    drift = levels[L + p] - levels[L]
    idx = _drift_index(L, p, base, drift, ("lt", 0))
    if idx is not None:
        return ObjectiveValue.violated(Reason.NEGATIVE_RECHARGE, idx)
    return ObjectiveValue.finite(Fraction(sum(base), p))


def mean_payoff_of_lasso(a: WeightedArena, lasso: Lasso) -> Fraction:
    lasso.validate(a)
    a.require_integer_mode()
    ids = a.path_ids(list(lasso.cycle) + [lasso.cycle[0]])
    return Fraction(sum(a.weights[k] for k in ids), len(lasso.cycle))


def prefix_average(a: WeightedArena, lasso: Lasso, n: int, recharge_cap: Optional[int] = None) -> Fraction:
    """``(1/n) * sum of the first n levels``; used to cross-check limit values."""
    levels = _levels(a, lasso.unroll(n), recharge_cap)
    return Fraction(sum(levels), n)


def prefix_mean_payoff(a: WeightedArena, lasso: Lasso, n: int) -> Fraction:
    """``(1/n) * EL`` of the first ``n`` edges."""
    return Fraction(energy_level(a, lasso.unroll(n + 1)), n)
