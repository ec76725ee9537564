"""Winning conditions and their numeric parameters.

Thresholds are exact ``Fraction`` values; capacities and budgets are
non-negative integers.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional


def as_threshold(t) -> Fraction:
    """Accept ints, Fractions and ``'P/Q'`` strings."""
    return Fraction(t)


@dataclass(frozen=True)
class EnergyL:
    name = "energy-l"


@dataclass(frozen=True)
class EnergyLU:
    cap: int
    name = "energy-lu"


@dataclass(frozen=True)
class AvgEnergyL:
    t: Optional[Fraction] = None
    name = "avg-energy-l"


@dataclass(frozen=True)
class AvgEnergyLU:
    cap: int
    t: Optional[Fraction] = None
    name = "avg-energy-lu"


@dataclass(frozen=True)
class Recharge:
    cap: int
    name = "recharge"


@dataclass(frozen=True)
class AvgRecharge:
    cap: int
    t: Optional[Fraction] = None
    name = "avg-recharge"


@dataclass(frozen=True)
class MeanPayoff:
    t: Optional[Fraction] = None
    name = "mean-payoff"


@dataclass(frozen=True, eq=False)
class Parity:
    colors: Mapping  # vertex index -> color
    name = "parity3"


@dataclass(frozen=True)
class Countdown:
    budget: int
    name = "countdown"


AVERAGE_OBJECTIVES = (AvgEnergyL, AvgEnergyLU, AvgRecharge, MeanPayoff)


def describe(obj) -> str:
    fields = []
    for key in ("cap", "budget", "t"):
        val = getattr(obj, key, None)
        if val is not None:
            fields.append(f"{key}={val}")
    return f"{obj.name}({', '.join(fields)})"


def parse_colors(text, a) -> dict:
    """Coloring file: ``color <vertex> <0|1|2>`` lines, total on the arena's vertices."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    colors = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] != "color" or parts[2] not in ("0", "1", "2"):
            raise ValueError(f"line {lineno}: expected 'color <vertex> <0|1|2>'")
        colors[a.index(parts[1])] = int(parts[2])
    missing = [a.names[v] for v in range(a.n) if v not in colors]
    if missing:
        raise ValueError(f"coloring misses vertices {missing}")
    return colors


def serialize_colors(colors: Mapping, a) -> bytes:
    lines = [f"color {a.names[v]} {colors[v]}" for v in range(a.n)]
    return ("\n".join(lines) + "\n").encode("utf-8")
