"""Energy-tracking memory structures and pulling product strategies back to arenas."""
from __future__ import annotations

from typing import Mapping, Sequence

from .arena import R, ArenaError, FiniteStateStrategy, MemoryStructure, Player, WeightedArena

BOTTOM = "bot"


def energy_memory(a: WeightedArena, cap: int, mode: str = "recharge") -> MemoryStructure:
    """Counter over ``{0..cap}`` plus an absorbing bottom state (index ``cap + 1``).

    ``recharge``: starts at ``cap``, R resets to ``cap``, dropping below 0 goes
    to bottom.  ``lu``: starts at 0, leaving ``[0, cap]`` in either direction
    goes to bottom.
    """
    if cap < 0:
        raise ValueError("capacity must be non-negative")
    if mode == "recharge":
        a.require_recharge_mode()
        initial = cap
    elif mode == "lu":
        a.require_integer_mode()
        initial = 0
    else:
        raise ValueError(f"unknown energy memory mode {mode!r}")
    bottom = cap + 1
    rows = []
    for c in range(cap + 2):
        row = []
        for w in a.weights:
            if c == bottom:
                row.append(bottom)
            elif w is R:
                row.append(cap)
            else:
                nxt = c + w
                row.append(nxt if 0 <= nxt <= cap else bottom)
        rows.append(tuple(row))
    labels = tuple(str(c) for c in range(cap + 1)) + (BOTTOM,)
    return MemoryStructure(cap + 2, initial, tuple(rows), labels)


def is_bottom(mem: MemoryStructure, state: int) -> bool:
    return mem.label(state) == BOTTOM


def pullback(a: WeightedArena, mem: MemoryStructure, nodes: Sequence, choice: Mapping,
             player: Player) -> FiniteStateStrategy:
    """Finite-state strategy on ``a`` implemented by ``mem`` from a positional one on ``a x mem``.

    ``nodes[i] = (vertex, state)`` for product vertex ``i``; ``choice`` maps
    product vertices of ``player`` to their chosen product successor.
    """
    index = {node: i for i, node in enumerate(nodes)}

    def nxt(v, s):
        i = index.get((v, s))
        if i is None or i not in choice:
            return None
        target = nodes[choice[i]][0]
        if not a.has_edge(v, target):
            raise ArenaError("product strategy does not project to an arena edge")
        return target

    return FiniteStateStrategy.from_function(a, player, mem, nxt)
