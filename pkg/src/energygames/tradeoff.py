"""Capacity and memory sweeps as exact-rational tables, with CSV and text-plot output."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import objectives as O
from .arena import Player, WeightedArena
from .evaluation import ObjectiveValue
from .reductions import avg_recharge_value
from .strategies import enumerate_strategies, worst_consistent_value


def _run(fn, args: list, jobs: int) -> list:
    if jobs <= 1 or len(args) <= 1:
        return [fn(*x) for x in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*args)))


def sweep_capacity(a: WeightedArena, cap_from: int, cap_to: int, jobs: int = 1) -> list:
    """``(cap, optimal average)`` for each capacity in ``cap_from..cap_to``."""
    a.require_recharge_mode()
    if cap_from < 0 or cap_to < cap_from:
        raise ValueError("capacity range must be non-empty and non-negative")
    caps = list(range(cap_from, cap_to + 1))
    return list(zip(caps, _run(avg_recharge_value, [(a, c) for c in caps], jobs)))


def best_with_memory(a: WeightedArena, cap: int, size: int, limit: int = 10 ** 7) -> ObjectiveValue:
    """Best worst-case AvgRecharge(cap) value over strategies with exactly ``size`` memory states."""
    best = None
    family = O.AvgRecharge(cap)
    for sigma in enumerate_strategies(a, size, Player.P0, limit):
        val = worst_consistent_value(a, sigma, family)
        if best is None or val.sort_key() < best.sort_key():
            best = val
    return best


def sweep_memory(a: WeightedArena, cap: int, n_from: int, n_to: int, jobs: int = 1,
                 limit: int = 10 ** 7) -> list:
    """``(n, best average)`` using at most ``n`` memory states, for ``n`` in ``n_from..n_to``.

    Sizes admitting no strategy at all (more states than the arena can reach)
    contribute nothing, so the curve is the running minimum over sizes ``1..n``.
    """
    for v in a.vertices_of(Player.P1):
        if len(a.out_edges(v)) > 1:
            raise ValueError(f"memory sweeps need a solitaire arena; {a.names[v]} is a choice of Player 1")
    if n_from < 1 or n_to < n_from:
        raise ValueError("memory range must be non-empty and positive")
    sizes = list(range(1, n_to + 1))
    per_size = _run(best_with_memory, [(a, cap, k, limit) for k in sizes], jobs)
    rows = []
    best = None
    for k, val in zip(sizes, per_size):
        if val is not None and (best is None or val.sort_key() < best.sort_key()):
            best = val
        if k >= n_from:
            rows.append((k, best))
    return rows


def _status(val: ObjectiveValue) -> tuple:
    if val.kind == "finite":
        return val.value.numerator, val.value.denominator, "FINITE"
    if val.kind == "inf":
        return "", "", "INF"
    return "", "", f"VIOLATED:{val.index}"


def to_csv(rows: list, key: str = "cap") -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([key, "numerator", "denominator", "status"])
    for x, val in rows:
        writer.writerow([x, *_status(val)])
    return buf.getvalue().encode("utf-8")


def from_csv(data) -> list:
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    rows = []
    reader = csv.reader(io.StringIO(data))
    next(reader)
    for x, num, den, status in reader:
        if status == "FINITE":
            val = ObjectiveValue.finite(Fraction(int(num), int(den)))
        elif status == "INF":
            val = ObjectiveValue.infinite()
        else:
            val = ObjectiveValue("violated", index=int(status.split(":", 1)[1]))
        rows.append((int(x), val))
    return rows


def ascii_plot(rows: list, height: int = 10, label: str = "cap") -> str:
    """Column chart of finite values; +inf and violations are drawn as ``^`` and ``x``."""
    finite = [val.value for _, val in rows if val.kind == "finite"]
    top = max(finite, default=Fraction(1)) or Fraction(1)
    lines = []
    for level in range(height, 0, -1):
        cut = top * level / height
        cells = []
        for _, val in rows:
            if val.kind == "finite":
                cells.append("#" if val.value >= cut else " ")
            else:
                cells.append("^" if val.kind == "inf" else "x")
        lines.append(f"{float(cut):8.3f} |" + "".join(f" {c} " for c in cells))
    lines.append(" " * 9 + "+" + "---" * len(rows))
    lines.append(f"{label:>8}  " + "".join(f"{x:^3}" for x, _ in rows))
    return "\n".join(lines) + "\n"
