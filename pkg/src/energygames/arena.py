"""Weighted arenas, memory structures, product arenas and the arena text format.

Vertices are identified by string names in files and interned to dense
integer indices everywhere else.  Edges are indexed in declaration order;
every memory table and weight lookup is keyed by that edge index.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

WEIGHT_LIMIT = 2 ** 62

_TOKEN = re.compile(r"^[^\s#]+$")


class Player(IntEnum):
    P0 = 0
    P1 = 1

    @property
    def opponent(self) -> "Player":
        return Player(1 - self)

    def __str__(self) -> str:
        return f"Player{int(self)}"

    @classmethod
    def parse(cls, token: str) -> "Player":
        token = token.lower()
        if token in ("p0", "0", "player0"):
            return cls.P0
        if token in ("p1", "1", "player1"):
            return cls.P1
        raise ValueError(f"unknown player {token!r}")


class RechargeLabel(Enum):
    R = "R"

    def __repr__(self) -> str:
        return "R"

    def __str__(self) -> str:
        return "R"


R = RechargeLabel.R
Weight = Union[int, RechargeLabel]


class ArenaError(ValueError):
    """Malformed arena, either from a file (with line number) or from code."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def format_weight(w: Weight) -> str:
    return "R" if w is R else str(w)


def parse_weight(token: str) -> Weight:
    if token == "R":
        return R
    value = int(token)
    if abs(value) > WEIGHT_LIMIT:
        raise ValueError(f"weight {token} exceeds 2^62")
    return value


@dataclass(frozen=True)
class WeightedArena:
    names: tuple
    owner: tuple
    edges: tuple
    weights: tuple
    initial: int
    # (original vertex name, memory state label) per vertex, for product arenas
    origin: Optional[tuple] = field(default=None, compare=False, repr=False)

    _index: dict = field(init=False, compare=False, repr=False)
    _out: tuple = field(init=False, compare=False, repr=False)
    _in: tuple = field(init=False, compare=False, repr=False)
    _edge_id: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        n = len(self.names)
        if len(self.owner) != n:
            raise ArenaError("owner table does not match vertex count")
        if len(self.weights) != len(self.edges):
            raise ArenaError("each edge needs exactly one weight label")
        index = {}
        for i, name in enumerate(self.names):
            if name in index:
                raise ArenaError(f"duplicate vertex id {name!r}")
            index[name] = i
        if not 0 <= self.initial < n:
            raise ArenaError("initial vertex is not a vertex")
        out = [[] for _ in range(n)]
        inc = [[] for _ in range(n)]
        edge_id = {}
        for k, (u, v) in enumerate(self.edges):
            if not (0 <= u < n and 0 <= v < n):
                raise ArenaError(f"edge {k} has an endpoint outside the vertex set")
            if (u, v) in edge_id:
                raise ArenaError(f"duplicate edge {self.names[u]} -> {self.names[v]}")
            w = self.weights[k]
            if w is not R and (not isinstance(w, int) or abs(w) > WEIGHT_LIMIT):
                raise ArenaError(f"bad weight {w!r} on edge {self.names[u]} -> {self.names[v]}")
            edge_id[(u, v)] = k
            out[u].append(k)
            inc[v].append(k)
        for v in range(n):
            if not out[v]:
                raise ArenaError(f"terminal vertex {self.names[v]!r}")
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_out", tuple(tuple(o) for o in out))
        object.__setattr__(self, "_in", tuple(tuple(i) for i in inc))
        object.__setattr__(self, "_edge_id", edge_id)

    @classmethod
    def build(cls, vertices: Iterable, edges: Iterable, initial: str,
              origin: Optional[tuple] = None) -> "WeightedArena":
        """Build from ``(name, owner)`` pairs and ``(src, dst, weight)`` triples."""
        names, owner = [], []
        for name, who in vertices:
            names.append(name)
            owner.append(who if isinstance(who, Player) else Player.parse(str(who)))
        index = {name: i for i, name in enumerate(names)}
        elist, wlist = [], []
        for src, dst, w in edges:
            if src not in index or dst not in index:
                raise ArenaError(f"unknown vertex in edge {src} -> {dst}")
            elist.append((index[src], index[dst]))
            wlist.append(w)
        if initial not in index:
            raise ArenaError(f"initial vertex {initial!r} is not declared")
        return cls(tuple(names), tuple(owner), tuple(elist), tuple(wlist),
                   index[initial], origin)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def m(self) -> int:
        return len(self.edges)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown vertex {name!r}") from None

    def out_edges(self, v: int) -> tuple:
        return self._out[v]

    def in_edges(self, v: int) -> tuple:
        return self._in[v]

    def successors(self, v: int) -> list:
        return [self.edges[k][1] for k in self._out[v]]

    def edge_id(self, u: int, v: int) -> int:
        try:
            return self._edge_id[(u, v)]
        except KeyError:
            raise ArenaError(f"no edge {self.names[u]} -> {self.names[v]}") from None

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._edge_id

    def weight(self, u: int, v: int) -> Weight:
        return self.weights[self.edge_id(u, v)]

    def vertices_of(self, player: Player) -> list:
        return [v for v in range(self.n) if self.owner[v] == player]

    def has_recharge(self) -> bool:
        return any(w is R for w in self.weights)

    def is_recharge_arena(self) -> bool:
        return all(w is R or w <= 0 for w in self.weights)

    def require_recharge_mode(self) -> None:
        for k, w in enumerate(self.weights):
            if w is not R and w > 0:
                u, v = self.edges[k]
                raise ArenaError(
                    f"recharge arenas allow only non-positive weights and R, "
                    f"edge {self.names[u]} -> {self.names[v]} has {w}")

    def require_integer_mode(self) -> None:
        for k, w in enumerate(self.weights):
            if w is R:
                u, v = self.edges[k]
                raise ArenaError(
                    f"recharge label on edge {self.names[u]} -> {self.names[v]} "
                    f"is not allowed for this objective")

    def with_initial(self, v: int) -> "WeightedArena":
        return WeightedArena(self.names, self.owner, self.edges, self.weights, v, self.origin)

    def with_weights(self, weights: Sequence) -> "WeightedArena":
        return WeightedArena(self.names, self.owner, self.edges, tuple(weights),
                             self.initial, self.origin)

    def path_ids(self, path: Sequence[int]) -> list:
        """Edge indices along a vertex path; raises if a step is not an edge."""
        return [self.edge_id(path[i], path[i + 1]) for i in range(len(path) - 1)]

    def path_from_names(self, names: Iterable[str]) -> list:
        return [self.index(x) for x in names]

    def reachable(self, start: Optional[int] = None) -> list:
        start = self.initial if start is None else start
        seen = {start}
        queue = deque([start])
        order = [start]
        while queue:
            u = queue.popleft()
            for v in self.successors(u):
                if v not in seen:
                    seen.add(v)
                    order.append(v)
                    queue.append(v)
        return order


def max_abs_weight(a: WeightedArena) -> int:
    return max((abs(w) for w in a.weights if w is not R), default=0)


def max_positive_weight(a: WeightedArena) -> int:
    return max((w for w in a.weights if w is not R and w > 0), default=0)


@dataclass(frozen=True)
class MemoryStructure:
    """Finite automaton over arena edges: ``table[state][edge]`` is the next state."""

    size: int
    initial: int
    table: tuple
    labels: Optional[tuple] = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("a memory structure needs at least one state")
        if not 0 <= self.initial < self.size:
            raise ValueError("initial memory state out of range")
        if len(self.table) != self.size:
            raise ValueError("update table must have one row per state")
        for row in self.table:
            for s in row:
                if not 0 <= s < self.size:
                    raise ValueError("update table points outside the state set")
        if self.labels is not None and len(self.labels) != self.size:
            raise ValueError("one label per memory state")

    @classmethod
    def from_function(cls, a: WeightedArena, size: int, initial: int,
                      update: Callable[[int, int], int],
                      labels: Optional[Sequence[str]] = None) -> "MemoryStructure":
        """``update(state, edge_index) -> state``, tabulated for every pair."""
        table = tuple(tuple(update(s, k) for k in range(a.m)) for s in range(size))
        return cls(size, initial, table, tuple(labels) if labels is not None else None)

    @classmethod
    def trivial(cls, a: WeightedArena) -> "MemoryStructure":
        return cls(1, 0, ((0,) * a.m,))

    def update(self, state: int, edge: int) -> int:
        return self.table[state][edge]

    def label(self, state: int) -> str:
        return self.labels[state] if self.labels is not None else str(state)

    def run(self, a: WeightedArena, path: Sequence[int]) -> list:
        """Memory state after each prefix of ``path`` (Upd+ of every prefix)."""
        states = [self.initial]
        for k in a.path_ids(path):
            states.append(self.table[states[-1]][k])
        return states


@dataclass(frozen=True, eq=False)
class FiniteStateStrategy:
    """A memory structure plus a next-move table for one player's vertices."""

    player: Player
    memory: MemoryStructure
    moves: Mapping  # (vertex, state) -> successor vertex

    def next_move(self, v: int, state: int) -> int:
        return self.moves[(v, state)]

    def check(self, a: WeightedArena) -> None:
        if any(len(row) != a.m for row in self.memory.table):
            raise ArenaError("memory structure does not match the arena's edges")
        for v in a.vertices_of(self.player):
            for s in range(self.memory.size):
                if (v, s) not in self.moves:
                    raise ArenaError(f"next move undefined at {a.names[v]}, state {s}")
                if not a.has_edge(v, self.moves[(v, s)]):
                    raise ArenaError(f"next move at {a.names[v]}, state {s} is not an edge")

    @classmethod
    def positional(cls, a: WeightedArena, player: Player,
                   choice: Mapping) -> "FiniteStateStrategy":
        """One-state strategy; vertices missing from ``choice`` take their first edge."""
        moves = {}
        for v in a.vertices_of(player):
            moves[(v, 0)] = choice.get(v, a.successors(v)[0])
        return cls(player, MemoryStructure.trivial(a), moves)

    @classmethod
    def from_function(cls, a: WeightedArena, player: Player, memory: MemoryStructure,
                      nxt: Callable[[int, int], Optional[int]]) -> "FiniteStateStrategy":
        """``nxt(v, state)`` may return None for don't-care entries."""
        moves = {}
        for v in a.vertices_of(player):
            for s in range(memory.size):
                target = nxt(v, s)
                moves[(v, s)] = a.successors(v)[0] if target is None else target
        return cls(player, memory, moves)


def product_with_map(a: WeightedArena, mem: MemoryStructure,
                     relabel: Callable[[int, int], Weight]) -> tuple:
    """Reachable part of ``a x mem``; returns the arena and ``(vertex, state)`` per node.

    ``relabel(edge_index, source_state)`` gives the weight of the product edge.
    """
    start = (a.initial, mem.initial)
    index = {start: 0}
    nodes = [start]
    edges, weights = [], []
    i = 0
    while i < len(nodes):
        v, s = nodes[i]
        for k in a.out_edges(v):
            v2 = a.edges[k][1]
            node = (v2, mem.table[s][k])
            j = index.get(node)
            if j is None:
                j = index[node] = len(nodes)
                nodes.append(node)
            edges.append((i, j))
            weights.append(relabel(k, s))
        i += 1
    names = tuple(f"{a.names[v]}@{mem.label(s)}" for v, s in nodes)
    owner = tuple(a.owner[v] for v, _ in nodes)
    origin = tuple((a.names[v], mem.label(s)) for v, s in nodes)
    arena = WeightedArena(names, owner, tuple(edges), tuple(weights), 0, origin)
    return arena, tuple(nodes)


def product(a: WeightedArena, mem: MemoryStructure,
            relabel: Callable[[int, int], Weight]) -> WeightedArena:
    return product_with_map(a, mem, relabel)[0]


def same_weights(a: WeightedArena) -> Callable[[int, int], Weight]:
    return lambda k, s: a.weights[k]


# -- text format -------------------------------------------------------------

def parse_arena(text) -> WeightedArena:
    """Parse the line-oriented arena format (``arena``/``init``/``vertex``/``edge``/``map``)."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    header = False
    initial = None
    init_line = None
    vertices = {}
    order = []
    owners = []
    edges = []
    maps = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw = parts[0]
        if not header:
            if kw != "arena" or len(parts) != 1:
                raise ArenaError("expected 'arena' header", lineno)
            header = True
            continue
        if kw == "init" and len(parts) == 2:
            if initial is not None:
                raise ArenaError("duplicate init declaration", lineno)
            initial, init_line = parts[1], lineno
        elif kw == "vertex" and len(parts) == 3:
            name = parts[1]
            if name in vertices:
                raise ArenaError(f"duplicate vertex id {name!r}", lineno)
            try:
                who = Player.parse(parts[2])
            except ValueError as exc:
                raise ArenaError(str(exc), lineno) from None
            vertices[name] = len(order)
            order.append(name)
            owners.append(who)
        elif kw == "edge" and len(parts) == 4:
            try:
                w = parse_weight(parts[3])
            except ValueError:
                raise ArenaError(f"bad weight {parts[3]!r}", lineno) from None
            edges.append((parts[1], parts[2], w, lineno))
        elif kw == "map" and len(parts) == 4:
            maps[parts[1]] = (parts[2], parts[3], lineno)
        else:
            raise ArenaError(f"syntax error: {line!r}", lineno)
    if not header:
        raise ArenaError("empty arena file")
    if initial is None:
        raise ArenaError("missing initial declaration")
    if initial not in vertices:
        raise ArenaError(f"initial vertex {initial!r} is not declared", init_line)
    elist, wlist, seen = [], [], set()
    for src, dst, w, lineno in edges:
        for x in (src, dst):
            if x not in vertices:
                raise ArenaError(f"unknown vertex {x!r} in edge", lineno)
        key = (vertices[src], vertices[dst])
        if key in seen:
            raise ArenaError(f"duplicate edge {src} -> {dst}", lineno)
        seen.add(key)
        elist.append(key)
        wlist.append(w)
    has_out = {u for u, _ in elist}
    for name in order:
        if vertices[name] not in has_out:
            raise ArenaError(f"terminal vertex {name!r}")
    origin = None
    if maps:
        for name, (_, _, lineno) in maps.items():
            if name not in vertices:
                raise ArenaError(f"unknown vertex {name!r} in map", lineno)
        if len(maps) != len(order):
            raise ArenaError("backmap must cover every vertex")
        origin = tuple((maps[x][0], maps[x][1]) for x in order)
    return WeightedArena(tuple(order), tuple(owners), tuple(elist), tuple(wlist),
                         vertices[initial], origin)


def serialize_arena(a: WeightedArena, comments: Sequence[str] = ()) -> bytes:
    for name in a.names:
        if not _TOKEN.match(name):
            raise ArenaError(f"vertex id {name!r} cannot be written as a token")
    lines = ["arena"]
    lines += [f"# {c}" for c in comments]
    lines.append(f"init {a.names[a.initial]}")
    for v, name in enumerate(a.names):
        lines.append(f"vertex {name} p{int(a.owner[v])}")
    for (u, v), w in zip(a.edges, a.weights):
        lines.append(f"edge {a.names[u]} {a.names[v]} {format_weight(w)}")
    if a.origin is not None:
        for name, (orig, state) in zip(a.names, a.origin):
            lines.append(f"map {name} {orig} {state}")
    return ("\n".join(lines) + "\n").encode("utf-8")


# -- bundled fixtures --------------------------------------------------------

def intro() -> WeightedArena:
    """Three-vertex game where energy can be kept between 0 and 5."""
    return WeightedArena.build(
        [("v0", "p0"), ("v1", "p0"), ("v2", "p1")],
        [("v0", "v1", -1), ("v1", "v0", 0), ("v0", "v2", 3),
         ("v2", "v0", 2), ("v1", "v2", -1), ("v2", "v1", -3)],
        "v0")


def memlb() -> WeightedArena:
    """Two-vertex recharge game needing ``cap`` memory states for average ``cap/2``."""
    return WeightedArena.build(
        [("v0", "p1"), ("v1", "p0")],
        [("v0", "v1", -1), ("v1", "v1", -1), ("v1", "v0", R)],
        "v0")


def tradeoff() -> WeightedArena:
    """Solitaire recharge game with a non-monotonic capacity/average tradeoff."""
    return WeightedArena.build(
        [(f"v{i}", "p0") for i in range(6)],
        [("v0", "v0", R), ("v0", "v3", -3), ("v3", "v4", 0), ("v4", "v5", 0),
         ("v5", "v0", 0), ("v0", "v1", 0), ("v1", "v2", 0), ("v2", "v0", -1)],
        "v0")


def cycle(n: int, w: int) -> WeightedArena:
    """``n``-cycle with one recharge edge (back into ``c0``) and ``n-1`` edges of ``-w``."""
    if n < 1 or w < 0:
        raise ValueError("cycle needs n >= 1 and w >= 0")
    vertices = [(f"c{i}", "p0") for i in range(n)]
    edges = [(f"c{i}", f"c{i + 1}", -w) for i in range(n - 1)]
    edges.append((f"c{n - 1}", "c0", R))
    return WeightedArena.build(vertices, edges, "c0")


FIXTURES = {"INTRO": intro, "MEMLB": memlb, "TRADEOFF": tradeoff}


def load_fixture(name: str) -> WeightedArena:
    """``INTRO``, ``MEMLB``, ``TRADEOFF`` or ``CYCLE(n,W)`` (case-insensitive)."""
    key = name.strip().upper()
    if key in FIXTURES:
        return FIXTURES[key]()
    m = re.fullmatch(r"CYCLE\((\d+),\s*(\d+)\)", key)
    if m:
        return cycle(int(m.group(1)), int(m.group(2)))
    raise KeyError(f"unknown fixture {name!r}")
