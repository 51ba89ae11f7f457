"""Stallings graphs of finitely generated subgroups and carried rays / leaves."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .words import Basis, Ray, RayError, Word, WordError, leaf_window, letter_key, reduce_word


class Carried(str, Enum):
    CARRIED = "carried-at-depth"
    NOT_CARRIED = "not-carried"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class CarryVerdict:
    kind: Carried
    depth: int                    # depth certified (carried) or witness depth (not carried)
    start: Optional[int] = None   # a start vertex that reads the word, when carried

    def to_json(self) -> dict:
        return {"verdict": self.kind.value, "depth": self.depth, "start": self.start}


@dataclass(frozen=True)
class SubgroupGraph:
    """Folded core graph with basepoint 0; ``edges`` holds ``(u, x, v)`` with ``x > 0``.

    Vertices are numbered in breadth-first order from the basepoint,
    following labels in letter order, so equal subgroups give equal graphs.
    """

    rank: int
    vertex_count: int
    edges: tuple

    def __post_init__(self):
        adj = [dict() for _ in range(self.vertex_count)]
        for u, x, v in self.edges:
            if x in adj[u] or -x in adj[v]:
                raise WordError("graph is not folded")
            adj[u][x] = v
            adj[v][-x] = u
        object.__setattr__(self, "_adj", tuple(adj))

    def step(self, v: int, x: int) -> Optional[int]:
        return self._adj[v].get(x)

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def read(self, v: int, w: Sequence[int]) -> tuple:
        """Follow ``w`` from ``v``; returns ``(letters read, end vertex or None)``."""
        for i, x in enumerate(w):
            nxt = self._adj[v].get(x)
            if nxt is None:
                return i, None
            v = nxt
        return len(w), v

    def format(self, basis: Basis) -> str:
        lines = [f"vertices {self.vertex_count}"]
        lines += [f"{u} -{basis.format((x,))}-> {v}" for u, x, v in self.edges]
        return "\n".join(lines)


def build(generators: Sequence[Sequence[int]], rank: int) -> SubgroupGraph:
    """Wedge of generator loops, folded, core-trimmed, canonically numbered."""
    folder = _Folder()
    base = folder.new_vertex()
    for g in generators:
        g = reduce_word(g)
        if any(x == 0 or abs(x) > rank for x in g):
            raise WordError(f"generator {g} outside rank {rank}")
        if not g:
            continue
        u = base
        for x in g[:-1]:
            v = folder.new_vertex()
            folder.add(u, x, v)
            u = v
        folder.add(u, g[-1], base)
    edges = folder.finish()
    edges = _core(edges, folder.find(base))
    return _canonical(edges, folder.find(base), rank)


class _Folder:
    def __init__(self):
        self.parent = []
        self.adj = []
        self.pending = []

    def new_vertex(self) -> int:
        self.parent.append(len(self.parent))
        self.adj.append({})
        return len(self.parent) - 1

    def find(self, v: int) -> int:
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return v

    def add(self, u: int, x: int, v: int) -> None:
        self._link(u, x, v)
        self._drain()

    def _link(self, u: int, x: int, v: int) -> None:
        u, v = self.find(u), self.find(v)
        for a, y, b in ((u, x, v), (v, -x, u)):
            t = self.adj[a].get(y)
            if t is None:
                self.adj[a][y] = b
            elif self.find(t) != b:
                self.pending.append((t, b))

    def _drain(self) -> None:
        while self.pending:
            a, b = self.pending.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            keep, gone = min(a, b), max(a, b)
            self.parent[gone] = keep
            moved, self.adj[gone] = self.adj[gone], {}
            for y, t in moved.items():
                self._link(keep, y, t)

    def finish(self) -> set:
        out = set()
        for u in range(len(self.parent)):
            if self.find(u) != u:
                continue
            for x, v in self.adj[u].items():
                if x > 0:
                    out.add((u, x, self.find(v)))
        return out


def _core(edges: set, base: int) -> set:
    """Repeatedly drop degree-1 vertices other than the basepoint."""
    edges = set(edges)
    while True:
        deg = {}
        for u, _, v in edges:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        hang = {v for v, d in deg.items() if d == 1 and v != base}
        if not hang:
            return edges
        edges = {e for e in edges if e[0] not in hang and e[2] not in hang}


def _canonical(edges: set, base: int, rank: int) -> SubgroupGraph:
    adj = {}
    for u, x, v in edges:
        adj.setdefault(u, {})[x] = v
        adj.setdefault(v, {})[-x] = u
    number = {base: 0}
    queue = [base]
    for u in queue:
        for x in sorted(adj.get(u, {}), key=letter_key):
            v = adj[u][x]
            if v not in number:
                number[v] = len(number)
                queue.append(v)
    renamed = sorted((number[u], x, number[v]) for u, x, v in edges)
    return SubgroupGraph(rank, len(number), tuple(renamed))


def accepts(h: SubgroupGraph, w: Sequence[int]) -> bool:
    n, end = h.read(0, reduce_word(w))
    return n == len(reduce_word(w)) and end == 0


def index_kind(h: SubgroupGraph) -> tuple:
    """``("finite", n)`` when every vertex has all ``2N`` labels, else ``("infinite", None)``."""
    full = 2 * h.rank
    if all(h.degree(v) == full for v in range(h.vertex_count)):
        return ("finite", h.vertex_count)
    return ("infinite", None)


def _read_anywhere(h: SubgroupGraph, w: Word) -> tuple:
    """Longest read of ``w`` over all start vertices: ``(length, start)``."""
    best, start = -1, None
    for v in range(h.vertex_count):
        n, _ = h.read(v, w)
        if n > best:
            best, start = n, v
            if n == len(w):
                break
    return best, start


def carries_ray(h: SubgroupGraph, x: Ray, depth: int) -> CarryVerdict:
    """Carried at ``depth`` iff some vertex reads the first ``depth`` letters of ``x``."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    try:
        p = x.prefix(depth)
    except RayError:
        return CarryVerdict(Carried.UNDECIDED, 0)
    n, start = _read_anywhere(h, p)
    if n == depth:
        return CarryVerdict(Carried.CARRIED, depth, start)
    return CarryVerdict(Carried.NOT_CARRIED, n + 1)


def carries_leaf(h: SubgroupGraph, x: Ray, y: Ray, depth: int, probe: int = 64) -> CarryVerdict:
    """Carried at ``depth`` iff the central ``2 depth`` letters of ``Y^-1 X`` are readable
    in the core graph; the witness is the least radius at which reading fails."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    win = leaf_window(x, y, depth, probe=probe)
    if win is None:
        return CarryVerdict(Carried.UNDECIDED, 0)
    w = win.word
    for r in range(1, depth + 1):
        n, _ = _read_anywhere(h, w[depth - r:depth + r])
        if n < 2 * r:
            return CarryVerdict(Carried.NOT_CARRIED, r)
    _, start = _read_anywhere(h, w)
    return CarryVerdict(Carried.CARRIED, depth, start)
