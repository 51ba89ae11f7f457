"""Train-track maps on marked graphs: legality, transition matrices, PF data, edge-iteration languages.

Oriented edges use the letter encoding of words: edge ``i`` is ``i`` and
its reverse is ``-i``.  A direction at a vertex is the oriented edge
leaving it, so the path ``... e f ...`` makes the turn ``(e^-1, f)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .automorphism import Automorphism, BudgetExceeded, DEFAULT_BUDGET, _apply_images
from .lamination import FactorLanguage
from .words import Basis, WordError, inverse_closure, invert, word_factors


@dataclass(frozen=True)
class MarkedGraph:
    """Graph with edges named by ``basis``; ``ends[i] = (origin, terminus)`` of edge ``i + 1``."""

    basis: Basis
    vertices: tuple
    ends: tuple

    def __post_init__(self):
        if len(self.ends) != self.basis.rank:
            raise WordError("one (origin, terminus) pair per edge expected")
        vs = set(self.vertices)
        for o, t in self.ends:
            if o not in vs or t not in vs:
                raise WordError(f"edge endpoint outside vertex set: {(o, t)}")
        if not self._connected():
            raise WordError("graph is not connected")

    @classmethod
    def rose(cls, basis: Basis) -> "MarkedGraph":
        return cls(basis, ("v",), tuple(("v", "v") for _ in basis.symbols))

    @property
    def is_rose(self) -> bool:
        return len(self.vertices) == 1

    @property
    def edge_count(self) -> int:
        return self.basis.rank

    def origin(self, e: int):
        o, t = self.ends[abs(e) - 1]
        return o if e > 0 else t

    def terminus(self, e: int):
        return self.origin(-e)

    def is_path(self, p: Sequence[int]) -> bool:
        return all(self.terminus(a) == self.origin(b) for a, b in zip(p, p[1:]))

    def _connected(self) -> bool:
        index = {v: i for i, v in enumerate(self.vertices)}
        n = len(index)
        adj = np.zeros((n, n), dtype=np.int8)
        for o, t in self.ends:
            adj[index[o], index[t]] = adj[index[t], index[o]] = 1
        return connected_components(adj, directed=False)[0] == 1


@dataclass(frozen=True)
class GraphMap:
    graph: MarkedGraph
    images: tuple                     # image path of each positive edge
    vertex_map: dict = field(default=None, compare=False)
    budget: int = field(default=DEFAULT_BUDGET, compare=False)

    def __post_init__(self):
        g = self.graph
        imgs = tuple(tuple(p) for p in self.images)
        object.__setattr__(self, "images", imgs)
        if len(imgs) != g.edge_count:
            raise WordError("one image path per edge expected")
        for i, p in enumerate(imgs):
            if not p:
                raise WordError(f"edge {g.basis.symbols[i]} has empty image")
            g.basis.check(p)
            if not g.is_path(p):
                raise WordError(f"image of edge {g.basis.symbols[i]} is not an edge path")
        vmap = {} if self.vertex_map is None else dict(self.vertex_map)
        for i, p in enumerate(imgs):
            for v, w in ((g.origin(i + 1), g.origin(p[0])), (g.terminus(i + 1), g.terminus(p[-1]))):
                if vmap.setdefault(v, w) != w:
                    raise WordError(f"images disagree on where vertex {v!r} goes")
        object.__setattr__(self, "vertex_map", vmap)

    @classmethod
    def from_automorphism(cls, phi: Automorphism) -> "GraphMap":
        return cls(MarkedGraph.rose(phi.basis), phi.images, budget=phi.budget)

    def image(self, e: int) -> tuple:
        return self.images[e - 1] if e > 0 else invert(self.images[-e - 1])

    def __call__(self, path: Sequence[int]) -> tuple:
        """Image of a path, tightened."""
        return _apply_images(self.images, path, self.budget)

    def direction_map(self) -> dict:
        return {e: self.image(e)[0] for e in self.graph.basis.letters()}

    def compose(self, other: "GraphMap") -> "GraphMap":
        """``self o other``."""
        return GraphMap(self.graph, tuple(self(p) for p in other.images), budget=self.budget)


# ---------------------------------------------------------------------------
# legality


@dataclass(frozen=True)
class TrainTrackVerdict:
    ok: bool
    witness: Optional[tuple] = None   # the offending turn (d1, d2)
    edge: Optional[int] = None        # an edge whose image or iterate crosses it
    degenerate_after: Optional[int] = None  # iterate of Df making the turn degenerate
    reason: str = ""

    @property
    def verdict(self) -> str:
        return "PASS" if self.ok else "FAIL"

    def describe(self, basis: Basis) -> str:
        if self.ok:
            return "PASS"
        d1, d2 = self.witness
        return (f"FAIL: turn ({basis.format((d1,))}, {basis.format((d2,))}) {self.reason}"
                f" (edge {basis.format((self.edge,))})")


def _turn(a: int, b: int) -> tuple:
    return (a, b) if (abs(a), a < 0) <= (abs(b), b < 0) else (b, a)


def validate_train_track(f: GraphMap, max_iter: int) -> TrainTrackVerdict:
    """Check that no ``f^n(e)`` crosses an illegal turn.

    Turns taken by iterated images are the closure, under the direction
    map, of turns taken by single images, so words are never expanded.
    A turn is illegal if some ``Df^n``, ``1 <= n <= max_iter``, sends both
    directions to the same direction.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    df = f.direction_map()
    origin = {}   # turn -> edge whose image first produced it (for witnesses)
    for i, p in enumerate(f.images):
        for a, b in zip(p, p[1:]):
            origin.setdefault(_turn(-a, b), i + 1)
    first = set(origin)
    frontier = list(first)
    seen = set(frontier)
    while frontier:
        nxt = []
        for t in frontier:
            u = _turn(df[t[0]], df[t[1]])
            if u not in seen:
                seen.add(u)
                origin[u] = origin[t]
                nxt.append(u)
        frontier = nxt
    # turns of single images first, so witnesses point at the first bad turn
    key = lambda t: (abs(t[0]), t[0] < 0, abs(t[1]), t[1] < 0)  # noqa: E731
    initial = sorted(first, key=lambda t: (t[0] != t[1], key(t)))
    for t in initial + sorted(seen - set(initial), key=key):
        a, b = t
        if a == b:
            return TrainTrackVerdict(False, t, origin[t], 0, "is degenerate (backtracking)")
        for n in range(1, max_iter + 1):
            a, b = df[a], df[b]
            if a == b:
                return TrainTrackVerdict(False, t, origin[t], n, f"is illegal (identified by Df^{n})")
    return TrainTrackVerdict(True)


# ---------------------------------------------------------------------------
# matrices


def transition_matrix(f: GraphMap) -> np.ndarray:
    """``M[e, g]`` = occurrences of ``g`` or ``g^-1`` in ``f(e)``."""
    n = f.graph.edge_count
    m = np.zeros((n, n), dtype=np.int64)
    for i, p in enumerate(f.images):
        for x in p:
            m[i, abs(x) - 1] += 1
    return m


def is_irreducible(m: np.ndarray) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        return False
    ncomp, _ = connected_components(m > 0, directed=True, connection="strong")
    if ncomp != 1:
        return False
    # a 1x1 zero matrix is strongly connected but has no positive support
    return bool(m.any())


@dataclass(frozen=True)
class PFData:
    value: float
    vector: np.ndarray
    iterations: int


def pf_eigenvalue(m, tol: float = 1e-9, max_iter: int = 1_000_000) -> PFData:
    """Perron-Frobenius eigenvalue and positive eigenvector by power iteration.

    Iterates ``M + I`` from the uniform vector: the shift makes the matrix
    primitive without moving the eigenvector.  Stops when consecutive
    Rayleigh quotients differ by less than ``tol`` and the residual
    ``|Mx - qx|`` of the sum-normalized iterate is below ``tol``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("square matrix expected")
    if (m < 0).any():
        raise ValueError("matrix has negative entries")
    if not m.any():
        raise ValueError("zero matrix has no Perron-Frobenius eigenvalue")
    if not is_irreducible(m):
        raise ValueError("matrix is reducible")
    a = m + np.eye(m.shape[0])
    x = np.full(m.shape[0], 1.0 / m.shape[0])
    prev = None
    for it in range(1, max_iter + 1):
        y = a @ x
        q = float(x @ y) / float(x @ x)
        # quotients can repeat by accident (e.g. equal row sums), so also
        # require the current vector to be an eigenvector up to tol
        if prev is not None and abs(q - prev) < tol and np.abs(y - q * x).max() < tol:
            return PFData(q - 1.0, x, it)
        x = y / y.sum()
        prev = q
    raise RuntimeError(f"power iteration did not converge in {max_iter} steps")


# ---------------------------------------------------------------------------
# languages


def bfh_language(f: GraphMap, k: int, stall: int = 5, n_max: int = 30) -> FactorLanguage:
    """Length-<=k factors of ``f^n(e)`` over all edges ``e``, ``n = 0..n_max``.

    Stops once the set is the same at ``stall`` consecutive stages (flag set) or when
    iterates exceed the length budget (flag unset, partial set returned).
    """
    if not f.graph.is_rose:
        raise ValueError("languages in basis coordinates need a rose graph")
    if k < 1:
        raise ValueError("k must be >= 1")
    paths = [(i,) for i in range(1, f.graph.edge_count + 1)]
    edges = tuple(paths)
    words = set()
    quiet = 0
    for n in range(n_max + 1):
        new = set()
        for p in paths:
            new |= word_factors(p, k)
        new = inverse_closure(new)
        if n > 0 and new <= words:
            quiet += 1
            if quiet >= max(1, stall - 1):
                return FactorLanguage(k, frozenset(words), True, "bfh", edges)
        else:
            quiet = 0
        words |= new
        if n == n_max:
            break
        try:
            paths = [f(p) for p in paths]
        except BudgetExceeded:
            return FactorLanguage(k, frozenset(words), False, "bfh", edges, True)
    return FactorLanguage(k, frozenset(words), False, "bfh", edges)


def bfh_stages(f: GraphMap, k: int, n_max: int) -> list:
    """Cumulative factor sets after each stage; used to audit monotonicity."""
    paths = [(i,) for i in range(1, f.graph.edge_count + 1)]
    words = set()
    out = []
    for _ in range(n_max + 1):
        for p in paths:
            words |= inverse_closure(word_factors(p, k))
        out.append(frozenset(words))
        paths = [f(p) for p in paths]
    return out

