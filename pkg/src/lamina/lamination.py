"""Finite-depth factor languages of algebraic laminations and leaf testing.

A lamination is represented by the set of factors of length <= k of the
biinfinite words spelling its leaves.  Languages built here are
over-approximations of the true depth-k language, so a window factor
missing from a language refutes a leaf; a window fully present is only
"consistent at depth k".
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

from scipy.cluster.hierarchy import DisjointSet

from .automorphism import Automorphism, BudgetExceeded, _apply_images, cyclic_classes
from .words import (
    Basis,
    CyclicWord,
    Ray,
    WordError,
    cyclic_reduce,
    invert,
    inverse_closure,
    is_reduced,
    leaf_window,
    periodic_factors,
    shortlex_key,
    word_factors,
)

log = logging.getLogger(__name__)

PROVENANCES = ("rational", "orbit", "bfh", "ray")


@dataclass(frozen=True)
class FactorLanguage:
    depth: int
    words: frozenset
    stabilized: bool
    provenance: str
    sources: tuple = field(default=(), compare=False)
    truncated: bool = field(default=False, compare=False)  # the length budget stopped iteration

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "words", frozenset(self.words))

    def __contains__(self, w) -> bool:
        return tuple(w) in self.words

    def __len__(self) -> int:
        return len(self.words)

    def restrict(self, k: int) -> frozenset:
        return frozenset(w for w in self.words if len(w) <= k)

    def sorted_words(self) -> list:
        return sorted(self.words, key=shortlex_key)

    def closure_defects(self) -> list:
        """Words violating subword-, inversion-closure or reducedness (empty when sound)."""
        bad = []
        for w in self.words:
            if not w or len(w) > self.depth or not is_reduced(w) or invert(w) not in self.words:
                bad.append(w)
            elif len(w) > 1 and (w[1:] not in self.words or w[:-1] not in self.words):
                bad.append(w)
        return bad

    def serialize(self, basis: Basis) -> str:
        head = (f"lamlang depth={self.depth} stabilized={int(self.stabilized)} "
                f"provenance={self.provenance}")
        return "\n".join([head] + [basis.format(w) for w in self.sorted_words()]) + "\n"

    @classmethod
    def parse(cls, text: str, basis: Basis) -> "FactorLanguage":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("lamlang "):
            raise WordError("missing lamlang header")
        fields = dict(item.split("=", 1) for item in lines[0].split()[1:])
        return cls(int(fields["depth"]), frozenset(basis.parse(w) for w in lines[1:]),
                   fields["stabilized"] == "1", fields["provenance"])


def _closed(words: Iterable[tuple]) -> frozenset:
    return frozenset(inverse_closure(words))


# ---------------------------------------------------------------------------
# constructions


def rational_language(w: CyclicWord, k: int) -> FactorLanguage:
    if not len(w):
        raise WordError("rational lamination of the identity")
    return FactorLanguage(k, _closed(periodic_factors(w.letters, k)), True, "rational", (w.letters,))


def iterate_language(step, start: Sequence[int], k: int, n_max: int, stall: int,
                     cyclic: bool, burn_in: int = 0) -> tuple:
    """Union of depth-k factors of the iterates ``step^n(start)``, ``n <= n_max``.

    Iterates shorter than ``burn_in`` letters are skipped.  Returns
    ``(words, stabilized, truncated)``: stabilized means the set took the
    same value at ``stall`` consecutive counted stages; truncated means the
    length budget ended the iteration.
    """
    words = set()
    quiet = 0
    counted = False
    w = tuple(start)
    for n in range(n_max + 1):
        if cyclic:
            w = cyclic_reduce(w)[0]
        if len(w) >= burn_in:
            new = inverse_closure(periodic_factors(w, k) if cyclic else word_factors(w, k))
            if counted and new <= words:
                quiet += 1
                if quiet >= max(1, stall - 1):
                    return words, True, False
            else:
                quiet = 0
            words |= new
            counted = True
        if n == n_max:
            break
        try:
            w = step(w)
        except BudgetExceeded:
            log.info("length budget exceeded at iterate %d; language left unstabilized", n + 1)
            return words, False, True
    return words, False, False


def orbit_language(phi: Automorphism, h: CyclicWord, k: int, n_max: int, stall: int = 5,
                   burn_in: int = 0) -> FactorLanguage:
    """Depth-k language of the lamination generated by the classes ``phi^n[h]``.

    ``burn_in`` (letters) drops short early iterates; the result is still an
    over-approximation because leaves only see factors recurring along the orbit.
    """
    if not len(h):
        raise WordError("h must be nontrivial")
    if n_max == 0 and burn_in <= len(h):
        return FactorLanguage(k, rational_language(h, k).words, True, "orbit", (h.letters,))

    def step(w):
        return _apply_images(phi.images, w, phi.budget)

    words, stab, cut = iterate_language(step, h.letters, k, n_max, stall, cyclic=True, burn_in=burn_in)
    return FactorLanguage(k, frozenset(words), stab, "orbit", (h.letters,), cut)


def _orbit_task(args):
    phi, h, k, n_max, stall, burn_in = args
    return orbit_language(phi, h, k, n_max, stall, burn_in)


def mitra_language(phi: Automorphism, ball_radius: int, k: int, n_max: int, stall: int = 5,
                   burn_in: int = 0, jobs: int = 1) -> FactorLanguage:
    """Union of orbit languages over all classes of cyclic length <= ball_radius.

    One representative per pair {[h], [h^-1]}; ``sources`` records them.
    """
    if ball_radius < 1:
        raise ValueError("ball radius must be >= 1")
    reps = []
    seen = set()
    for c in cyclic_classes(phi.rank, ball_radius):
        if c in seen:
            continue
        seen.add(c)
        seen.add(c.inverse())
        reps.append(c)
    from .parallel import parallel_map

    parts = parallel_map(_orbit_task, [(phi, c, k, n_max, stall, burn_in) for c in reps], jobs)
    words = frozenset().union(*(p.words for p in parts))
    stab = all(p.stabilized for p in parts)
    cut = any(p.truncated for p in parts)
    return FactorLanguage(k, words, stab, "orbit", tuple(c.letters for c in reps), cut)


def ray_language(x: Ray, k: int, probe: int) -> FactorLanguage:
    if probe < k:
        raise ValueError("probe must be >= k")
    first = inverse_closure(word_factors(x.prefix(probe), k))
    second = inverse_closure(word_factors(x.prefix(2 * probe), k))
    return FactorLanguage(k, frozenset(first), first == second, "ray")


# ---------------------------------------------------------------------------
# leaf testing


class LeafKind(str, Enum):
    NO = "NO"
    CONSISTENT = "CONSISTENT"
    UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class LeafVerdict:
    kind: LeafKind
    witness: Optional[tuple] = None
    depth: int = 0
    stabilized: bool = False

    @property
    def consistent(self) -> bool:
        return self.kind is LeafKind.CONSISTENT

    @property
    def refuted(self) -> bool:
        return self.kind is LeafKind.NO


def leaf_test(lang: FactorLanguage, x: Ray, y: Ray, k: int, slack: Optional[int] = None,
              probe: int = 64) -> LeafVerdict:
    """Slide length-k windows over the central ``2(k + slack)`` letters of ``Y^-1 X``."""
    if k > lang.depth:
        raise ValueError(f"test depth {k} exceeds language depth {lang.depth}")
    slack = k if slack is None else slack
    win = leaf_window(x, y, k + slack, probe=probe)
    if win is None:
        return LeafVerdict(LeafKind.UNDECIDED, depth=k)
    w = win.word
    words = lang.words
    for i in range(len(w) - k + 1):
        v = w[i:i + k]
        if v not in words:
            return LeafVerdict(LeafKind.NO, v, k, lang.stabilized)
    return LeafVerdict(LeafKind.CONSISTENT, None, k, lang.stabilized)


def language_compare(l1: FactorLanguage, l2: FactorLanguage) -> str:
    """'equal', 'subset' (l1 < l2), 'superset' or 'incomparable' at the common depth."""
    k = min(l1.depth, l2.depth)
    a, b = l1.restrict(k), l2.restrict(k)
    if a == b:
        return "equal"
    if a < b:
        return "subset"
    if a > b:
        return "superset"
    return "incomparable"


@dataclass
class Components:
    groups: list
    consistent_pairs: list
    refuted_pairs: list
    undecided_pairs: list

    def group_of(self, i: int) -> list:
        for g in self.groups:
            if i in g:
                return g
        raise KeyError(i)


def diag_components(rays: Sequence[Ray], lang: FactorLanguage, k: int, slack: Optional[int] = None,
                    probe: int = 64) -> Components:
    """Chain-connectivity classes of ``rays`` under CONSISTENT leaf tests."""
    dsu = DisjointSet(range(len(rays)))
    ok, no, und = [], [], []
    for i in range(len(rays)):
        for j in range(i + 1, len(rays)):
            v = leaf_test(lang, rays[i], rays[j], k, slack, probe)
            if v.consistent:
                ok.append((i, j))
                dsu.merge(i, j)
            elif v.refuted:
                no.append((i, j))
            else:
                und.append((i, j))
    groups = sorted((sorted(s) for s in dsu.subsets()), key=lambda g: (-len(g), g))
    return Components(groups, ok, no, und)
