"""Reduced words, cyclic words and boundary rays of a free group.

A letter is a nonzero int: generator ``i`` (0-based) is ``i + 1`` and its
inverse is ``-(i + 1)``.  A word is a plain tuple of letters; every public
function returning a word returns it freely reduced.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

Word = tuple  # tuple[int, ...]
IDENTITY: Word = ()


class WordError(ValueError):
    pass


class RayError(RuntimeError):
    """A ray could not produce a certified prefix."""


# ---------------------------------------------------------------------------
# letters and basis


def letter_key(x: int) -> int:
    # generator index ascending, positive before negative
    return 2 * (abs(x) - 1) + (x < 0)


def word_key(w: Sequence[int]) -> tuple:
    return tuple(letter_key(x) for x in w)


def shortlex_key(w: Sequence[int]) -> tuple:
    return (len(w), word_key(w))


@dataclass(frozen=True)
class Basis:
    symbols: tuple

    def __post_init__(self):
        syms = tuple(self.symbols)
        object.__setattr__(self, "symbols", syms)
        if len(syms) < 2:
            raise WordError("a basis needs rank N >= 2")
        if len(set(syms)) != len(syms):
            raise WordError(f"duplicate generator names in {syms}")
        for s in syms:
            if len(s) != 1 or not s.isalpha() or not s.islower():
                raise WordError(f"generator names must be single lowercase letters, got {s!r}")

    @classmethod
    def standard(cls, rank: int) -> "Basis":
        if rank > 26:
            raise WordError("rank > 26 is not expressible in the ASCII word syntax")
        return cls(tuple("abcdefghijklmnopqrstuvwxyz"[:rank]))

    @property
    def rank(self) -> int:
        return len(self.symbols)

    def letters(self) -> list:
        """All letters in canonical order."""
        return sorted([i for i in range(1, self.rank + 1)] + [-i for i in range(1, self.rank + 1)],
                      key=letter_key)

    def parse(self, text: str, reduced: bool = True) -> Word:
        """Parse ``a``/``A`` letter syntax; ``1`` is the identity.  Edge paths pass ``reduced=False``."""
        text = text.strip()
        if text == "1" or text == "":
            return IDENTITY
        index = {s: i + 1 for i, s in enumerate(self.symbols)}
        out = []
        for ch in text:
            if ch in index:
                out.append(index[ch])
            elif ch.lower() in index and ch.isupper():
                out.append(-index[ch.lower()])
            else:
                raise WordError(f"unknown letter {ch!r} in word {text!r}")
        if reduced and not is_reduced(out):
            raise WordError(f"word {text!r} is not freely reduced")
        return tuple(out)

    def format(self, w: Sequence[int]) -> str:
        if not w:
            return "1"
        return "".join(self.symbols[x - 1] if x > 0 else self.symbols[-x - 1].upper() for x in w)

    def check(self, w: Sequence[int]) -> None:
        n = self.rank
        for x in w:
            if x == 0 or abs(x) > n:
                raise WordError(f"letter {x} does not belong to a basis of rank {n}")


# ---------------------------------------------------------------------------
# group law


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def reduce_word(letters: Iterable[int]) -> Word:
    stack = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def multiply(*words: Sequence[int]) -> Word:
    """Free reduction of the concatenation; assumes each factor is reduced."""
    out = []
    for v in words:
        i = 0
        n = len(v)
        while i < n and out and out[-1] == -v[i]:
            out.pop()
            i += 1
        out.extend(v[i:])
    return tuple(out)


def invert(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def power(w: Sequence[int], n: int) -> Word:
    if n < 0:
        return power(invert(w), -n)
    out = IDENTITY
    for _ in range(n):
        out = multiply(out, w)
    return out


def common_prefix_length(u: Sequence[int], v: Sequence[int]) -> int:
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


def cyclic_reduce(w: Sequence[int]) -> tuple:
    """Return ``(core, g)`` with ``w = g core g^-1`` and ``core`` cyclically reduced."""
    w = tuple(w)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[i:j + 1], w[:i]


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    return is_reduced(w) and (len(w) < 2 or w[0] != -w[-1])


def least_rotation(w: Sequence[int]) -> int:
    """Index of the lexicographically least rotation (Booth's algorithm)."""
    s = word_key(w)
    n = len(s)
    if n == 0:
        return 0
    ss = s + s
    f = [-1] * (2 * n)
    k = 0
    for j in range(1, 2 * n):
        sj = ss[j]
        i = f[j - k - 1]
        while i != -1 and sj != ss[k + i + 1]:
            if sj < ss[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != ss[k + i + 1]:
            if sj < ss[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k % n


@dataclass(frozen=True)
class CyclicWord:
    """Conjugacy class of a nontrivial element, stored in canonical rotation."""

    letters: Word

    @classmethod
    def of(cls, w: Sequence[int]) -> "CyclicWord":
        return cyclic_normalize(tuple(w))[0]

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "CyclicWord":
        return CyclicWord.of(invert(self.letters))

    def format(self, basis: Basis) -> str:
        return "[" + basis.format(self.letters) + "]"


def cyclic_normalize(u: Sequence[int]) -> tuple:
    """Canonical cyclic word of ``u`` and ``g`` with ``u = g . c . g^-1``."""
    u = tuple(u)
    if not u:
        raise WordError("the identity has no cyclic normal form")
    core, h = cyclic_reduce(u)
    r = least_rotation(core)
    canon = core[r:] + core[:r]
    return CyclicWord(canon), multiply(h, core[:r])


def are_conjugate(u: Sequence[int], v: Sequence[int]) -> bool:
    cu, _ = cyclic_reduce(u)
    cv, _ = cyclic_reduce(v)
    if len(cu) != len(cv):
        return False
    if not cu:
        return True
    a = _as_bytes(cu)
    return _as_bytes(cv) in a + a


def _as_bytes(w: Sequence[int]) -> bytes:
    # one byte per letter: ranks up to 128
    return bytes(letter_key(x) for x in w)


def root(w: Sequence[int]) -> tuple:
    """Primitive root of a cyclically reduced word: ``w = r^e``; returns ``(r, e)``."""
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and tuple(w[:d]) * (n // d) == tuple(w):
            return tuple(w[:d]), n // d
    return tuple(w), 1


# ---------------------------------------------------------------------------
# factor sets


def _prefix_closure(windows: Iterable[tuple]) -> set:
    out = set()
    for win in windows:
        for j in range(1, len(win) + 1):
            out.add(win[:j])
    return out


def word_factors(w: Sequence[int], k: int) -> set:
    """All nonempty factors of length <= k of a linear word."""
    w = tuple(w)
    return _prefix_closure({w[i:i + k] for i in range(len(w))})


def periodic_factors(core: Sequence[int], k: int) -> set:
    """Factors of length <= k of the biinfinite periodic word spelled by ``core``."""
    core = tuple(core)
    n = len(core)
    if n == 0:
        return set()
    # every length-k window starting inside the first period fits in core^p
    p = math.ceil(k / n) + 1
    ext = core * p
    return _prefix_closure({ext[i:i + k] for i in range(n)})


def factors(w: CyclicWord, k: int) -> set:
    if k < 1:
        raise WordError("factor length must be >= 1")
    return periodic_factors(w.letters, k)


def inverse_closure(words: Iterable[tuple]) -> set:
    words = set(words)
    return words | {invert(v) for v in words}


# ---------------------------------------------------------------------------
# rays


class RayEquality(str, Enum):
    EQUAL = "equal-certified"
    DISTINCT = "distinct-certified"
    UNDECIDED = "undecided-at-depth"


class Ray:
    """A point of the boundary, given by its coherent reduced prefixes."""

    tag: tuple = ("generic",)

    def prefix(self, n: int) -> Word:
        raise NotImplementedError

    def format(self, basis: Basis, n: int) -> str:
        return basis.format(self.prefix(n)) + "..."


class PrefixRay(Ray):
    """Ray backed by an arbitrary prefix function; results are cached and checked for coherence."""

    def __init__(self, fn: Callable[[int], Sequence[int]], tag: tuple = ("generic",)):
        self._fn = fn
        self._cache: Word = ()
        self.tag = tag

    def prefix(self, n: int) -> Word:
        if n <= len(self._cache):
            return self._cache[:n]
        p = tuple(self._fn(n))
        if len(p) != n or not is_reduced(p) or p[:len(self._cache)] != self._cache:
            raise RayError(f"incoherent prefix of length {n} from {self.tag}")
        self._cache = p
        return p


class PeriodicRay(Ray):
    """The eventually periodic ray ``head . period^inf`` in canonical form.

    Canonical form: ``period`` is a primitive cyclically reduced word and
    ``head`` is as short as possible.  Two periodic rays are equal iff their
    canonical pairs agree.
    """

    def __init__(self, head: Sequence[int], period: Sequence[int]):
        self.head, self.period = normalize_periodic(head, period)
        self.tag = ("periodic", self.head, self.period)

    def prefix(self, n: int) -> Word:
        h, p = self.head, self.period
        if n <= len(h):
            return h[:n]
        m = n - len(h)
        reps = -(-m // len(p))
        return (h + p * reps)[:n]

    def __eq__(self, other):
        return isinstance(other, PeriodicRay) and self.tag == other.tag

    def __hash__(self):
        return hash(self.tag)

    def __repr__(self):
        return f"PeriodicRay(head={self.head}, period={self.period})"

    def format(self, basis: Basis, n: int = 0) -> str:
        head = basis.format(self.head) if self.head else ""
        return f"{head}({basis.format(self.period)})"


def normalize_periodic(head: Sequence[int], period: Sequence[int]) -> tuple:
    head, period = tuple(head), tuple(period)
    if not is_reduced(head) or not is_reduced(period):
        raise WordError("ray data must be reduced words")
    if not period:
        raise WordError("the period of a periodic ray must be nontrivial")
    core, g = cyclic_reduce(period)
    # head . (g core g^-1)^inf = head . g . core^inf
    head = multiply(head, g)
    core = root(core)[0]
    # absorb cancellation at the junction by rotating the period forward
    while head and head[-1] == -core[0]:
        head = head[:-1]
        core = core[1:] + core[:1]
    # shortest head: pull trailing period letters into the period
    while head and head[-1] == core[-1]:
        head = head[:-1]
        core = core[-1:] + core[:-1]
    return head, core


def periodic_ray(w: Sequence[int]) -> PeriodicRay:
    """``w^inf`` for a nontrivial element ``w``."""
    return PeriodicRay((), w)


def compare_rays(x: Ray, y: Ray, depth: int) -> RayEquality:
    if isinstance(x, PeriodicRay) and isinstance(y, PeriodicRay):
        return RayEquality.EQUAL if x == y else RayEquality.DISTINCT
    try:
        px, py = x.prefix(depth), y.prefix(depth)
    except RayError:
        return RayEquality.UNDECIDED
    return RayEquality.UNDECIDED if px == py else RayEquality.DISTINCT


@dataclass(frozen=True)
class LeafWindow:
    """Central factor of length ``2 * radius`` of the biinfinite word ``Y^-1 X``."""

    word: Word
    radius: int


def leaf_window(x: Ray, y: Ray, k: int, probe: int = 64, cap: int = 4096):
    """Window of radius ``k`` around the junction of ``Y^-1 X``.

    Returns ``None`` when the pair cannot be decided: the rays agree up to
    ``probe`` letters, or the prefixes needed exceed ``cap``.
    """
    if k < 1:
        raise WordError("window radius must be >= 1")
    if compare_rays(x, y, probe) is not RayEquality.DISTINCT:
        return None
    n = 2 * k
    while n <= cap:
        try:
            central = _central(x, y, n, k)
        except RayError:
            return None
        if central is not None:
            try:
                again = _central(x, y, n + k, k)
            except RayError:
                return None
            if central == again:
                return LeafWindow(central, k)
        n *= 2
    return None


def _central(x: Ray, y: Ray, n: int, k: int):
    w = multiply(invert(y.prefix(n)), x.prefix(n))
    c = n - len(w) // 2  # letters cancelled on each side
    left = n - c
    if left < k:
        return None
    return w[left - k:left + k]


def warn_rank(basis: Basis) -> None:
    if basis.rank == 2:
        warnings.warn("rank 2: atoroidal fully irreducible automorphisms need N >= 3", stacklevel=2)
