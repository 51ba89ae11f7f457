"""Automorphisms of F_N given by basis images, and the mapping torus group."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .words import (
    IDENTITY,
    Basis,
    CyclicWord,
    PrefixRay,
    RayError,
    Word,
    WordError,
    are_conjugate,
    common_prefix_length,
    cyclic_normalize,
    cyclic_reduce,
    invert,
    is_cyclically_reduced,
    letter_key,
    multiply,
)

DEFAULT_BUDGET = 10 ** 6


class BudgetExceeded(RuntimeError):
    """A word grew beyond the configured length budget."""


class MissingInverse(ValueError):
    pass


@dataclass(frozen=True)
class Automorphism:
    basis: Basis
    images: tuple
    inverse_images: Optional[tuple] = None
    budget: int = field(default=DEFAULT_BUDGET, compare=False)

    def __post_init__(self):
        n = self.basis.rank
        imgs = tuple(tuple(w) for w in self.images)
        object.__setattr__(self, "images", imgs)
        if len(imgs) != n:
            raise WordError(f"expected {n} images, got {len(imgs)}")
        for w in imgs:
            self.basis.check(w)
            if multiply(w) != w:
                raise WordError("images must be freely reduced")
        if self.inverse_images is not None:
            inv = tuple(tuple(w) for w in self.inverse_images)
            object.__setattr__(self, "inverse_images", inv)
            if len(inv) != n:
                raise WordError(f"expected {n} inverse images, got {len(inv)}")
            for w in inv:
                self.basis.check(w)
            for i in range(1, n + 1):
                there = _apply_images(inv, _apply_images(imgs, (i,)))
                back = _apply_images(imgs, _apply_images(inv, (i,)))
                if there != (i,) or back != (i,):
                    raise WordError(
                        f"inverse images do not invert the map on generator "
                        f"{self.basis.symbols[i - 1]}")

    @property
    def rank(self) -> int:
        return self.basis.rank

    @property
    def invertible(self) -> bool:
        return self.inverse_images is not None

    def image(self, x: int) -> Word:
        w = self.images[abs(x) - 1]
        return w if x > 0 else invert(w)

    def __call__(self, u: Sequence[int]) -> Word:
        return apply(self, u)

    def inverse(self) -> "Automorphism":
        if self.inverse_images is None:
            raise MissingInverse("inverse images were not supplied")
        return Automorphism(self.basis, self.inverse_images, self.images, self.budget)

    def max_image_length(self) -> int:
        return max(len(w) for w in self.images)

    def format(self) -> str:
        b = self.basis
        lines = [f"rank {b.rank}"]
        lines += [f"{s} -> {b.format(w)}" for s, w in zip(b.symbols, self.images)]
        if self.inverse_images is not None:
            lines.append("inverse:")
            lines += [f"{s} -> {b.format(w)}" for s, w in zip(b.symbols, self.inverse_images)]
        return "\n".join(lines) + "\n"


def _apply_images(images: tuple, u: Sequence[int], budget: int = DEFAULT_BUDGET,
                  limit: Optional[int] = None) -> Word:
    out = []
    for x in u:
        img = images[x - 1] if x > 0 else invert(images[-x - 1])
        i = 0
        n = len(img)
        while i < n and out and out[-1] == -img[i]:
            out.pop()
            i += 1
        out.extend(img[i:] if i else img)
        if limit is not None and len(out) >= limit:
            return tuple(out[:limit])
        if len(out) > budget:
            raise BudgetExceeded(f"word length exceeded budget {budget}")
    return tuple(out)


def apply(phi: Automorphism, u: Sequence[int]) -> Word:
    phi.basis.check(u)
    return _apply_images(phi.images, u, phi.budget)


def power_apply(phi: Automorphism, n: int, u: Sequence[int]) -> Word:
    if n < 0:
        if phi.inverse_images is None:
            raise MissingInverse("negative power needs supplied inverse images")
        images = phi.inverse_images
    else:
        images = phi.images
    phi.basis.check(u)
    w = tuple(u)
    for _ in range(abs(n)):
        w = _apply_images(images, w, phi.budget)
    return w


def identity(basis: Basis) -> Automorphism:
    gens = tuple((i,) for i in range(1, basis.rank + 1))
    return Automorphism(basis, gens, gens)


def inner(u: Sequence[int], basis: Basis) -> Automorphism:
    """Conjugation ``x -> u x u^-1``."""
    u = tuple(u)
    basis.check(u)
    ui = invert(u)
    images = tuple(multiply(u, (i,), ui) for i in range(1, basis.rank + 1))
    inverse = tuple(multiply(ui, (i,), u) for i in range(1, basis.rank + 1))
    return Automorphism(basis, images, inverse)


def compose(f: Automorphism, g: Automorphism) -> Automorphism:
    """``f o g``: apply ``g`` first."""
    if f.basis != g.basis:
        raise WordError("basis mismatch")
    images = tuple(_apply_images(f.images, w, f.budget) for w in g.images)
    inverse = None
    if f.inverse_images is not None and g.inverse_images is not None:
        inverse = tuple(_apply_images(g.inverse_images, w, g.budget) for w in f.inverse_images)
    return Automorphism(f.basis, images, inverse, f.budget)


def automorphism_power(phi: Automorphism, n: int) -> Automorphism:
    if n < 0:
        return automorphism_power(phi.inverse(), -n)
    out = identity(phi.basis)
    out = Automorphism(phi.basis, out.images, out.inverse_images, phi.budget)
    for _ in range(n):
        out = compose(phi, out)
    return out


def same_action(f: Automorphism, g: Automorphism) -> bool:
    return f.basis == g.basis and f.images == g.images


# ---------------------------------------------------------------------------
# mapping torus  G = F_N x| <t>,  t w t^-1 = phi(w)


@dataclass(frozen=True, order=True)
class MappingTorusElement:
    """The element ``w t^m`` in normal form."""

    w: Word
    m: int

    def format(self, basis: Basis) -> str:
        return f"{basis.format(self.w)},{self.m}"


MT_IDENTITY = MappingTorusElement(IDENTITY, 0)


def mt_multiply(phi: Automorphism, g: MappingTorusElement, h: MappingTorusElement) -> MappingTorusElement:
    return MappingTorusElement(multiply(g.w, power_apply(phi, g.m, h.w)), g.m + h.m)


def mt_inverse(phi: Automorphism, g: MappingTorusElement) -> MappingTorusElement:
    return MappingTorusElement(power_apply(phi, -g.m, invert(g.w)), -g.m)


def mt_conjugate(phi: Automorphism, c: MappingTorusElement, g: MappingTorusElement) -> MappingTorusElement:
    """``c g c^-1``."""
    return mt_multiply(phi, mt_multiply(phi, c, g), mt_inverse(phi, c))


def conjugation_automorphism(phi: Automorphism, g: MappingTorusElement) -> Automorphism:
    """The automorphism ``x -> g x g^-1 = w phi^m(x) w^-1``."""
    return compose(inner(g.w, phi.basis), automorphism_power(phi, g.m))


# ---------------------------------------------------------------------------
# conjugacy classes


def reduced_words(rank: int, max_len: int, min_len: int = 0) -> Iterator[Word]:
    """All reduced words of length in [min_len, max_len], shortlex order."""
    letters = sorted([i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)], key=letter_key)
    layer = [IDENTITY]
    for n in range(max_len + 1):
        if n >= min_len:
            yield from layer
        if n == max_len:
            break
        layer = [w + (x,) for w in layer for x in letters if not w or w[-1] != -x]


def cyclic_classes(rank: int, max_len: int) -> list:
    """Canonical representatives of all nontrivial conjugacy classes with cyclic length <= max_len."""
    seen = set()
    out = []
    for w in reduced_words(rank, max_len, 1):
        if not is_cyclically_reduced(w):
            continue
        c = cyclic_normalize(w)[0]
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def periodic_class_scan(phi: Automorphism, max_len: int, max_power: int) -> list:
    """Classes ``[w]`` with ``|w| <= max_len`` and ``phi^n[w] = [w]`` for some ``1 <= n <= max_power``.

    Returns ``(CyclicWord, least period)`` pairs.  An empty list is evidence
    (not proof) that ``phi`` is atoroidal.
    """
    if max_len < 1 or max_power < 1:
        raise ValueError("scan bounds must be >= 1")
    found = []
    for c in cyclic_classes(phi.rank, max_len):
        w = c.letters
        for n in range(1, max_power + 1):
            w = cyclic_reduce(apply(phi, w))[0]
            if are_conjugate(w, c.letters):
                found.append((c, n))
                break
            if len(w) > phi.budget:
                raise BudgetExceeded("class scan exceeded budget")
    return found


# ---------------------------------------------------------------------------
# iterated-image rays


def iterate_truncated(phi: Automorphism, seed: Sequence[int], steps: int, keep: int) -> list:
    """``phi^n(seed)`` for ``n = 0..steps``, each cut to its first ``keep`` letters.

    Only the first ``keep // 2`` letters of a cut iterate are trusted;
    the remainder absorbs cancellation against the discarded tail.
    """
    w = tuple(seed)
    seq = [w]
    for _ in range(steps):
        w = _apply_images(phi.images, w, phi.budget, limit=keep)
        seq.append(w)
    return seq


def converged_prefix(seq: list, period: int, need: int, keep: int) -> Optional[tuple]:
    """Find the first period-iterate whose ``need``-prefix is shared by the next two.

    ``seq`` holds consecutive truncated iterates of one map.  Returns
    ``(step, prefix)`` or None.  Requiring iterates of length ``>= need``
    rules out seeds that are merely permuted by the map.
    """
    trusted = keep // 2
    sub = seq[::period]
    for j in range(len(sub) - 2):
        a, b, c = sub[j], sub[j + 1], sub[j + 2]
        if len(a) < need:
            continue
        if (common_prefix_length(a[:trusted], b[:trusted]) >= need
                and common_prefix_length(b[:trusted], c[:trusted]) >= need):
            return j * period, a[:need]
    return None


class IteratedRay(PrefixRay):
    """Limit of ``psi^(p j)(seed)``; prefixes are recomputed lazily at growing precision."""

    def __init__(self, psi: Automorphism, seed: Sequence[int], period: int,
                 known: Sequence[int] = (), max_steps: int = 400):
        self.psi = psi
        self.seed = tuple(seed)
        self.period = period
        self.max_steps = max_steps
        super().__init__(self._compute, tag=("iterated", psi.images, self.seed, period))
        if known:
            self._cache = tuple(known)

    def _compute(self, n: int) -> Word:
        keep = max(4 * n, 256)
        steps = self.period
        seq = [self.seed]
        while steps <= self.max_steps:
            seq = iterate_truncated(self.psi, self.seed, steps, keep)
            hit = converged_prefix(seq, self.period, n, keep)
            if hit is not None:
                return hit[1]
            steps *= 2
        raise RayError(f"iterated ray from seed {self.seed} did not converge to length {n}")

    def __repr__(self):
        return f"IteratedRay(seed={self.seed}, period={self.period})"

    def __getstate__(self):
        state = dict(self.__dict__)
        state.pop("_fn", None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._fn = self._compute


def fixed_ray(phi: Automorphism, x: int, period: int = 1) -> IteratedRay:
    return IteratedRay(phi, (x,), period)


def word_ray(basis: Basis, text: str, psi: Optional[Automorphism] = None):
    """Parse a ray spec: ``u(v)`` for ``u v^inf``, or ``iter:s[:p]`` for the limit of ``psi^(p j)(s)``."""
    from .words import PeriodicRay

    text = text.strip()
    if text.startswith("iter:"):
        if psi is None:
            raise WordError("iterated ray spec needs an automorphism")
        parts = text.split(":")
        seed = basis.parse(parts[1])
        period = int(parts[2]) if len(parts) > 2 else 1
        return IteratedRay(psi, seed, period)
    if text.endswith(")") and "(" in text:
        head, period = text[:-1].split("(", 1)
        return PeriodicRay(basis.parse(head) if head else (), basis.parse(period))
    raise WordError(f"cannot parse ray spec {text!r}")


def mt_elements(rank: int, word_radius: int, exp_max: int) -> Iterator[MappingTorusElement]:
    for m in sorted(itertools.chain(range(1, exp_max + 1), range(-exp_max, 0)), key=lambda m: (abs(m), -m)):
        for w in reduced_words(rank, word_radius):
            yield MappingTorusElement(w, m)
