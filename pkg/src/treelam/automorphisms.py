"""Free group automorphisms by generator images, plus cancellation bounds.

Inverses are supplied data, never computed: every example automorphism in
the library ships with explicit inverse images, and the loader verifies
that both compositions reduce to the identity on generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

from .words import (
    Basis,
    CyclicWord,
    Letters,
    Ray,
    Word,
    WordError,
    cyclic_word,
    free_reduce,
    identity as identity_word,
    inverse_letters,
    parse_word,
    ray,
)


class AutomorphismError(ValueError):
    pass


@dataclass(frozen=True)
class Automorphism:
    """Homomorphism given by reduced images of the source generators."""

    source: Basis
    target: Basis
    images: Tuple[Word, ...]
    inverse_images: Optional[Tuple[Word, ...]] = None

    def __post_init__(self):
        if len(self.images) != self.source.rank:
            raise AutomorphismError("one image per source generator required")
        for im in self.images:
            if im.basis != self.target:
                raise AutomorphismError("image over wrong basis")
        if self.inverse_images is not None:
            if len(self.inverse_images) != self.target.rank:
                raise AutomorphismError("one inverse image per target generator")
            for im in self.inverse_images:
                if im.basis != self.source:
                    raise AutomorphismError("inverse image over wrong basis")
            inv = Automorphism(self.target, self.source, self.inverse_images)
            for i in range(self.source.rank):
                if inv.apply(self.images[i]).letters != (i + 1,):
                    raise AutomorphismError(
                        f"inverse images do not invert on generator {i + 1}"
                    )
            for i in range(self.target.rank):
                if self.apply_letters(self.inverse_images[i].letters) != (i + 1,):
                    raise AutomorphismError(
                        f"images do not invert the inverse on generator {i + 1}"
                    )

    def __repr__(self) -> str:
        ims = ", ".join(
            f"{self.source.symbols[i]}->{im}" for i, im in enumerate(self.images)
        )
        return f"Automorphism({ims})"

    @property
    def invertible(self) -> bool:
        return self.inverse_images is not None

    def inverse(self) -> "Automorphism":
        if self.inverse_images is None:
            raise AutomorphismError("no inverse images supplied")
        return Automorphism(
            self.target, self.source, self.inverse_images, self.images
        )

    @cached_property
    def is_positive(self) -> bool:
        return all(all(x > 0 for x in im.letters) for im in self.images)

    def letter_image(self, x: int) -> Letters:
        im = self.images[abs(x) - 1].letters
        return im if x > 0 else inverse_letters(im)

    def apply_letters(self, letters: Sequence[int]) -> Letters:
        out: list = []
        for x in letters:
            for y in self.letter_image(x):
                if out and out[-1] == -y:
                    out.pop()
                else:
                    out.append(y)
        return tuple(out)

    def apply(self, w: Word) -> Word:
        if w.basis != self.source:
            raise AutomorphismError("word over wrong basis")
        return Word(self.target, self.apply_letters(w.letters))

    def apply_cyclic(self, w: CyclicWord) -> CyclicWord:
        if w.basis != self.source:
            raise AutomorphismError("word over wrong basis")
        return cyclic_word(Word(self.target, self.apply_letters(w.letters)))

    def apply_ray(self, r: Ray) -> Ray:
        return ray(self.apply(r.prefix), self.apply(r.period))

    def image_length_sum(self) -> int:
        return sum(len(im) for im in self.images)


def identity_automorphism(b: Basis) -> Automorphism:
    gens = tuple(Word(b, (i + 1,)) for i in range(b.rank))
    return Automorphism(b, b, gens, gens)


def automorphism(
    b: Basis,
    images: Dict[str, str],
    inverse_images: Optional[Dict[str, str]] = None,
    target: Optional[Basis] = None,
) -> Automorphism:
    """Build from symbol->word-text maps, e.g. {"a": "b a b'", ...}."""
    target = target or b
    ims = tuple(parse_word(target, images[s]) for s in b.symbols)
    inv = None
    if inverse_images is not None:
        inv = tuple(parse_word(b, inverse_images[s]) for s in target.symbols)
    return Automorphism(b, target, ims, inv)


def compose(a: Automorphism, b: Automorphism) -> Automorphism:
    """The composite a∘b (apply b first)."""
    if b.target != a.source:
        raise AutomorphismError("compose: basis mismatch")
    ims = tuple(a.apply(im) for im in b.images)
    inv = None
    if a.inverse_images is not None and b.inverse_images is not None:
        binv = b.inverse()
        inv = tuple(binv.apply(im) for im in a.inverse_images)
    return Automorphism(b.source, a.target, ims, inv)


def power(a: Automorphism, k: int) -> Automorphism:
    """a^k (negative k uses the supplied inverse)."""
    if a.source != a.target:
        raise AutomorphismError("powers need an endomorphism")
    if k < 0:
        return power(a.inverse(), -k)
    out = identity_automorphism(a.source)
    for _ in range(k):
        out = compose(a, out)
    return out


# -- chop -------------------------------------------------------------------


def chop(w: Word, k: int) -> Word:
    """Strip the length-k prefix and suffix; empty if |w| <= 2k.

    >>> from .words import basis
    >>> b3 = basis('abc')
    >>> str(chop(parse_word(b3, 'a b c a b'), 1))
    'b c a'
    """
    if k < 0:
        raise AutomorphismError("chop length must be >= 0")
    if len(w) <= 2 * k:
        return identity_word(w.basis)
    return Word(w.basis, w.letters[k : len(w) - k])


# -- cancellation bounds ----------------------------------------------------


@dataclass(frozen=True)
class CancellationBound:
    """Bound on letters cancelled when an image pair is concatenated."""

    value: int
    kind: str  # "upper-bound" | "exact-up-to-depth"
    depth_checked: int

    def __post_init__(self):
        if self.value < 0:
            raise AutomorphismError("bound must be >= 0")
        if self.kind not in ("upper-bound", "exact-up-to-depth"):
            raise AutomorphismError(f"unknown bound kind {self.kind!r}")


def _reduced_words_with_first(b: Basis, depth: int):
    """Yield (first_letter, letters) for every nonempty reduced word <= depth."""
    letters = b.letters()
    stack = [(x,) for x in letters]
    while stack:
        w = stack.pop()
        yield w[0], w
        if len(w) < depth:
            for x in letters:
                if x != -w[-1]:
                    stack.append(w + (x,))


def cancellation_bound(
    a: Automorphism, depth: int = 8, certify: bool = True
) -> CancellationBound:
    """Cancellation bound for rewriting through ``a``.

    The cheap bound sum(|a(x)|) is always sound.  The certified value is
    the exact maximum over all reduced concatenations u·v with
    |u|, |v| <= depth, found as the longest common prefix of a(x), a(y)
    over reduced words x != y (x = u^-1), via one lexicographic sweep.
    """
    if not a.invertible:
        raise AutomorphismError("cancellation bound needs an invertible map")
    cheap = a.image_length_sum()
    if not certify:
        return CancellationBound(cheap, "upper-bound", 0)

    # encode image letters injectively as bytes for prefix-compatible sorting
    rank = a.target.rank
    enc = {}
    code = 0
    for i in range(1, rank + 1):
        for s in (i, -i):
            enc[s] = code
            code += 1
    items = []
    for first, letters in _reduced_words_with_first(a.source, depth):
        img = a.apply_letters(letters)
        items.append((bytes(enc[x] for x in img), first))
    items.sort()

    def lcp(x: bytes, y: bytes) -> int:
        n = min(len(x), len(y))
        i = 0
        while i < n and x[i] == y[i]:
            i += 1
        return i

    best = 0
    last_seen: dict = {}
    for img, tag in items:
        for other_tag, other_img in last_seen.items():
            if other_tag != tag:
                best = max(best, lcp(img, other_img))
        last_seen[tag] = img
    return CancellationBound(best, "exact-up-to-depth", depth)


def verify_cancellation_bound(
    a: Automorphism, bound: CancellationBound, samples, rng=None
) -> bool:
    """Re-runnable certificate check: no sampled pair exceeds the bound."""
    for u, v in samples:
        if u.letters and v.letters and u.letters[-1] == -v.letters[0]:
            continue
        cancelled = (len(a.apply(u)) + len(a.apply(v)) - len(a.apply(u * v))) // 2
        if cancelled > bound.value:
            return False
    return True


@dataclass(frozen=True)
class ChopConstants:
    """Constants for transferring factors between two bases.

    ``forward`` rewrites B-coordinates to A, ``backward`` the other way;
    inner = bound(forward), outer = bound(backward),
    combined = outer + stretch * inner with stretch the maximal length of
    an A-generator written in B-coordinates.
    """

    inner: int
    outer: int
    stretch: int

    @property
    def combined(self) -> int:
        return self.outer + self.stretch * self.inner


def chop_constants(a: Automorphism, depth: int = 8) -> ChopConstants:
    inner = cancellation_bound(a, depth).value
    outer = cancellation_bound(a.inverse(), depth).value
    stretch = max(len(im) for im in a.inverse().images)
    return ChopConstants(inner, outer, stretch)


def is_factor(u: Word, w: Word) -> bool:
    """Contiguous-factor test."""
    if not u:
        return True
    a, b = u.letters, w.letters
    n, m = len(a), len(b)
    return any(b[i : i + n] == a for i in range(m - n + 1))
