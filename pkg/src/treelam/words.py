"""Exact combinatorics of reduced words, cyclic words, rays and leaves.

Letters of a free group basis are encoded as nonzero integers: the i-th
basis symbol is ``i + 1``, its formal inverse is ``-(i + 1)``.  All values
are immutable and hashable, so they can be shared freely between workers.

The total order used everywhere (canonical rotations, sorted output) is
    a < a' < b < b' < c < c' < ...
realised by :func:`letter_key`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence, Tuple

Letters = Tuple[int, ...]


class WordError(ValueError):
    """Malformed word, basis or ray data."""


def letter_key(x: int) -> int:
    """Sort key realising the order a < a' < b < b' < ..."""
    return 2 * abs(x) + (0 if x > 0 else 1)


def word_sort_key(letters: Sequence[int]):
    return (len(letters), [letter_key(x) for x in letters])


@dataclass(frozen=True)
class Basis:
    """Named ordered basis of a free group; rank = number of symbols."""

    name: str
    symbols: Tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) < 2:
            raise WordError("rank must be at least 2")
        if len(set(self.symbols)) != len(self.symbols):
            raise WordError("basis symbols must be pairwise distinct")
        for s in self.symbols:
            if not s or not re.fullmatch(r"[A-Za-z0-9_]+", s):
                raise WordError(f"invalid basis symbol: {s!r}")

    @property
    def rank(self) -> int:
        return len(self.symbols)

    @cached_property
    def _index(self) -> dict:
        return {s: i + 1 for i, s in enumerate(self.symbols)}

    def letters(self) -> Tuple[int, ...]:
        """All 2N signed letters in canonical order a, a', b, b', ..."""
        out = []
        for i in range(1, self.rank + 1):
            out.extend((i, -i))
        return tuple(out)

    def symbol(self, x: int) -> str:
        s = self.symbols[abs(x) - 1]
        return s if x > 0 else s + "'"

    def encode(self, token: str) -> int:
        inv = False
        if token.endswith("^-1"):
            token, inv = token[:-3], True
        elif token.endswith("'"):
            token, inv = token[:-1], True
        idx = self._index.get(token)
        if idx is None:
            raise WordError(f"unknown letter {token!r} in basis {self.name!r}")
        return -idx if inv else idx


def basis(symbols, name: str = "") -> Basis:
    """Build a Basis from 'abc', 'a b c' or an iterable of symbols.

    >>> basis('abc').rank
    3
    """
    if isinstance(symbols, Basis):
        return symbols
    if isinstance(symbols, str):
        syms = tuple(symbols.split()) if " " in symbols else tuple(symbols)
    else:
        syms = tuple(symbols)
    return Basis(name or "".join(syms), syms)


def free_reduce(seq: Iterable[int]) -> Letters:
    """Freely reduce a letter sequence (stack cancellation of x, x')."""
    out: list = []
    for x in seq:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse_letters(seq: Sequence[int]) -> Letters:
    return tuple(-x for x in reversed(seq))


@dataclass(frozen=True)
class Word:
    """A reduced word over a basis.  The empty word is the identity."""

    basis: Basis
    letters: Letters

    def __post_init__(self):
        n = self.basis.rank
        for i, x in enumerate(self.letters):
            if not isinstance(x, int) or x == 0 or abs(x) > n:
                raise WordError(f"letter {x!r} outside basis of rank {n}")
            if i and self.letters[i - 1] == -x:
                raise WordError("word is not freely reduced")

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __str__(self) -> str:
        return " ".join(self.basis.symbol(x) for x in self.letters) or "1"

    def __repr__(self) -> str:
        return f"Word({self})"

    def __mul__(self, other: "Word") -> "Word":
        if other.basis != self.basis:
            raise WordError("basis mismatch")
        return Word(self.basis, free_reduce(self.letters + other.letters))

    def inverse(self) -> "Word":
        return Word(self.basis, inverse_letters(self.letters))

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        out = identity(self.basis)
        for _ in range(n):
            out = out * self
        return out

    def conjugate_by(self, g: "Word") -> "Word":
        """g * self * g^-1."""
        return g * self * g.inverse()

    def is_cyclically_reduced(self) -> bool:
        w = self.letters
        return len(w) < 2 or w[0] != -w[-1]

    def prefix(self, k: int) -> "Word":
        return Word(self.basis, self.letters[:k])

    def factor(self, i: int, j: int) -> "Word":
        return Word(self.basis, self.letters[i:j])

    def sort_key(self):
        return word_sort_key(self.letters)


def identity(b: Basis) -> Word:
    return Word(b, ())


def reduce_word(b: Basis, seq: Iterable[int]) -> Word:
    """Unique reduced form of an arbitrary letter sequence."""
    return Word(b, free_reduce(seq))


def parse_word(b: Basis, text: str) -> Word:
    """Parse `a b' c` (or compact `ab'c` for single-char symbols).

    >>> b3 = basis('abc')
    >>> parse_word(b3, "a b b' c").letters
    (1, 3)
    >>> parse_word(b3, "ab'c").letters
    (1, -2, 3)
    """
    text = text.strip()
    if not text or text == "1":
        return identity(b)
    if any(ch.isspace() for ch in text):
        tokens = text.split()
    else:
        if any(len(s) > 1 for s in b.symbols):
            tokens = [text]
        else:
            tokens = re.findall(r"[A-Za-z0-9_](?:\^-1|')?", text)
            if sum(len(t) for t in tokens) != len(text):
                raise WordError(f"cannot tokenise word {text!r}")
    return reduce_word(b, (b.encode(t) for t in tokens))


def format_letters(b: Basis, letters: Sequence[int]) -> str:
    return " ".join(b.symbol(x) for x in letters) or "1"


# -- cyclic words -----------------------------------------------------------


def cyclic_reduce(seq: Sequence[int]) -> Letters:
    w = list(free_reduce(seq))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def canonical_rotation(seq: Sequence[int]) -> Letters:
    """Lexicographically least rotation under the letter_key order."""
    w = tuple(seq)
    if len(w) <= 1:
        return w
    best = w
    bestk = [letter_key(x) for x in w]
    for i in range(1, len(w)):
        cand = w[i:] + w[:i]
        candk = [letter_key(x) for x in cand]
        if candk < bestk:
            best, bestk = cand, candk
    return best


@dataclass(frozen=True)
class CyclicWord:
    """A nonempty conjugacy class: cyclically reduced, canonical rotation."""

    basis: Basis
    letters: Letters

    def __post_init__(self):
        if not self.letters:
            raise WordError("cyclic word must be nonempty")
        if cyclic_reduce(self.letters) != self.letters:
            raise WordError("letters are not cyclically reduced")
        if canonical_rotation(self.letters) != self.letters:
            raise WordError("letters are not in canonical rotation")

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return format_letters(self.basis, self.letters)

    def __repr__(self) -> str:
        return f"CyclicWord({self})"

    def representative(self) -> Word:
        return Word(self.basis, self.letters)

    def inverse(self) -> "CyclicWord":
        return CyclicWord(self.basis, canonical_rotation(inverse_letters(self.letters)))

    def power(self, n: int) -> "CyclicWord":
        if n == 0:
            raise WordError("identity has no cyclic word")
        base = self.letters if n > 0 else inverse_letters(self.letters)
        return CyclicWord(self.basis, canonical_rotation(base * abs(n)))

    def rotations(self) -> Tuple[Letters, ...]:
        w = self.letters
        return tuple(w[i:] + w[:i] for i in range(len(w)))

    def sort_key(self):
        return word_sort_key(self.letters)


def cyclic_word(w) -> CyclicWord:
    """Cyclic reduction + canonical rotation of a Word (or CyclicWord)."""
    if isinstance(w, CyclicWord):
        return w
    core = cyclic_reduce(w.letters)
    if not core:
        raise WordError("identity element has no cyclic word")
    return CyclicWord(w.basis, canonical_rotation(core))


@dataclass(frozen=True)
class ConjugacyDecomposition:
    """w = conjugator * core * conjugator^-1 with core cyclically reduced.

    ``core`` keeps the rotation in which it sits inside w, so the
    recomposition is letter-exact; ``core_class`` is the conjugacy class.
    """

    conjugator: Word
    core: Word

    @property
    def core_class(self) -> CyclicWord:
        return cyclic_word(self.core)

    def recompose(self) -> Word:
        return self.conjugator * self.core * self.conjugator.inverse()


def cyclic_decompose(w: Word) -> ConjugacyDecomposition:
    """Peel matching end letters: w = v w' v^-1, w' cyclically reduced.

    >>> b3 = basis('abc')
    >>> d = cyclic_decompose(parse_word(b3, "b a b'"))
    >>> str(d.conjugator), str(d.core)
    ('b', 'a')
    """
    if not w:
        raise WordError("identity has no conjugacy decomposition")
    letters = w.letters
    i, j = 0, len(letters)
    while j - i >= 2 and letters[i] == -letters[j - 1]:
        i += 1
        j -= 1
    return ConjugacyDecomposition(
        Word(w.basis, letters[:i]), Word(w.basis, letters[i:j])
    )


# -- factor sets ------------------------------------------------------------


def subwords(w: Word, depth: int) -> frozenset:
    """All nonempty factors of w with length <= depth, plus inverses."""
    if depth < 1:
        raise WordError("depth must be >= 1")
    out = set()
    letters = w.letters
    for i in range(len(letters)):
        for l in range(1, min(depth, len(letters) - i) + 1):
            f = letters[i : i + l]
            out.add(f)
            out.add(inverse_letters(f))
    return frozenset(Word(w.basis, f) for f in out)


def periodic_factors(period: Sequence[int], depth: int) -> frozenset:
    """Factors (length <= depth) of the biinfinite periodic word, + inverses.

    ``period`` must be cyclically reduced and nonempty; the result equals
    the factor set of period**m for any m with m*|period| >= depth+|period|.
    """
    p = tuple(period)
    if not p:
        raise WordError("empty period")
    reps = depth // len(p) + 2
    big = p * reps
    out = set()
    for i in range(len(p)):
        for l in range(1, depth + 1):
            f = big[i : i + l]
            out.add(f)
            out.add(inverse_letters(f))
    return frozenset(out)


# -- rays -------------------------------------------------------------------


def _primitive_root(seq: Letters) -> Letters:
    n = len(seq)
    for d in range(1, n + 1):
        if n % d == 0 and seq[:d] * (n // d) == seq:
            return seq[:d]
    return seq


@dataclass(frozen=True)
class Ray:
    """Eventually periodic one-sided infinite reduced word  prefix·period^∞.

    Normal form (unique per boundary point): the period is primitive,
    cyclically reduced and in canonical rotation; the prefix is the shortest
    one compatible with that rotation.  Build through :func:`ray`.
    """

    prefix: Word
    period: Word

    def __post_init__(self):
        u, v = self.prefix.letters, self.period.letters
        if not v:
            raise WordError("ray period must be nonempty")
        if len(v) >= 2 and v[0] == -v[-1]:
            raise WordError("ray period must be cyclically reduced")
        if u and u[-1] == -v[0]:
            raise WordError("ray not reduced at prefix/period junction")

    @property
    def basis(self) -> Basis:
        return self.prefix.basis

    def __str__(self) -> str:
        return f"{self.prefix} · ({self.period})^∞"

    def __repr__(self) -> str:
        return f"Ray({self})"

    def letter(self, i: int) -> int:
        """0-based i-th letter of the infinite word."""
        u, v = self.prefix.letters, self.period.letters
        if i < len(u):
            return u[i]
        return v[(i - len(u)) % len(v)]

    def word_prefix(self, k: int) -> Word:
        """The length-k prefix X_k as a reduced word."""
        u, v = self.prefix.letters, self.period.letters
        if k <= len(u):
            return Word(self.basis, u[:k])
        extra = k - len(u)
        reps = extra // len(v) + 1
        return Word(self.basis, (u + v * reps)[:k])

    def drop(self, k: int) -> "Ray":
        """The ray obtained by deleting the first k letters."""
        u, v = self.prefix.letters, self.period.letters
        if k <= len(u):
            return ray(Word(self.basis, u[k:]), Word(self.basis, v))
        r = (k - len(u)) % len(v)
        return ray(identity(self.basis), Word(self.basis, v[r:] + v[:r]))

    def translate(self, g: Word) -> "Ray":
        return ray(g * self.prefix, self.period)

    def period_class(self) -> CyclicWord:
        return CyclicWord(self.basis, self.period.letters)


def ray(prefix: Word, period: Word) -> Ray:
    """Normalise (prefix, period) into the unique Ray normal form.

    >>> b3 = basis('abc')
    >>> r = ray(parse_word(b3, 'a'), parse_word(b3, "a' c a"))
    >>> str(r.prefix), str(r.period)
    ('1', 'c')
    """
    if prefix.basis != period.basis:
        raise WordError("basis mismatch")
    if not period:
        raise WordError("ray period must be nonempty")
    b = prefix.basis
    # cyclic part of the period; its conjugator is absorbed into the prefix
    dec = cyclic_decompose(period)
    u = list((prefix * dec.conjugator).letters)
    v = list(_primitive_root(dec.core.letters))
    # absorb junction cancellation (rule A) and periodic overlap (rule B);
    # at most one applies per step since v is cyclically reduced
    while u:
        if u[-1] == -v[0]:
            u.pop()
            v = v[1:] + v[:1]
        elif u[-1] == v[-1]:
            u.pop()
            v = v[-1:] + v[:-1]
        else:
            break
    # rotate the period into canonical position, extending the prefix
    canon = canonical_rotation(tuple(v))
    offset = next(
        i for i in range(len(v)) if tuple(v[i:] + v[:i]) == canon
    )
    u.extend(v[:offset])
    return Ray(Word(b, tuple(u)), Word(b, canon))


def parse_ray(b: Basis, prefix: str, period: str) -> Ray:
    return ray(parse_word(b, prefix), parse_word(b, period))


def ray_equal_words(r1: Ray, r2: Ray) -> bool:
    """Equality as infinite words (normal forms make this structural)."""
    return r1 == r2


def recurrent_factors(r: Ray, depth: int) -> frozenset:
    """Factors of the periodic tail only; the prefix never recurs."""
    return periodic_factors(r.period.letters, depth)


# -- leaves -----------------------------------------------------------------


def _common_prefix_length(r1: Ray, r2: Ray) -> int:
    p1, p2 = len(r1.period), len(r2.period)
    bound = (
        max(len(r1.prefix), len(r2.prefix))
        + math.lcm(p1, p2)
        + max(p1, p2)
    )
    for i in range(bound):
        if r1.letter(i) != r2.letter(i):
            return i
    return -1  # rays coincide


@dataclass(frozen=True)
class Leaf:
    """Ordered pair of distinct rays: a point of the double boundary."""

    left: Ray
    right: Ray

    def __post_init__(self):
        if self.left.basis != self.right.basis:
            raise WordError("basis mismatch")
        if _common_prefix_length(self.left, self.right) < 0:
            raise WordError("leaf rays must be distinct infinite words")

    @property
    def basis(self) -> Basis:
        return self.left.basis

    def flip(self) -> "Leaf":
        return Leaf(self.right, self.left)

    def cancelled_tails(self) -> Tuple[Ray, Ray]:
        """Both rays with their longest common prefix removed."""
        k = _common_prefix_length(self.left, self.right)
        return self.left.drop(k), self.right.drop(k)

    def central_window(self, k: int) -> Word:
        """Reduced word Y_k^-1 · Y'_k around the junction (length 2k)."""
        y, yp = self.cancelled_tails()
        return y.word_prefix(k).inverse() * yp.word_prefix(k)

    def window_factors(self, depth: int) -> frozenset:
        """All length-<=depth factors of the biinfinite junction word.

        The window is taken long enough that it exhausts every factor:
        both periodic tails are fully represented.
        """
        y, yp = self.cancelled_tails()
        k = max(len(y.prefix) + len(y.period), len(yp.prefix) + len(yp.period)) + depth
        window = self.central_window(k)
        out = set()
        letters = window.letters
        for i in range(len(letters)):
            for l in range(1, min(depth, len(letters) - i) + 1):
                f = letters[i : i + l]
                out.add(f)
                out.add(inverse_letters(f))
        return frozenset(out)


def leaf(left: Ray, right: Ray) -> Leaf:
    return Leaf(left, right)
