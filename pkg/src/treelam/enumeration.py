"""Deterministic enumeration of reduced words, conjugacy classes and rays.

Enumeration order follows the global letter order, so repeated runs (and
sharded parallel runs, merged sorted) produce identical output.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator, Optional, Tuple

from .words import (
    Basis,
    CyclicWord,
    Ray,
    Word,
    canonical_rotation,
    identity,
    letter_key,
    ray,
    word_sort_key,
)


def reduced_words(b: Basis, max_len: int, include_identity: bool = True
                  ) -> Iterator[Word]:
    """All reduced words of length <= max_len, shortlex order."""
    if include_identity:
        yield identity(b)
    letters = sorted(b.letters(), key=letter_key)
    level = [(x,) for x in letters]
    for _ in range(max_len):
        nxt = []
        for w in level:
            yield Word(b, w)
            nxt.extend(w + (x,) for x in letters if x != -w[-1])
        level = nxt


def _canonical_cyclic_tuples(b: Basis, max_len: int) -> Tuple[Tuple[int, ...], ...]:
    letters = sorted(b.letters(), key=letter_key)
    found = []

    def extend(w):
        if len(w) < max_len:
            first_key = letter_key(w[0])
            for x in letters:
                if x == -w[-1]:
                    continue
                # canonical rotations start with a letter of minimal key
                if letter_key(x) < first_key:
                    continue
                nw = w + (x,)
                if nw[0] != -nw[-1] and canonical_rotation(nw) == nw:
                    found.append(nw)
                extend(nw)

    for x in letters:
        found.append((x,))
        extend((x,))
    found.sort(key=word_sort_key)
    return tuple(found)


@lru_cache(maxsize=32)
def _cached_cyclic(symbols: Tuple[str, ...], name: str, max_len: int):
    return _canonical_cyclic_tuples(Basis(name, symbols), max_len)


def cyclic_words(b: Basis, max_len: int) -> Tuple[CyclicWord, ...]:
    """Every conjugacy-class representative of length <= max_len."""
    tuples = _cached_cyclic(b.symbols, b.name, max_len)
    return tuple(CyclicWord(b, t) for t in tuples)


def rays(
    b: Basis,
    prefix_cap: int,
    period_cap: int,
    period_filter=None,
) -> Iterator[Ray]:
    """All normalised rays with |prefix| <= prefix_cap, |period| <= period_cap.

    ``period_filter`` (on the CyclicWord class of the period) prunes the
    period enumeration before prefixes are attached.
    """
    periods = []
    for cw in cyclic_words(b, period_cap):
        if period_filter is not None and not period_filter(cw):
            continue
        periods.append(cw)
    seen = set()
    for prefix in reduced_words(b, prefix_cap):
        for cw in periods:
            for rot in {cw.letters[i:] + cw.letters[:i] for i in range(len(cw))}:
                r = ray(prefix, Word(b, rot))
                if len(r.prefix) <= prefix_cap and r not in seen:
                    seen.add(r)
                    yield r
