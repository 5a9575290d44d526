"""Depth-bounded laminary languages and the dual language of a tree action.

A language here is a finite shadow of a lamination: an inverse-closed,
factor-closed set of reduced words of length <= depth in which every
shorter word extends to a full-depth word.  All set semantics are
deterministic (canonical word order, frozen sets).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .automorphisms import Automorphism, AutomorphismError, chop
from .enumeration import cyclic_words
from .treemodels import TreeModel
from .words import (
    Basis,
    CyclicWord,
    Leaf,
    Letters,
    Ray,
    Word,
    WordError,
    canonical_rotation,
    cyclic_word,
    inverse_letters,
    periodic_factors,
    recurrent_factors,
    word_sort_key,
)


class LanguageError(ValueError):
    pass


@dataclass(frozen=True)
class Language:
    """Laminary language at finite depth.

    words are stored as letter tuples; provenance records construction
    parameters and soundness flags (stabilized / complete / warnings).
    """

    basis: Basis
    depth: int
    words: FrozenSet[Letters]
    provenance: Tuple[Tuple[str, object], ...] = ()

    def __post_init__(self):
        if self.depth < 1:
            raise LanguageError("depth must be >= 1")

    @property
    def provenance_dict(self) -> Dict[str, object]:
        return dict(self.provenance)

    def flags(self) -> List[str]:
        out = []
        for key, value in self.provenance:
            if key in ("unstabilized", "incomplete", "undercount_warning") and value:
                out.append(key)
        return out

    def __contains__(self, w) -> bool:
        letters = w.letters if isinstance(w, (Word, CyclicWord)) else tuple(w)
        return letters in self.words

    def __len__(self) -> int:
        return len(self.words)

    def __le__(self, other: "Language") -> bool:
        return self.words <= other.words

    def same_words(self, other: "Language") -> bool:
        return self.words == other.words

    def sorted_words(self) -> List[Letters]:
        return sorted(self.words, key=word_sort_key)

    def as_words(self) -> List[Word]:
        return [Word(self.basis, t) for t in self.sorted_words()]

    def restrict(self, depth: int) -> "Language":
        if depth >= self.depth:
            return self
        kept = frozenset(w for w in self.words if len(w) <= depth)
        return Language(self.basis, depth, kept,
                        self.provenance + (("restricted_from", self.depth),))

    def validate(self) -> None:
        """Re-check the three laminary conditions at this depth."""
        full = set()
        for w in self.words:
            if len(w) > self.depth:
                raise LanguageError("word longer than depth")
            if inverse_letters(w) not in self.words:
                raise LanguageError(f"not inverse-closed at {w}")
            if len(w) == self.depth:
                full.add(w)
        extendable = set()
        for w in full:
            for i in range(len(w)):
                for l in range(1, len(w) - i + 1):
                    extendable.add(w[i : i + l])
        for w in self.words:
            for i in range(len(w)):
                for l in range(1, len(w) - i + 1):
                    if w[i : i + l] not in self.words:
                        raise LanguageError(f"not factor-closed at {w}")
            if self.words and full and len(w) < self.depth and w not in extendable:
                raise LanguageError(f"word {w} does not extend to full depth")


def laminary_close(
    basis: Basis,
    depth: int,
    seeds: Iterable[Letters],
    provenance: Dict[str, object],
) -> Language:
    """Inverse- and factor-close, then prune words that never extend to a
    full-depth word.  The effective depth shrinks to the longest surviving
    word (recorded in provenance when it differs)."""
    closed = set()
    for w in seeds:
        w = tuple(w)
        for i in range(len(w)):
            for l in range(1, min(depth, len(w) - i) + 1):
                f = w[i : i + l]
                closed.add(f)
                closed.add(inverse_letters(f))
    eff = max((len(w) for w in closed), default=depth)
    if eff < depth:
        provenance = dict(provenance)
        provenance["requested_depth"] = depth
        depth = eff
    full = {w for w in closed if len(w) == depth}
    extendable = set()
    for w in full:
        for i in range(len(w)):
            for l in range(1, len(w) - i + 1):
                extendable.add(w[i : i + l])
    kept = frozenset(w for w in closed if len(w) == depth or w in extendable)
    lang = Language(basis, depth, kept, tuple(sorted(provenance.items(), key=lambda kv: kv[0])))
    lang.validate()
    return lang


def empty_language(basis: Basis, depth: int, provenance=None) -> Language:
    prov = dict(provenance or {})
    return Language(basis, depth, frozenset(),
                    tuple(sorted(prov.items(), key=lambda kv: kv[0])))


# -- basic constructions ----------------------------------------------------


def rational_language(w, depth: int) -> Language:
    """Factors of the biinfinite periodic word over w, plus inverses."""
    cw = cyclic_word(w) if isinstance(w, Word) else w
    words = periodic_factors(cw.letters, depth)
    return laminary_close(
        cw.basis, depth, words,
        {"construction": "rational", "word": str(cw)},
    )


def recurrent_language(r: Ray, depth: int) -> Language:
    """Recurrent factors of a ray: exactly the periodic-tail factors."""
    return laminary_close(
        r.basis, depth, recurrent_factors(r, depth),
        {"construction": "recurrent", "period": str(r.period)},
    )


def ray_union_language(rays: Sequence[Ray], depth: int,
                       note: Optional[str] = None) -> Language:
    """Union of recurrent languages over a family of rays (bounded-orbit
    language of the family)."""
    rays = list(rays)
    if not rays:
        raise LanguageError("ray family must be nonempty")
    seeds = set()
    for r in rays:
        seeds |= recurrent_factors(r, depth)
    return laminary_close(
        rays[0].basis, depth, seeds,
        {"construction": "ray-union", "rays": len(rays), "note": note or ""},
    )


# -- short-element sets -----------------------------------------------------


@dataclass(frozen=True)
class OmegaSet:
    """Conjugacy classes with translation length below a threshold.

    ``lengths`` stores the computed translation length per element so a
    smaller threshold can be re-filtered without re-enumeration.
    """

    basis: Basis
    epsilon: Fraction
    length_cap: int
    elements: Tuple[Letters, ...]
    lengths: Tuple[object, ...]
    complete: bool = True
    method: str = "exhaustive"
    model_id: str = ""

    def __len__(self) -> int:
        return len(self.elements)

    def element_words(self) -> List[CyclicWord]:
        return [CyclicWord(self.basis, t) for t in self.elements]

    def as_set(self) -> FrozenSet[Letters]:
        return frozenset(self.elements)

    def refilter(self, epsilon) -> "OmegaSet":
        if epsilon > self.epsilon:
            raise LanguageError("can only shrink the threshold")
        keep = [(w, l) for w, l in zip(self.elements, self.lengths) if l < epsilon]
        return OmegaSet(
            self.basis, epsilon, self.length_cap,
            tuple(w for w, _ in keep), tuple(l for _, l in keep),
            self.complete, self.method, self.model_id,
        )

    def verify(self, model: TreeModel) -> bool:
        """Re-check the defining predicate and closure under inversion."""
        elements = set(self.elements)
        for t in self.elements:
            if canonical_rotation(inverse_letters(t)) not in elements:
                return False
            if not model.exact:
                continue
            if model.translation_length(CyclicWord(self.basis, t)) >= self.epsilon:
                return False
        return True


def _eval_lengths(payload):
    model, chunk = payload
    b = model.basis
    return [model.translation_length(CyclicWord(b, t)) for t in chunk]


def enumerate_short(
    model: TreeModel,
    epsilon,
    length_cap: int,
    inverse_orbit_threshold: int = 12,
    seed_cap: int = 2,
    jobs: int = 1,
) -> OmegaSet:
    """All canonical conjugacy classes of length <= cap with translation
    length < epsilon (limit trees: < epsilon - error, conservatively).

    Exact models are enumerated exhaustively.  Limit trees beyond the
    exhaustive threshold use inverse-map orbits of short seeds; that
    misses nothing at desk scale (cross-checked against exhaustion at
    small caps in the test suite) but is flagged ``inverse-orbit``.
    """
    if length_cap < 1:
        raise LanguageError("length cap must be >= 1")
    b = model.basis
    if model.exact:
        eps = epsilon if isinstance(epsilon, Fraction) else Fraction(epsilon).limit_denominator(10**12)
        candidates = [cw.letters for cw in cyclic_words(b, length_cap)]
        if jobs > 1 and len(candidates) > 4 * jobs:
            import multiprocessing

            size = -(-len(candidates) // jobs)
            chunks = [candidates[i : i + size] for i in range(0, len(candidates), size)]
            with multiprocessing.Pool(jobs) as pool:
                parts = pool.map(_eval_lengths, [(model, c) for c in chunks])
            values = [l for part in parts for l in part]
        else:
            values = _eval_lengths((model, candidates))
        elements, lengths = [], []
        for t, l in zip(candidates, values):
            if l < eps:
                elements.append(t)
                lengths.append(l)
        return OmegaSet(b, eps, length_cap, tuple(elements), tuple(lengths),
                        True, "exhaustive", model.model_id)

    eps = float(epsilon)
    if length_cap <= inverse_orbit_threshold:
        candidates = [cw.letters for cw in cyclic_words(b, length_cap)]
        method, complete = "exhaustive", True
    else:
        aut = model.spec.automorphism
        if not aut.invertible:
            raise LanguageError("inverse-orbit enumeration needs an invertible map")
        inv = aut.inverse()
        seen = set()
        for seed in cyclic_words(b, seed_cap):
            w = seed.letters
            for k in range(0, 4 * length_cap):
                if k > 0:
                    w = canonical_rotation(
                        _cyclic_reduce_tuple(inv.apply_letters(w))
                    )
                else:
                    w = canonical_rotation(w)
                if not w:
                    break
                if len(w) <= length_cap:
                    seen.add(w)
                elif k > 0:
                    break
        candidates = sorted(seen, key=word_sort_key)
        method, complete = "inverse-orbit", False
    elements, lengths = [], []
    for t in candidates:
        est = model.translation_length_estimate(CyclicWord(b, t))
        if est.converged and est.value < eps - est.error:
            elements.append(t)
            lengths.append(est.value)
    return OmegaSet(b, eps, length_cap, tuple(elements), tuple(lengths),
                    complete, method, model.model_id)


def _cyclic_reduce_tuple(t: Letters) -> Letters:
    w = list(t)
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


# -- dual language ----------------------------------------------------------


def short_factor_language(
    model: TreeModel, epsilon, depth: int, length_cap: int,
    omega: Optional[OmegaSet] = None,
) -> Language:
    """Factors (to the given depth) of periodic words over all short
    elements.  Warns in provenance when the cap risks undercounting."""
    omega = omega.refilter(epsilon) if omega is not None else enumerate_short(
        model, epsilon, length_cap
    )
    prov: Dict[str, object] = {
        "construction": "short-factors",
        "epsilon": str(epsilon),
        "length_cap": length_cap,
        "omega_size": len(omega),
    }
    if length_cap < 2 * depth:
        prov["undercount_warning"] = True
    if not omega.complete:
        prov["incomplete"] = True
        prov["method"] = omega.method
    if not omega.elements:
        prov["note"] = "free simplicial at this threshold"
        return empty_language(model.basis, depth, prov)
    seeds = set()
    for t in omega.elements:
        seeds |= periodic_factors(t, depth)
    return laminary_close(model.basis, depth, seeds, prov)


def dual_language(
    model: TreeModel,
    depth: int,
    schedule: Sequence,
    length_cap: int,
) -> Language:
    """Intersection of short-factor languages along a decreasing schedule.

    Stabilization of consecutive steps is the finite proxy for the full
    intersection; a non-stabilized chain is returned flagged, not hidden.
    """
    schedule = list(schedule)
    if not schedule:
        raise LanguageError("schedule must be nonempty")
    if any(e <= 0 for e in schedule):
        raise LanguageError("schedule must be positive")
    if any(not (schedule[i] > schedule[i + 1]) for i in range(len(schedule) - 1)):
        raise LanguageError("schedule must be strictly decreasing")
    omega = enumerate_short(model, schedule[0], length_cap)
    langs = [
        short_factor_language(model, e, depth, length_cap, omega=omega)
        for e in schedule
    ]
    words = langs[0].words
    for l in langs[1:]:
        words = words & l.words
    stabilized = any(
        langs[i].words == langs[i + 1].words for i in range(len(langs) - 1)
    )
    prov: Dict[str, object] = {
        "construction": "dual-language",
        "schedule": [str(e) for e in schedule],
        "length_cap": length_cap,
        "sizes": [len(l) for l in langs],
        "stabilized": stabilized,
    }
    if not stabilized:
        prov["unstabilized"] = True
    if length_cap < 2 * depth:
        prov["undercount_warning"] = True
    if any("incomplete" in l.provenance_dict for l in langs):
        prov["incomplete"] = True
        prov["method"] = omega.method
    if not words:
        return empty_language(model.basis, depth, prov)
    return laminary_close(model.basis, depth, words, prov)


def default_schedule(model: TreeModel, length_cap: int, steps: int = 3):
    """Three geometric steps below the smallest positive length at cap
    (exact models) or growth-rate powers (limit trees)."""
    if model.exact:
        positive = [
            model.translation_length(cw)
            for cw in cyclic_words(model.basis, min(length_cap, 6))
        ]
        positive = [l for l in positive if l > 0]
        floor = min(positive) if positive else Fraction(1)
        return [floor * Fraction(2, 2 ** (i + 1)) for i in range(steps)]
    lam = model.growth
    return [lam ** (-2 * (i + 2)) for i in range(steps)]


# -- action on languages ----------------------------------------------------


def act_on_language(a: Automorphism, lang: Language, chop_bound: int) -> Language:
    """Image of a language under the inverse map, chopped at the junctions
    and re-closed at reduced depth."""
    if not a.invertible:
        raise AutomorphismError("language action needs an invertible map")
    if chop_bound >= lang.depth:
        raise LanguageError("chop bound must be smaller than the depth")
    inv = a.inverse()
    new_depth = max(1, lang.depth - 2 * chop_bound)
    seeds = set()
    for t in lang.words:
        img = chop(inv.apply(Word(lang.basis, t)), chop_bound)
        if img:
            seeds.add(img.letters)
    prov = {
        "construction": "act",
        "chop": chop_bound,
        "base": dict(lang.provenance).get("construction", "?"),
    }
    if not seeds:
        return empty_language(lang.basis, new_depth, prov)
    return laminary_close(lang.basis, new_depth, seeds, prov)


def ray_in_language(r: Ray, lang: Language) -> bool:
    """Whether the recurrent language of the ray sits inside ``lang``."""
    return recurrent_factors(r, lang.depth) <= lang.words


# -- diagonal closure -------------------------------------------------------


def diagonal_closure(leaves: Iterable[Leaf]) -> FrozenSet[Leaf]:
    """Flip- and transitivity-closure of a set of boundary pairs."""
    current = set()
    for l in leaves:
        current.add(l)
        current.add(l.flip())
    changed = True
    while changed:
        changed = False
        by_left: Dict[Ray, set] = {}
        for l in current:
            by_left.setdefault(l.left, set()).add(l.right)
        new = set()
        for l in current:
            for z in by_left.get(l.right, ()):
                if z != l.left:
                    cand = Leaf(l.left, z)
                    if cand not in current:
                        new.add(cand)
                        new.add(cand.flip())
        if new:
            current |= new
            changed = True
    return frozenset(current)


def leaf_window_language(leaves: Iterable[Leaf], depth: int,
                         basis: Basis) -> Language:
    """Union of the junction-window factor languages of a leaf family."""
    seeds = set()
    for l in leaves:
        seeds |= l.window_factors(depth)
    prov = {"construction": "leaf-windows", "depth": depth}
    if not seeds:
        return empty_language(basis, depth, prov)
    return laminary_close(basis, depth, seeds, prov)


# -- bounded concatenations (chain construction) ----------------------------


@dataclass(frozen=True)
class ChainJunction:
    cancelled: int
    conj_left: int
    conj_right: int

    @property
    def ok(self) -> bool:
        return self.cancelled <= min(self.conj_left, self.conj_right)


@dataclass(frozen=True)
class ChainBuild:
    """Certificate for a cancellation-controlled infinite concatenation."""

    case: str
    indices: Tuple[int, ...]
    signs: Tuple[int, ...]
    junctions: Tuple[ChainJunction, ...]
    concatenation: Word

    @property
    def ok(self) -> bool:
        return all(j.ok for j in self.junctions)


def _conj_length(w: Word) -> int:
    from .words import cyclic_decompose

    return len(cyclic_decompose(w).conjugator)


def _cancellation(u: Word, v: Word) -> int:
    return (len(u) + len(v) - len(u * v)) // 2


def build_bounded_concatenation(
    seeds: Sequence[Word], max_terms: Optional[int] = None
) -> ChainBuild:
    """Select a subsequence and signs so each junction cancels no more
    than the conjugating parts of its two factors.

    Three regimes, as in the underlying combinatorial lemma: all-cyclically-
    reduced (avoid cancellation outright), repeated conjugator (work on the
    cores), strictly increasing conjugators (inductive sign flips).
    """
    seeds = [s for s in seeds if s]
    if not seeds:
        raise LanguageError("seeds must be nonempty, nontrivial words")
    if max_terms is not None:
        seeds = seeds[:max_terms]

    conj_lens = [_conj_length(s) for s in seeds]
    cyc_idx = [i for i, c in enumerate(conj_lens) if c == 0]
    if len(cyc_idx) >= max(2, len(seeds) // 2) or len(seeds) == 1:
        case = "cyclically-reduced"
        chosen = cyc_idx if cyc_idx else list(range(len(seeds)))
    else:
        groups: Dict[Letters, list] = {}
        for i, s in enumerate(seeds):
            from .words import cyclic_decompose

            groups.setdefault(cyclic_decompose(s).conjugator.letters, []).append(i)
        best = max(groups.values(), key=len)
        if len(best) >= max(2, len(seeds) // 3):
            case = "constant-conjugator"
            chosen = best
        else:
            case = "increasing-conjugator"
            chosen = []
            last = -1
            order = sorted(range(len(seeds)), key=lambda i: (conj_lens[i], i))
            for i in order:
                if conj_lens[i] > last:
                    chosen.append(i)
                    last = conj_lens[i]
            chosen.sort()

    words: List[Word] = []
    signs: List[int] = []
    for i in chosen:
        cand = seeds[i]
        if not words:
            words.append(cand)
            signs.append(1)
            continue
        prev = words[-1]
        if case == "increasing-conjugator":
            # flip the previous factor if the junction eats past its
            # conjugating part; earlier junctions only ever touched the
            # conjugator prefix, which flipping preserves
            if _cancellation(prev, cand) > _conj_length(prev):
                words[-1] = prev.inverse()
                signs[-1] = -signs[-1]
                prev = words[-1]
            words.append(cand)
            signs.append(1)
            continue
        # cyclically-reduced / constant-conjugator: one sign keeps the
        # cores from cancelling at all
        limit = min(_conj_length(prev), _conj_length(cand))
        if _cancellation(prev, cand) <= limit:
            words.append(cand)
            signs.append(1)
        else:
            words.append(cand.inverse())
            signs.append(-1)

    junctions = []
    total = words[0]
    for left, right in zip(words, words[1:]):
        junctions.append(
            ChainJunction(
                _cancellation(left, right),
                _conj_length(left),
                _conj_length(right),
            )
        )
        total = total * right
    return ChainBuild(
        case=case,
        indices=tuple(chosen),
        signs=tuple(signs),
        junctions=tuple(junctions),
        concatenation=total,
    )
