"""Bounded-orbit rays and their limit points in exact tree models.

A ray prefix sequence either stays in a bounded region (its period is
elliptic) or marches off linearly.  Bounded rays determine a limit point
of the metric completion; everything about those points (depth from the
basepoint, equality of two limits, trap bounds) reduces to Gromov
products of prefix orbits, i.e. to exact displacement arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .treemodels import TreeModel, ModelError
from .words import Basis, CyclicWord, Leaf, Ray, Word


class RayLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OrbitVerdict:
    """Outcome of the bounded-orbit test with a re-checkable witness."""

    member: bool
    exactness: str  # "exact" | "numeric"
    sup_displacement: Optional[object] = None
    certificate: Optional[Tuple[int, int, object]] = None  # (k, l, distance)


def bounded_orbit_test(r: Ray, model: TreeModel) -> OrbitVerdict:
    """Member iff the period is elliptic; witnesses are explicit.

    Non-members carry a divergence certificate (k, l, distance) with the
    distance re-computable as a displacement.
    """
    period = r.period_class()
    if model.exact:
        tl = model.translation_length(period)
        if tl == 0:
            return OrbitVerdict(True, "exact",
                                sup_displacement=_sup_displacement(r, model))
        bbt = model.bbt_bound()
        m = int(math.ceil(float((2 * bbt + 1) / tl)))
        k = len(r.prefix)
        l = k + m * len(r.period)
        gap = r.word_prefix(k).inverse() * r.word_prefix(l)
        distance = model.displacement(gap)
        return OrbitVerdict(False, "exact", certificate=(k, l, distance))
    est = model.translation_length_estimate(period)
    threshold = 10 * model.tol * model.bbt_bound()
    if est.value < threshold:
        return OrbitVerdict(True, "numeric",
                            sup_displacement=_sup_displacement(r, model))
    m = max(1, int(math.ceil((2 * model.bbt_bound() + 1) / max(est.value, 1e-12))))
    k = len(r.prefix)
    l = k + m * len(r.period)
    gap = r.word_prefix(k).inverse() * r.word_prefix(l)
    return OrbitVerdict(False, "numeric", certificate=(k, l, model.displacement(gap)))


def _sup_displacement(r: Ray, model: TreeModel):
    p = len(r.period)
    horizon = len(r.prefix) + 4 * p
    return max(model.displacement(r.word_prefix(k)) for k in range(horizon + 1))


# -- Gromov products of prefix orbits ---------------------------------------


def _gromov(model: TreeModel, u: Word, v: Word):
    du = model.displacement(u)
    dv = model.displacement(v)
    duv = model.displacement(u.inverse() * v)
    return (du + dv - duv) / 2


def _window_min(model, ray_a: Ray, ray_b: Ray, start_a: int, start_b: int,
                count_a: int, count_b: int, cross_only: bool):
    pa = [ray_a.word_prefix(k) for k in range(start_a, start_a + count_a)]
    pb = [ray_b.word_prefix(k) for k in range(start_b, start_b + count_b)]
    best = None
    for i, u in enumerate(pa):
        for j, v in enumerate(pb):
            if not cross_only and j <= i:
                continue
            g = _gromov(model, u, v)
            if best is None or g < best:
                best = g
    return best


def _stable_value(fn, shifts, label: str):
    """Evaluate fn at successive shifts until two consecutive agree."""
    prev = None
    for s in shifts:
        cur = fn(s)
        if prev is not None and cur == prev:
            return cur
        prev = cur
    raise RayLimitError(f"window did not stabilise for {label}")


def limit_depth(r: Ray, model: TreeModel):
    """Distance d(P, Q) from the basepoint to the limit point of r.

    Computed as the stable branch depth of the prefix-orbit geodesics:
    min of pairwise Gromov products over a late window, verified stable
    under shifting the window by whole periods.
    """
    if not model.exact:
        raise RayLimitError("limit points are exact-model only")
    p = len(r.period)
    base = len(r.prefix) + 2 * p
    count = 2 * p + 1

    def at(shift):
        s = base + shift * p
        return _window_min(model, r, r, s, s, count, count, cross_only=False)

    return _stable_value(at, range(8), "limit depth")


@dataclass(frozen=True)
class LimitPoint:
    """Symbolic limit point: translate * (projection to Fix of period).

    The ray normal form already absorbs the period's conjugator into the
    translate and rotates the period canonically.
    """

    translate: Word
    elliptic: CyclicWord
    model_id: str
    ray: Ray
    depth: object  # d(P, point), exact rational

    def __str__(self) -> str:
        return f"{self.translate} * Fix({self.elliptic})"


def limit_point(r: Ray, model: TreeModel) -> LimitPoint:
    if not model.exact:
        raise RayLimitError("limit points are exact-model only")
    verdict = bounded_orbit_test(r, model)
    if not verdict.member:
        raise RayLimitError("ray is not in the bounded-orbit set")
    return LimitPoint(
        translate=r.prefix,
        elliptic=r.period_class(),
        model_id=model.model_id,
        ray=r,
        depth=limit_depth(r, model),
    )


def _cross_branch(model, ra: Ray, rb: Ray):
    pa, pb = len(ra.period), len(rb.period)
    base_a = len(ra.prefix) + 2 * pa
    base_b = len(rb.prefix) + 2 * pb

    def at(shift):
        return _window_min(
            model, ra, rb,
            base_a + shift * pa, base_b + shift * pb,
            2 * pa + 1, 2 * pb + 1,
            cross_only=True,
        )

    return _stable_value(at, range(8), "cross branch")


def limit_distance(p: LimitPoint, q: LimitPoint, model: TreeModel):
    """Exact distance between two limit points."""
    if p.model_id != q.model_id:
        raise RayLimitError("limit points live on different models")
    if p.ray == q.ray:
        return Fraction(0)
    branch = _cross_branch(model, p.ray, q.ray)
    meet = min(branch, p.depth, q.depth)
    return p.depth + q.depth - 2 * meet


def same_limit(p: LimitPoint, q: LimitPoint, model: TreeModel) -> bool:
    return limit_distance(p, q, model) == 0


def limit_pair_test(leaf: Leaf, model: TreeModel, depth: int = 4,
                    language=None) -> bool:
    """Do both rays converge and to the same point?

    Exact models answer exactly.  Limit trees fall back to the language
    criterion: every junction-window factor of the leaf must lie in the
    supplied dual language (computed at ``depth`` if not given).
    """
    if model.exact:
        va = bounded_orbit_test(leaf.left, model)
        vb = bounded_orbit_test(leaf.right, model)
        if not (va.member and vb.member):
            return False
        return same_limit(
            limit_point(leaf.left, model), limit_point(leaf.right, model), model
        )
    if language is None:
        from .languages import default_schedule, dual_language

        language = dual_language(
            model, depth, default_schedule(model, 40), length_cap=40
        )
    return leaf.window_factors(language.depth) <= language.words


# -- trap bound --------------------------------------------------------------


@dataclass(frozen=True)
class TrapReport:
    bound: object
    distances: Tuple[Tuple[int, object], ...]
    stabilization_index: Optional[int]
    max_ratio: float

    @property
    def passed(self) -> bool:
        return self.stabilization_index is not None


def trap_check(r: Ray, model: TreeModel, k_range: Sequence[int]) -> TrapReport:
    """Check d(X_k P, Q) <= 3 * bbt_bound from some index on."""
    point = limit_point(r, model)
    rdepth = point.depth
    p = len(r.period)
    base = len(r.prefix) + 2 * p
    bound = 3 * model.bbt_bound()
    rows = []
    for k in k_range:
        dk = model.displacement(r.word_prefix(k))

        def at(shift):
            s = base + shift * p
            return _window_min(model, r, r, k, s, 1, 2 * p + 1, cross_only=True)

        branch = _stable_value(at, range(8), "trap branch")
        dist = dk + rdepth - 2 * min(branch, rdepth)
        rows.append((k, dist))
    stab = None
    for i, (k, dist) in enumerate(rows):
        if all(d <= bound for _, d in rows[i:]):
            stab = k
            break
    ratios = [float(d) / float(bound) for _, d in rows if bound > 0]
    return TrapReport(
        bound=bound,
        distances=tuple(rows),
        stabilization_index=stab,
        max_ratio=max(ratios) if ratios else 0.0,
    )


# -- grouping rays by their limit point --------------------------------------


def limit_point_key(point: LimitPoint, model: TreeModel,
                    frame: Optional[Sequence[Word]] = None) -> tuple:
    """Distances from the limit point to a fixed frame of orbit points.

    Equal points give equal keys, so keys are a sound pre-partition for
    exact equality grouping.
    """
    r = point.ray
    p = len(r.period)
    base = len(r.prefix) + 2 * p
    if frame is None:
        b = model.basis
        frame = [Word(b, ())] + [Word(b, (i + 1,)) for i in range(b.rank)] \
            + [Word(b, (-(i + 1),)) for i in range(b.rank)]
    key = []
    for g in frame:
        dg = model.displacement(g)

        def at(shift):
            s = base + shift * p
            vals = [
                _gromov(model, g, r.word_prefix(k))
                for k in range(s, s + 2 * p + 1)
            ]
            return min(vals)

        branch = _stable_value(at, range(8), "key branch")
        key.append(dg + point.depth - 2 * min(branch, point.depth))
    return tuple(key)


def group_by_limit(rays: Iterable[Ray], model: TreeModel) -> List[List[LimitPoint]]:
    """Partition bounded rays into classes with equal limit points.

    Key bucketing first, then exact pairwise verification inside buckets.
    """
    buckets: Dict[tuple, List[List[LimitPoint]]] = {}
    for r in rays:
        pt = limit_point(r, model)
        key = limit_point_key(pt, model)
        classes = buckets.setdefault(key, [])
        for cls in classes:
            if same_limit(cls[0], pt, model):
                cls.append(pt)
                break
        else:
            classes.append([pt])
    out: List[List[LimitPoint]] = []
    for classes in buckets.values():
        out.extend(classes)
    return out
