"""Limit trees of train-track automorphisms via rescaled iteration.

The length function is the fixed point of the rescaling relation
``len(map(w)) = growth * len(w)``: iterate the map, weight letters by the
left Perron-Frobenius eigenvector, divide by the growth rate, and stop on
a relative Cauchy criterion.  Results carry an explicit error field and an
``unconverged`` flag instead of silent truncation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .automorphisms import Automorphism, AutomorphismError
from .treemodels import TreeModel, ModelError
from .words import Basis, CyclicWord, Word, cyclic_reduce, free_reduce


class TrainTrackError(ValueError):
    pass


def transition_matrix(a: Automorphism) -> np.ndarray:
    """M[i][j] = occurrences of letter i (either sign) in the image of j."""
    if a.source != a.target:
        raise TrainTrackError("transition matrix needs a rose endomorphism")
    n = a.source.rank
    m = np.zeros((n, n), dtype=np.int64)
    for j in range(n):
        for x in a.images[j].letters:
            m[abs(x) - 1][j] += 1
    return m


def is_primitive(m: np.ndarray) -> bool:
    """Some power of m is strictly positive."""
    n = m.shape[0]
    if n == 0 or (m < 0).any():
        return False
    reach = (m > 0).astype(np.int8)
    acc = reach.copy()
    for _ in range((n - 1) ** 2 + 1):
        if acc.all():
            return True
        reach = (reach @ (m > 0)).astype(bool).astype(np.int8)
        acc = reach
    return bool(acc.all())


def pf_data(m: np.ndarray, tol: float = 1e-13, max_iter: int = 20000):
    """Dominant eigenvalue and positive left eigenvector (sum 1).

    Power iteration on the transpose; raises for non-primitive input.
    """
    m = np.asarray(m, dtype=float)
    if m.shape[0] != m.shape[1]:
        raise TrainTrackError("matrix must be square")
    if not is_primitive(m):
        raise TrainTrackError("matrix is not primitive")
    v = np.ones(m.shape[0])
    v /= v.sum()
    lam = 0.0
    for _ in range(max_iter):
        w = v @ m
        lam = w.sum()
        w /= lam
        if np.abs(w - v).max() < tol:
            v = w
            break
        v = w
    residual = np.abs(v @ m - lam * v).max()
    if residual > 1e-12:
        raise TrainTrackError(f"power iteration failed to converge: {residual}")
    return float(lam), v


@dataclass(frozen=True)
class TrainTrackSpec:
    """User-certified train-track data for a rose automorphism."""

    automorphism: Automorphism
    matrix: Tuple[Tuple[int, ...], ...] = ()
    certified_train_track: bool = True

    def __post_init__(self):
        recomputed = transition_matrix(self.automorphism)
        if self.matrix:
            given = np.array(self.matrix, dtype=np.int64)
            if given.shape != recomputed.shape or (given != recomputed).any():
                raise TrainTrackError("supplied matrix contradicts the images")
        else:
            object.__setattr__(
                self, "matrix", tuple(tuple(int(x) for x in row) for row in recomputed)
            )
        if not is_primitive(recomputed):
            raise TrainTrackError("transition matrix is not primitive")
        if not self.certified_train_track and not self.automorphism.is_positive:
            raise TrainTrackError(
                "train-track property must be certified for non-positive maps"
            )


@dataclass(frozen=True)
class LengthEstimate:
    value: float
    error: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class LimitTree(TreeModel):
    """Rescaled limit of a train-track rose; letters weighted by the
    Perron-Frobenius eigenvector (normalised to volume 1)."""

    spec: TrainTrackSpec
    k_max: int = 40
    tol: float = 1e-9
    max_letters: int = 2_000_000
    exact: bool = False
    model_id: str = "limit-tree"

    def __post_init__(self):
        lam, vec = pf_data(np.array(self.spec.matrix, dtype=float))
        object.__setattr__(self, "_lam", lam)
        object.__setattr__(self, "_vec", tuple(float(x) for x in vec))
        # scaling consistency: weight(map(e)) = growth * weight(e)
        for i in range(self.basis.rank):
            img = self.spec.automorphism.images[i]
            w = self._weight(img.letters)
            if abs(w - lam * self._vec[i]) > 1e-9 * max(w, 1.0):
                raise TrainTrackError("eigenvector does not rescale edge lengths")

    @property
    def basis(self) -> Basis:
        return self.spec.automorphism.source

    @property
    def growth(self) -> float:
        return self._lam

    @property
    def edge_weights(self) -> Tuple[float, ...]:
        return self._vec

    def _weight(self, letters: Sequence[int]) -> float:
        vec = self._vec
        return sum(vec[abs(x) - 1] for x in letters)

    def _iterate(self, letters, cyclic: bool) -> LengthEstimate:
        aut = self.spec.automorphism
        lam = self._lam
        reduce_fn = cyclic_reduce if cyclic else free_reduce
        cur = tuple(letters)
        prev = self._weight(cur)
        value, error = prev, 0.0
        for k in range(1, self.k_max + 1):
            cur = reduce_fn(aut.apply_letters(cur))
            value = self._weight(cur) / lam**k
            error = abs(value - prev)
            if error <= self.tol * max(abs(value), 1e-300):
                return LengthEstimate(value, error, True, k)
            prev = value
            if len(cur) > self.max_letters:
                break
        return LengthEstimate(value, error, False, self.k_max)

    def translation_length_estimate(self, w) -> LengthEstimate:
        cw = self._cyclic(w)
        return self._iterate(cw.letters, cyclic=True)

    def displacement_estimate(self, w: Word) -> LengthEstimate:
        if w.basis != self.basis:
            raise ModelError("word over wrong basis")
        if not w:
            return LengthEstimate(0.0, 0.0, True, 0)
        return self._iterate(w.letters, cyclic=False)

    def translation_length(self, w) -> float:
        return self.translation_length_estimate(w).value

    def displacement(self, w: Word) -> float:
        return self.displacement_estimate(w).value

    def bbt_bound(self) -> float:
        return sum(self._vec)


def limit_tree(a: Automorphism, matrix=None, k_max: int = 40,
               tol: float = 1e-9) -> LimitTree:
    spec = TrainTrackSpec(
        automorphism=a,
        matrix=tuple(tuple(int(x) for x in row) for row in matrix) if matrix else (),
    )
    return LimitTree(spec=spec, k_max=k_max, tol=tol)
