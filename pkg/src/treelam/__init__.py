"""Dual laminations of free group actions on real trees, at finite depth.

Three routes to the same language: factor languages of short conjugacy
classes, recurrent languages of bounded rays, and equal-limit boundary
pairs.  Exact rational models (marked metric graphs, one-edge splittings)
and numeric limit trees of train-track maps share one length-function
interface.
"""

__version__ = "0.1.0"

from .words import (
    Basis,
    CyclicWord,
    Leaf,
    Ray,
    Word,
    WordError,
    basis,
    cyclic_decompose,
    cyclic_word,
    identity,
    leaf,
    parse_ray,
    parse_word,
    ray,
    recurrent_factors,
    reduce_word,
    subwords,
)
from .automorphisms import (
    Automorphism,
    AutomorphismError,
    CancellationBound,
    automorphism,
    cancellation_bound,
    chop,
    chop_constants,
    compose,
    identity_automorphism,
    power,
)
from .treemodels import (
    MarkedMetricGraph,
    ModelError,
    SplittingTree,
    TreeModel,
    contract,
    pullback,
    rose,
    splitting,
)
from .limittree import (
    LimitTree,
    TrainTrackError,
    TrainTrackSpec,
    limit_tree,
    pf_data,
    transition_matrix,
)
from .enumeration import cyclic_words, rays, reduced_words
from .languages import (
    ChainBuild,
    Language,
    LanguageError,
    OmegaSet,
    act_on_language,
    build_bounded_concatenation,
    default_schedule,
    diagonal_closure,
    dual_language,
    enumerate_short,
    laminary_close,
    leaf_window_language,
    rational_language,
    ray_in_language,
    ray_union_language,
    recurrent_language,
    short_factor_language,
)
from .raylimits import (
    LimitPoint,
    OrbitVerdict,
    RayLimitError,
    TrapReport,
    bounded_orbit_test,
    group_by_limit,
    limit_distance,
    limit_pair_test,
    limit_point,
    same_limit,
    trap_check,
)
