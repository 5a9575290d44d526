"""File formats: words, automorphisms, models, rays, languages, reports.

All emitted JSON is canonical: sorted keys, two-space indent, floats at 12
significant digits, exact rationals as "p/q" strings.  Identical inputs
produce byte-identical documents.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Dict, Optional, Union

from . import __version__
from .automorphisms import Automorphism, automorphism
from .languages import Language, OmegaSet
from .limittree import LimitTree, limit_tree
from .treemodels import (
    Edge,
    MarkedMetricGraph,
    SplittingTree,
    TreeModel,
    _parse_length,
    pullback,
    splitting,
)
from .words import Basis, Leaf, Ray, Word, basis, parse_ray, parse_word


class FormatError(ValueError):
    pass


# -- canonical JSON ----------------------------------------------------------


def _canonical(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else str(obj.numerator)
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_canonical(v) for v in obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_canonical(obj), sort_keys=True, indent=2,
                      ensure_ascii=False) + "\n"


def report_document(command: str, params: Dict, body: Dict,
                    flags=()) -> Dict:
    return {
        "command": command,
        "params": _canonical(params),
        "flags": sorted(flags),
        "library": {"name": "treelam", "version": __version__},
        "result": _canonical(body),
    }


# -- loaders -----------------------------------------------------------------


def _as_dict(source) -> Dict:
    if isinstance(source, dict):
        return source
    text = Path(source).read_text()
    return json.loads(text)


def load_basis(data) -> Basis:
    if isinstance(data, Basis):
        return data
    return basis(data)


def load_word(data: Dict) -> Word:
    b = load_basis(data["basis"])
    return parse_word(b, data["word"])


def load_automorphism(source) -> Automorphism:
    data = _as_dict(source)
    src = load_basis(data["source"])
    tgt = load_basis(data.get("target", data["source"]))
    return automorphism(
        src,
        images=data["images"],
        inverse_images=data.get("inverse_images"),
        target=tgt,
    )


def dump_automorphism(a: Automorphism) -> Dict:
    out = {
        "source": "".join(a.source.symbols),
        "target": "".join(a.target.symbols),
        "images": {
            a.source.symbols[i]: str(im) for i, im in enumerate(a.images)
        },
    }
    if a.inverse_images is not None:
        out["inverse_images"] = {
            a.target.symbols[i]: str(im)
            for i, im in enumerate(a.inverse_images)
        }
    return out


def load_marked_graph(data: Dict) -> MarkedMetricGraph:
    b = load_basis(data.get("basis", "".join(sorted(data["marking"].keys()))))
    vertices = tuple(data["vertices"])
    edges = []
    index = {}
    for e in data["edges"]:
        index[e["id"]] = len(edges) + 1
        edges.append(Edge(e["id"], e["from"], e["to"], _parse_length(e["length"])))
    marking = {}
    for sym, path in data["marking"].items():
        letter = b.encode(sym)
        tokens = []
        for token in path:
            inv = token.endswith("'")
            eid = token[:-1] if inv else token
            if eid not in index:
                raise FormatError(f"marking refers to unknown edge {eid!r}")
            tokens.append(-index[eid] if inv else index[eid])
        marking[letter] = tuple(tokens)
    return MarkedMetricGraph(
        basis=b, vertices=vertices, edges=tuple(edges),
        marking=marking, base=data["base"],
        model_id=data.get("name", "marked-graph"),
    )


def load_splitting(data: Dict) -> SplittingTree:
    b = load_basis(data.get("basis", data["side1"] + data["side2"][1:]))
    return splitting(
        b,
        side1=data["side1"],
        side2=data["side2"],
        shared=data["shared"],
        edge_length=data.get("edge_length", 1),
        basepoint_side=data.get("basepoint_side", 1),
    )


def load_model(source, k_max: Optional[int] = None,
               tol: Optional[float] = None) -> TreeModel:
    data = _as_dict(source)
    kind = data.get("type")
    if kind is None:
        if "vertices" in data:
            kind = "marked_graph"
        elif "side1" in data:
            kind = "splitting"
        elif "automorphism" in data:
            kind = "train_track"
        else:
            raise FormatError("cannot determine model type")
    if kind == "marked_graph":
        model: TreeModel = load_marked_graph(data)
    elif kind == "splitting":
        model = load_splitting(data)
    elif kind == "train_track":
        aut = load_automorphism(data["automorphism"])
        model = limit_tree(
            aut,
            matrix=data.get("matrix"),
            k_max=k_max or data.get("k_max", 40),
            tol=tol or data.get("tol", 1e-9),
        )
    else:
        raise FormatError(f"unknown model type {kind!r}")
    for twist in data.get("pullback", []):
        model = pullback(model, load_automorphism(twist))
    return model


def load_ray(data: Dict, b: Optional[Basis] = None) -> Ray:
    b = b or load_basis(data["basis"])
    return parse_ray(b, data.get("prefix", ""), data["period"])


def load_leaf(data: Dict, b: Optional[Basis] = None) -> Leaf:
    b = b or load_basis(data["basis"])
    return Leaf(load_ray(data["left"], b), load_ray(data["right"], b))


# -- language files ----------------------------------------------------------


def language_to_dict(lang: Language) -> Dict:
    return {
        "basis": "".join(lang.basis.symbols),
        "depth": lang.depth,
        "provenance": dict(lang.provenance),
        "words": [str(Word(lang.basis, t)) for t in lang.sorted_words()],
    }


def language_from_dict(data: Dict) -> Language:
    b = load_basis(data["basis"])
    words = frozenset(parse_word(b, w).letters for w in data["words"])
    prov = tuple(sorted(data.get("provenance", {}).items(), key=lambda kv: kv[0]))
    return Language(b, data["depth"], words, prov)


def omega_to_dict(om: OmegaSet) -> Dict:
    return {
        "basis": "".join(om.basis.symbols),
        "epsilon": om.epsilon,
        "length_cap": om.length_cap,
        "complete": om.complete,
        "method": om.method,
        "elements": [
            {"word": str(Word(om.basis, t)), "length": l}
            for t, l in zip(om.elements, om.lengths)
        ],
    }


def compare_languages(a: Language, b: Language) -> Dict:
    left = {str(Word(a.basis, t)) for t in a.words}
    right = {str(Word(b.basis, t)) for t in b.words}
    return {
        "equal": left == right,
        "left_minus_right": sorted(left - right),
        "right_minus_left": sorted(right - left),
    }
