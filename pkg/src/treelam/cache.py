"""Content-addressed cache of iterated generator images.

Keys are a hash of the canonical automorphism document plus the exponent;
entries are idempotent and re-verified on read, so a corrupt file is
rebuilt (with a warning) rather than trusted.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Optional, Tuple

from .automorphisms import Automorphism, identity_automorphism, power
from .serialization import canonical_json, dump_automorphism
from .words import Word, parse_word

log = logging.getLogger(__name__)

CACHE_VERSION = 1


def automorphism_digest(a: Automorphism) -> str:
    doc = canonical_json({"v": CACHE_VERSION, "aut": dump_automorphism(a)})
    return hashlib.sha256(doc.encode()).hexdigest()[:24]


def iterate_images(a: Automorphism, k: int,
                   cache_dir: Optional[Path] = None) -> Tuple[Word, ...]:
    """Images of the generators under a^k (k may be negative).

    k = 0 returns the generators themselves.
    """
    if k == 0:
        return identity_automorphism(a.source).images
    if cache_dir is None:
        return power(a, k).images
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    key = f"{automorphism_digest(a)}_{k}.json"
    path = cache_dir / key
    if path.exists():
        try:
            data = json.loads(path.read_text())
            if data["k"] != k:
                raise ValueError("exponent mismatch")
            return tuple(parse_word(a.source, w) for w in data["images"])
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            log.warning("rebuilding corrupt cache entry %s (%s)", key, exc)
    images = power(a, k).images
    path.write_text(canonical_json({"k": k, "images": [str(w) for w in images]}))
    return images
