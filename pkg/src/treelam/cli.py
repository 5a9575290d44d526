"""Batch command line front end.

Every command writes one canonical JSON report (stdout or --out) and a
short human-readable summary on stderr.  Exit codes: 0 clean, 2 when a
result carries soundness flags (unstabilized chain, unconverged iteration,
possible undercount), 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .automorphisms import cancellation_bound, chop_constants
from .cache import iterate_images
from .languages import (
    default_schedule,
    dual_language,
    enumerate_short,
    rational_language,
    recurrent_language,
)
from .raylimits import bounded_orbit_test, limit_pair_test
from .serialization import (
    canonical_json,
    compare_languages,
    language_from_dict,
    language_to_dict,
    load_automorphism,
    load_basis,
    load_leaf,
    load_model,
    load_ray,
    omega_to_dict,
    report_document,
)
from .words import cyclic_decompose, parse_ray, parse_word


def _parse_eps(text: str):
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def _schedule(args, model):
    if args.eps:
        return [_parse_eps(e) for e in args.eps.split(",")]
    return default_schedule(model, args.cap)


def _emit(args, doc) -> int:
    text = canonical_json(doc)
    if args.out:
        Path(args.out).write_text(text)
        print(f"report written to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 2 if doc["flags"] else 0


def _common_params(args, **extra):
    out = {"jobs": args.jobs}
    out.update(extra)
    return out


def cmd_length(args) -> int:
    model = load_model(args.model, k_max=args.kmax, tol=args.tol)
    w = parse_word(model.basis, args.word)
    body = {"word": str(w)}
    flags = []
    if w:
        dec = cyclic_decompose(w)
        body["conjugator"] = str(dec.conjugator)
        body["cyclic_core"] = str(dec.core)
        if model.exact:
            body["translation_length"] = model.translation_length(w)
        else:
            est = model.translation_length_estimate(w)
            body["translation_length"] = est.value
            body["error"] = est.error
            if not est.converged:
                flags.append("unconverged")
    else:
        body["translation_length"] = 0
    body["displacement"] = model.displacement(w)
    body["bbt_bound"] = model.bbt_bound()
    doc = report_document(
        "length", _common_params(args, model=str(args.model), word=args.word),
        body, flags)
    print(f"|{w}| -> length {body['translation_length']}, "
          f"displacement {body['displacement']}", file=sys.stderr)
    return _emit(args, doc)


def cmd_omega(args) -> int:
    model = load_model(args.model, k_max=args.kmax, tol=args.tol)
    eps = _parse_eps(args.eps) if args.eps else default_schedule(model, args.cap)[0]
    om = enumerate_short(model, eps, args.cap, jobs=args.jobs)
    body = omega_to_dict(om)
    flags = [] if om.complete else ["incomplete"]
    if not om.elements:
        body["note"] = "empty: action is free simplicial at this threshold"
    doc = report_document(
        "omega",
        _common_params(args, model=str(args.model), eps=str(eps), cap=args.cap),
        body, flags)
    print(f"omega: {len(om)} classes below {eps}", file=sys.stderr)
    return _emit(args, doc)


def cmd_lang(args) -> int:
    model = load_model(args.model, k_max=args.kmax, tol=args.tol)
    schedule = _schedule(args, model)
    lang = dual_language(model, args.depth, schedule, args.cap)
    body = language_to_dict(lang)
    flags = lang.flags()
    doc = report_document(
        "lang",
        _common_params(args, model=str(args.model), depth=args.depth,
                       schedule=[str(e) for e in schedule], cap=args.cap),
        body, flags)
    print(f"dual language: {len(lang)} words at depth {lang.depth}"
          + (f" (flags: {','.join(flags)})" if flags else ""), file=sys.stderr)
    return _emit(args, doc)


def cmd_recurrent(args) -> int:
    b = load_basis(args.basis)
    r = parse_ray(b, args.prefix, args.period)
    lang = recurrent_language(r, args.depth)
    doc = report_document(
        "recurrent",
        _common_params(args, basis=args.basis, prefix=args.prefix,
                       period=args.period, depth=args.depth),
        language_to_dict(lang), lang.flags())
    print(f"recurrent language of {r}: {len(lang)} words", file=sys.stderr)
    return _emit(args, doc)


def cmd_compare(args) -> int:
    a = language_from_dict(json.loads(Path(args.left).read_text())["result"]
                           if args.from_reports
                           else json.loads(Path(args.left).read_text()))
    b = language_from_dict(json.loads(Path(args.right).read_text())["result"]
                           if args.from_reports
                           else json.loads(Path(args.right).read_text()))
    body = compare_languages(a, b)
    doc = report_document(
        "compare", _common_params(args, left=args.left, right=args.right),
        body, [])
    print("equal" if body["equal"] else "different", file=sys.stderr)
    return _emit(args, doc)


def cmd_l1(args) -> int:
    model = load_model(args.model, k_max=args.kmax, tol=args.tol)
    r = parse_ray(model.basis, args.prefix, args.period)
    verdict = bounded_orbit_test(r, model)
    body = {
        "ray": {"prefix": str(r.prefix), "period": str(r.period)},
        "member": verdict.member,
        "exactness": verdict.exactness,
    }
    if verdict.sup_displacement is not None:
        body["sup_displacement"] = verdict.sup_displacement
    if verdict.certificate is not None:
        k, l, d = verdict.certificate
        body["certificate"] = {"k": k, "l": l, "distance": d}
    flags = [] if verdict.exactness == "exact" else ["numeric"]
    doc = report_document(
        "l1",
        _common_params(args, model=str(args.model), prefix=args.prefix,
                       period=args.period),
        body, flags)
    print(f"{r}: {'member' if verdict.member else 'not a member'}",
          file=sys.stderr)
    return _emit(args, doc)


def cmd_qpair(args) -> int:
    model = load_model(args.model, k_max=args.kmax, tol=args.tol)
    leaf = load_leaf(json.loads(Path(args.leaf).read_text()), model.basis)
    ok = limit_pair_test(leaf, model, depth=args.depth)
    body = {
        "left": {"prefix": str(leaf.left.prefix), "period": str(leaf.left.period)},
        "right": {"prefix": str(leaf.right.prefix), "period": str(leaf.right.period)},
        "same_limit": ok,
        "exactness": "exact" if model.exact else "language-criterion",
    }
    flags = [] if model.exact else ["numeric"]
    doc = report_document(
        "qpair", _common_params(args, model=str(args.model), leaf=args.leaf),
        body, flags)
    print(f"pair test: {ok}", file=sys.stderr)
    return _emit(args, doc)


def cmd_bcc(args) -> int:
    aut = load_automorphism(args.aut)
    cheap = cancellation_bound(aut, args.depth, certify=False)
    certified = cancellation_bound(aut, args.depth, certify=True)
    consts = chop_constants(aut, args.depth)
    body = {
        "cheap_bound": cheap.value,
        "certified": {
            "value": certified.value,
            "kind": certified.kind,
            "depth_checked": certified.depth_checked,
        },
        "chop_constants": {
            "inner": consts.inner,
            "outer": consts.outer,
            "stretch": consts.stretch,
            "combined": consts.combined,
        },
        "note": "certified value is exact for junctions of words up to the "
                "checked depth; the cheap bound is sound at every depth",
    }
    doc = report_document(
        "bcc", _common_params(args, aut=str(args.aut), depth=args.depth),
        body, [])
    print(f"cancellation bound: cheap {cheap.value}, "
          f"certified-at-depth-{args.depth} {certified.value}", file=sys.stderr)
    return _emit(args, doc)


def cmd_cache(args) -> int:
    aut = load_automorphism(args.aut)
    images = iterate_images(aut, args.k, Path(args.cache_dir) if args.cache_dir else None)
    body = {"k": args.k, "images": [str(w) for w in images]}
    doc = report_document(
        "cache", _common_params(args, aut=str(args.aut), k=args.k), body, [])
    return _emit(args, doc)


def cmd_report(args) -> int:
    config = json.loads(Path(args.config).read_text())
    results = []
    worst = 0
    for job in config["jobs"]:
        argv = [job["command"]] + job.get("args", [])
        sub = build_parser().parse_args(argv)
        out_path = Path(args.workdir or ".") / f"{job['name']}.json"
        sub.out = str(out_path)
        code = sub.func(sub)
        worst = max(worst, code)
        results.append({"name": job["name"], "exit": code, "out": str(out_path)})
    doc = report_document("report", _common_params(args, config=args.config),
                          {"jobs": results}, ["exit2"] if worst == 2 else [])
    return max(worst, _emit(args, doc))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="treelam",
        description="dual-lamination toolkit for free group tree actions",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        sp.add_argument("--depth", type=int, default=4)
        sp.add_argument("--eps", type=str, default=None,
                        help="threshold or comma schedule, e.g. 1,1/2,1/4")
        sp.add_argument("--cap", type=int, default=8)
        sp.add_argument("--kmax", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--cache-dir", dest="cache_dir", default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--jobs", type=int, default=1)
        if model:
            sp.add_argument("--model", required=True)

    sp = sub.add_parser("length", help="translation length and displacement")
    common(sp)
    sp.add_argument("--word", required=True)
    sp.set_defaults(func=cmd_length)

    sp = sub.add_parser("omega", help="short conjugacy classes")
    common(sp)
    sp.set_defaults(func=cmd_omega)

    sp = sub.add_parser("lang", help="dual language over a threshold schedule")
    common(sp)
    sp.set_defaults(func=cmd_lang)

    sp = sub.add_parser("recurrent", help="recurrent language of a ray")
    common(sp, model=False)
    sp.add_argument("--basis", required=True)
    sp.add_argument("--prefix", default="")
    sp.add_argument("--period", required=True)
    sp.set_defaults(func=cmd_recurrent)

    sp = sub.add_parser("compare", help="compare two language files")
    common(sp, model=False)
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--from-reports", action="store_true",
                    help="inputs are lang reports rather than bare languages")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("l1", help="bounded-orbit test for a ray")
    common(sp)
    sp.add_argument("--prefix", default="")
    sp.add_argument("--period", required=True)
    sp.set_defaults(func=cmd_l1)

    sp = sub.add_parser("qpair", help="same-limit test for a boundary pair")
    common(sp)
    sp.add_argument("--leaf", required=True, help="leaf JSON file")
    sp.set_defaults(func=cmd_qpair)

    sp = sub.add_parser("bcc", help="cancellation bounds of an automorphism")
    common(sp, model=False)
    sp.add_argument("--aut", required=True)
    sp.set_defaults(func=cmd_bcc)

    sp = sub.add_parser("cache", help="iterated generator images")
    common(sp, model=False)
    sp.add_argument("--aut", required=True)
    sp.add_argument("-k", type=int, required=True)
    sp.set_defaults(func=cmd_cache)

    sp = sub.add_parser("report", help="run a batch job config")
    common(sp, model=False)
    sp.add_argument("--config", required=True)
    sp.add_argument("--workdir", default=None)
    sp.set_defaults(func=cmd_report)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
