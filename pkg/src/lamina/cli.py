"""Command-line front end: ``lamina analyze|fiber|singular-search|verify-bounds|carried``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional

from .automorphism import (
    BudgetExceeded,
    MappingTorusElement,
    MissingInverse,
    conjugation_automorphism,
    periodic_class_scan,
    word_ray,
)
from .config import Config
from .ctfiber import (
    InvariantViolation,
    Thresholds,
    attracting_rays,
    build_languages,
    fiber_report,
    seed_pool,
    simple_point_check,
    singular_search,
)
from .formats import ParseError, load_automorphism, load_subgroup, load_traintrack, parse_element
from .lamination import language_compare, orbit_language
from .subgroup import Carried, build, carries_leaf, carries_ray, index_kind
from .traintrack import (
    GraphMap,
    bfh_language,
    pf_eigenvalue,
    transition_matrix,
    validate_train_track,
)
from .words import CyclicWord, WordError

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_UNDECIDED, EXIT_BUDGET = 0, 1, 2, 3, 4

log = logging.getLogger("lamina")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    d = Config()
    p.add_argument("--depth", type=int, default=d.depth, help="factor length k")
    p.add_argument("--iter-max", type=int, default=d.n_max, help="iterate cap for languages")
    p.add_argument("--stall", type=int, default=d.stall)
    p.add_argument("--ball", type=int, default=d.ball, help="class radius for the orbit-union language")
    p.add_argument("--word-radius", type=int, default=d.word_radius)
    p.add_argument("--exp-max", type=int, default=d.exp_max)
    p.add_argument("--period-max", type=int, default=d.period_max)
    p.add_argument("--probe", type=int, default=d.probe, help="prefix depth for ray comparisons")
    p.add_argument("--budget", type=int, default=d.budget, help="word length cap")
    p.add_argument("--tol", type=float, default=d.tol)
    p.add_argument("--jobs", type=int, default=d.jobs)
    p.add_argument("--out", default=None, help="write JSON here (default: stdout)")


def config_from_args(a: argparse.Namespace) -> Config:
    try:
        return Config(depth=a.depth, n_max=a.iter_max, stall=a.stall, ball=a.ball,
                      word_radius=a.word_radius, exp_max=a.exp_max, period_max=a.period_max,
                      probe=a.probe, budget=a.budget, tol=a.tol, jobs=a.jobs, out=a.out)
    except ValueError as e:
        raise UsageError(str(e)) from None


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lamina", description="Laminations and Cannon-Thurston fibers of free-by-cyclic groups.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="matrix, PF data, periodic scan, languages")
    a.add_argument("automorphism")
    a.add_argument("--traintrack", default=None, help="train-track file (default: the rose map, if legal)")

    f = sub.add_parser("fiber", help="fiber of (w t^m)^inf, or simplicity of w^inf when m = 0")
    f.add_argument("automorphism")
    f.add_argument("element", help="w,m")

    s = sub.add_parser("singular-search", help="enumerate w t^m and report singular points")
    s.add_argument("automorphism")

    v = sub.add_parser("verify-bounds", help="singular search reduced to the bound checks")
    v.add_argument("automorphism")

    c = sub.add_parser("carried", help="carried rays / leaves for a subgroup")
    c.add_argument("automorphism")
    c.add_argument("subgroup")
    c.add_argument("--ray", action="append", default=[], help="u(v) or iter:s[:p]")
    c.add_argument("--leaf", nargs=2, action="append", default=[], metavar=("X", "Y"))

    for q in (a, f, s, v, c):
        _add_config_flags(q)
    return p


# ---------------------------------------------------------------------------
# commands; each returns (json payload, text lines, exit code)


def _truncated(langs: dict) -> list:
    return [name for name, lang in langs.items() if lang is not None and lang.truncated]


def _words(lang, basis) -> list:
    return [basis.format(w) for w in lang.sorted_words()]


def _lang_summary(lang, basis) -> dict:
    return {"depth": lang.depth, "size": len(lang), "stabilized": lang.stabilized,
            "provenance": lang.provenance, "sources": [basis.format(s) for s in lang.sources],
            "words": _words(lang, basis)}


def cmd_analyze(args, cfg: Config):
    phi = load_automorphism(args.automorphism)
    b = phi.basis
    warnings_out = []
    if b.rank == 2:
        warnings_out.append("rank 2: atoroidal fully irreducible automorphisms need N >= 3")
    if args.traintrack:
        f = load_traintrack(args.traintrack)
    else:
        f = GraphMap.from_automorphism(phi)
    f = GraphMap(f.graph, f.images, budget=cfg.budget)
    tt = validate_train_track(f, (2 * f.graph.edge_count) ** 2)
    m = transition_matrix(f)
    try:
        pf = pf_eigenvalue(m, cfg.tol)
        pf_json = {"value": round(pf.value, 12), "vector": [round(x, 12) for x in pf.vector],
                   "iterations": pf.iterations}
    except ValueError as e:
        pf, pf_json = None, {"error": str(e)}
    scan = periodic_class_scan(phi, 2 * cfg.ball, cfg.period_max)
    lam_minus = None
    lp, lm = build_languages(phi, cfg) if phi.invertible else (None, None)
    if lp is None:
        from .lamination import mitra_language

        lp = mitra_language(phi, cfg.ball, cfg.depth, cfg.n_max, cfg.stall, cfg.orbit_burn_in, cfg.jobs)
    lam_plus = _lang_summary(lp, b)
    if lm is not None:
        lam_minus = _lang_summary(lm, b)
    out = {
        "command": "analyze",
        "automorphism": phi.format().splitlines(),
        "rank": b.rank,
        "assumption": "fully irreducible and atoroidal (asserted by the user, scanned heuristically)",
        "warnings": warnings_out,
        "train_track": {"verdict": tt.verdict, "detail": tt.describe(f.graph.basis),
                        "graph": "rose" if f.graph.is_rose else "general"},
        "transition_matrix": m.tolist(),
        "pf": pf_json,
        "periodic_scan": {"max_len": 2 * cfg.ball, "max_power": cfg.period_max,
                          "found": [[c.format(b), p] for c, p in scan]},
        "lambda_phi": lam_plus,
        "lambda_phi_inverse": lam_minus,
    }
    code = EXIT_OK
    bfh = None
    if tt.ok and f.graph.is_rose:
        bfh = bfh_language(f, cfg.depth, cfg.stall, cfg.n_max)
        orb = orbit_language(phi, CyclicWord.of((1,)), cfg.depth, cfg.n_max, cfg.stall, cfg.orbit_burn_in)
        c_mitra = language_compare(bfh, lp)
        c_orbit = language_compare(bfh, orb)
        ok = c_mitra in ("equal", "subset") and c_orbit in ("equal", "subset")
        out["bfh"] = _lang_summary(bfh, b)
        out["containment"] = {"bfh_vs_orbit_a": c_orbit, "bfh_vs_lambda_phi": c_mitra, "ok": ok}
        if not ok:
            code = EXIT_INVARIANT
    if lm is not None:
        out["phi_vs_phi_inverse"] = {
            "relation": language_compare(lp, lm),
            "only_phi": len(lp.words - lm.words),
            "only_phi_inverse": len(lm.words - lp.words),
        }
    out["config"] = cfg.as_dict()
    out["_truncated"] = _truncated({"Lambda_phi": lp, "Lambda_phi^-1": lm, "the bfh language": bfh})
    text = [
        f"rank              {b.rank}",
        f"train track       {tt.describe(f.graph.basis)}",
        f"transition matrix {m.tolist()}",
        f"PF eigenvalue     {pf.value:.9f}" if pf else f"PF eigenvalue     {pf_json['error']}",
        f"periodic scan     {'empty' if not scan else len(scan)} (len <= {2 * cfg.ball}, power <= {cfg.period_max})",
        f"Lambda_phi        {len(lp)} words, stabilized={lp.stabilized}",
    ]
    if lm is not None:
        text.append(f"Lambda_phi^-1     {len(lm)} words, stabilized={lm.stabilized}")
        text.append(f"phi vs phi^-1     {out['phi_vs_phi_inverse']['relation']}")
    if "bfh" in out:
        text.append(f"bfh language      {out['bfh']['size']} words, stabilized={out['bfh']['stabilized']}")
        text.append(f"containment       {'ok' if out['containment']['ok'] else 'VIOLATED'}")
    text += [f"warning: {w}" for w in warnings_out]
    return out, text, code


def cmd_fiber(args, cfg: Config):
    phi = load_automorphism(args.automorphism)
    b = phi.basis
    g = parse_element(args.element, b)
    if not phi.invertible:
        raise UsageError("fiber analysis needs an inverse block in the automorphism file")
    langs = build_languages(phi, cfg)
    cut = _truncated({"Lambda_phi": langs[0], "Lambda_phi^-1": langs[1]})
    if g.m == 0:
        if not g.w:
            raise UsageError("the identity has no fixed boundary point")
        v = simple_point_check(phi, g.w, langs, cfg)
        out = {"command": "fiber", "element": {"w": b.format(g.w), "m": 0}, "check": "simple_point",
               "verdict": v.verdict, "candidates": v.candidates, "consistent": v.survivors,
               "undecided": v.undecided, "depth": cfg.depth,
               "stabilized": all(lang.stabilized for lang in langs), "config": cfg.as_dict()}
        if v.warning:
            out["warning"] = v.warning
        out["_truncated"] = cut
        code = {"PASS": EXIT_OK, "FAIL": EXIT_INVARIANT, "UNDECIDED": EXIT_UNDECIDED}[v.verdict]
        return out, [f"{b.format(g.w)}^inf  simple-point check {v.verdict} ({v.candidates} candidates)"], code
    r = fiber_report(phi, g, langs, cfg)
    out = {"command": "fiber", **r.to_json(b, cfg.probe, cfg), "_truncated": cut}
    text = [f"element           {g.format(b)}",
            f"rays              {len(r.rays)}",
            f"partition         {r.partition}",
            f"degree >=         {r.degree_lower_bound}",
            f"class             {r.cls}",
            f"type              {r.type}",
            f"stabilized        {r.stabilized}"]
    if r.cross_violations:
        return out, text + [f"cross-language violations {r.cross_violations}"], EXIT_INVARIANT
    return out, text, EXIT_UNDECIDED if r.cls == "undetermined" else EXIT_OK


def _search(args, cfg: Config):
    phi = load_automorphism(args.automorphism)
    if not phi.invertible:
        raise UsageError("singular search needs an inverse block in the automorphism file")
    langs = build_languages(phi, cfg)
    return phi, singular_search(phi, langs, cfg), _truncated({"Lambda_phi": langs[0], "Lambda_phi^-1": langs[1]})


def _search_status(res) -> int:
    cross = [g for g, r in res.reports.items() if r.cross_violations]
    if not res.bounds.ok or cross:
        return EXIT_INVARIANT
    return EXIT_OK


def _threshold_line(rank: int) -> str:
    th = Thresholds.of(rank)
    return (f"thresholds (N = {rank})  {th.two_n}/{th.two_n_minus_2}/{th.four_n_minus_5}/{th.four_n_minus_1}"
            "  [2N / 2N-2 / 4N-5 / 4N-1]")


def cmd_singular_search(args, cfg: Config):
    phi, res, cut = _search(args, cfg)
    b = phi.basis
    out = {"command": "singular-search", **res.to_json(b, cfg), "_truncated": cut}
    out["cross_check_violations"] = sorted(g.format(b) for g, r in res.reports.items() if r.cross_violations)
    text = [_threshold_line(b.rank),
            f"candidates        {len(res.candidates)}",
            f"singular families {len(res.families)}"]
    for fam in res.families:
        r = res.reports[fam[0]]
        text.append(f"  {', '.join(g.format(b) for g in fam):<24} degree >= {r.degree_lower_bound}  {r.type}")
    text += [f"note: {n}" for n in res.notes]
    text += [f"VIOLATION: {v}" for v in res.bounds.violations()]
    return out, text, _search_status(res)


def cmd_verify_bounds(args, cfg: Config):
    phi, res, cut = _search(args, cfg)
    b = phi.basis
    bounds = res.bounds.to_json()
    cross = sorted(g.format(b) for g, r in res.reports.items() if r.cross_violations)
    out = {"command": "verify-bounds", "bounds": bounds, "cross_check_violations": cross,
           "notes": res.notes, "config": cfg.as_dict(), "_truncated": cut}
    th = res.bounds.thresholds
    text = [_threshold_line(b.rank),
            f"max degree        {max((r.degree_lower_bound for r in res.reports.values()), default=1)}"
            f" <= {th.two_n}",
            f"type sums         phi {bounds['type_sums']['phi']}, phi^-1 {bounds['type_sums']['phi_inverse']}"
            f" <= {th.two_n_minus_2}",
            f"total sum         {bounds['total_sum']} <= {th.four_n_minus_5}",
            f"orbits found      {bounds['sigma_found']} <= {th.four_n_minus_5}",
            f"status            {'ok' if res.bounds.ok and not cross else 'VIOLATED'}"]
    text += [f"VIOLATION: {v}" for v in res.bounds.violations()]
    return out, text, _search_status(res)


def cmd_carried(args, cfg: Config):
    phi = load_automorphism(args.automorphism)
    b = phi.basis
    h = build(load_subgroup(args.subgroup, b), b.rank)
    kind, n = index_kind(h)
    out = {"command": "carried", "subgroup": {"vertices": h.vertex_count, "edges": len(h.edges),
                                              "index": kind if n is None else f"{kind}({n})"},
           "rays": [], "leaves": [], "config": cfg.as_dict()}
    psi = phi
    rays, leaves = list(args.ray), list(args.leaf)
    try:
        parsed_rays = [(s, word_ray(b, s, psi)) for s in rays]
        parsed_leaves = [(x, y, word_ray(b, x, psi), word_ray(b, y, psi)) for x, y in leaves]
    except WordError as e:
        raise UsageError(str(e)) from None
    if not rays and not leaves:
        # default: leaves joining the attracting fixed points of phi
        t = conjugation_automorphism(phi, MappingTorusElement((), 1))
        fixed = attracting_rays(t, cfg.probe, cfg.period_max, seed_pool(b.rank, 1), cfg.max_steps)
        for i, x in enumerate(fixed):
            parsed_rays.append((b.format(x.prefix(cfg.probe)) + "...", x))
            for y in fixed[i + 1:]:
                parsed_leaves.append((b.format(x.prefix(8)) + "...", b.format(y.prefix(8)) + "...", x, y))
    text = [f"subgroup          {h.vertex_count} vertices, index {out['subgroup']['index']}"]
    undecided = False
    for s, x in parsed_rays:
        v = carries_ray(h, x, cfg.depth)
        out["rays"].append({"ray": s, **v.to_json()})
        text.append(f"ray  {s:<40} {v.kind.value} (depth {v.depth})")
        undecided |= v.kind is Carried.UNDECIDED
    for sx, sy, x, y in parsed_leaves:
        v = carries_leaf(h, x, y, cfg.depth, cfg.probe)
        out["leaves"].append({"leaf": [sx, sy], **v.to_json()})
        text.append(f"leaf ({sx}, {sy}) {v.kind.value} (depth {v.depth})")
        undecided |= v.kind is Carried.UNDECIDED
    return out, text, EXIT_UNDECIDED if undecided else EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "fiber": cmd_fiber,
    "singular-search": cmd_singular_search,
    "verify-bounds": cmd_verify_bounds,
    "carried": cmd_carried,
}


def _emit(payload: dict, text: list, out: Optional[str]) -> None:
    blob = json.dumps(payload, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(blob)
        print("\n".join(text))
    else:
        sys.stdout.write(blob)
        print("\n".join(text), file=sys.stderr)


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if os.environ.get("LAMINA_SEED"):
        log.info("LAMINA_SEED is reserved; no randomized defaults are in use")
    try:
        cfg = config_from_args(args)
        payload, text, code = COMMANDS[args.command](args, cfg)
    except (ParseError, UsageError, OSError, MissingInverse) as e:
        print(f"lamina: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as e:
        print(f"lamina: invariant violation (this is a bug): {e}", file=sys.stderr)
        print(json.dumps({"reproducer": e.reproducer, "command": sys.argv[1:] if argv is None else argv}),
              file=sys.stderr)
        return EXIT_INVARIANT
    except BudgetExceeded as e:
        print(f"lamina: length budget exceeded during {args.command}: {e}", file=sys.stderr)
        return EXIT_BUDGET
    truncated = payload.pop("_truncated", [])
    _emit(payload, text, cfg.out)
    for stage in truncated:
        print(f"lamina: length budget exceeded while building {stage}; results are partial", file=sys.stderr)
        if code == EXIT_OK:
            code = EXIT_BUDGET
    return code


if __name__ == "__main__":
    sys.exit(main())
