"""Singular search over a grid of candidate bounds; prints families and type sums per cell.

    python scripts/search_sweep.py src/lamina/data/tribonacci.aut --radii 1 2 --exps 1 2
"""
import argparse
import time

from lamina.config import Config
from lamina.ctfiber import build_languages, singular_search
from lamina.formats import load_automorphism


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("automorphism")
    ap.add_argument("--radii", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--exps", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    phi = load_automorphism(args.automorphism)
    base = Config(jobs=args.jobs)
    langs = build_languages(phi, base)
    for r in args.radii:
        for e in args.exps:
            cfg = base.with_(word_radius=r, exp_max=e)
            t0 = time.perf_counter()
            res = singular_search(phi, langs, cfg)
            b = res.bounds.to_json()
            fams = [[g.format(phi.basis) for g in fam] for fam in res.families]
            print(f"|w|<={r} |m|<={e}: {len(res.candidates)} candidates, {len(fams)} families, "
                  f"type sums {b['type_sums']}, violations {len(b['violations'])}, "
                  f"{time.perf_counter() - t0:.1f}s")
            for fam in fams:
                print("    " + "  ".join(fam))


if __name__ == "__main__":
    main()
