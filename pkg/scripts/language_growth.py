"""Factor-language sizes by depth for an automorphism and its inverse.

    python scripts/language_growth.py src/lamina/data/tribonacci.aut --kmax 8
"""
import argparse
import time

from lamina.config import Config
from lamina.formats import load_automorphism
from lamina.lamination import language_compare, mitra_language
from lamina.traintrack import GraphMap, bfh_language, validate_train_track


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("automorphism")
    ap.add_argument("--kmax", type=int, default=8)
    ap.add_argument("--ball", type=int, default=2)
    args = ap.parse_args()

    phi = load_automorphism(args.automorphism)
    cfg = Config()
    f = GraphMap.from_automorphism(phi)
    tt = validate_train_track(f, cfg.n_max).ok
    print(f"rose map is a train track: {tt}")
    print(f"{'k':>3} {'bfh':>6} {'ball+':>6} {'ball-':>6}  compare        secs")
    for k in range(1, args.kmax + 1):
        t0 = time.perf_counter()
        bfh = bfh_language(f, k, cfg.stall, cfg.n_max) if tt else None
        lp = mitra_language(phi, args.ball, k, cfg.n_max, cfg.stall, 2 * k)
        lm = mitra_language(phi.inverse(), args.ball, k, cfg.n_max, cfg.stall, 2 * k)
        n_bfh = len(bfh) if bfh is not None else "-"
        print(f"{k:>3} {n_bfh:>6} {len(lp):>6} {len(lm):>6}  {language_compare(lp, lm):<14} "
              f"{time.perf_counter() - t0:.2f}")


if __name__ == "__main__":
    main()
