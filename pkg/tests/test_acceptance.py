"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line in the summary."""
import contextlib
import json
import random
import time

import numpy as np
import pytest

from lamina import cli
from lamina.automorphism import MappingTorusElement as E, mt_multiply
from lamina.config import Config
from lamina.ctfiber import attracting_rays, build_languages, seed_pool, simple_point_check
from lamina.lamination import leaf_test, LeafKind, mitra_language, orbit_language
from lamina.subgroup import Carried, accepts, build, carries_leaf
from lamina.traintrack import GraphMap, bfh_language, pf_eigenvalue, transition_matrix
from lamina.words import Basis, CyclicWord, cyclic_normalize, invert, multiply
from tests.conftest import ACCEPTANCE, DATA
from tests.oracles import char_poly_pf, naive_fold_accepts, push_cancel, subgroup_ball, substitute

B = Basis.standard(3)
P = B.parse
AUT = str(DATA / "tribonacci.aut")
LETTERS = [1, -1, 2, -2, 3, -3]


@contextlib.contextmanager
def criterion(n, title, limit=None):
    t0 = time.perf_counter()
    info = {}
    try:
        yield info
        took = time.perf_counter() - t0
        if limit is not None:
            assert took < limit, f"took {took:.1f}s, limit {limit}s"
    except BaseException as e:
        took = time.perf_counter() - t0
        ACCEPTANCE[n] = f"criterion {n:2d} FAIL  {title} ({took:.1f}s): {str(e).splitlines()[0] if str(e) else type(e).__name__}"
        raise
    detail = info.get("detail", "")
    ACCEPTANCE[n] = f"criterion {n:2d} PASS  {title} ({took:.1f}s){'  ' + detail if detail else ''}"


@pytest.fixture(scope="module")
def phi():
    from lamina.formats import load_automorphism

    return load_automorphism(AUT)


@pytest.fixture(scope="module")
def cfg():
    return Config()


@pytest.fixture(scope="module")
def langs(phi, cfg):
    return build_languages(phi, cfg)


def random_reduced(rng, lo, hi):
    return push_cancel([rng.choice(LETTERS) for _ in range(rng.randint(lo, hi))])


def least_rotation_oracle(u):
    core = u
    while len(core) > 1 and core[0] == -core[-1]:
        core = core[1:-1]
    return min((core[i:] + core[:i] for i in range(len(core))),
               key=lambda r: [2 * (abs(x) - 1) + (x < 0) for x in r])


def test_criterion_01_word_algebra():
    rng = random.Random(2024)
    cases = [(random_reduced(rng, 1, 14), random_reduced(rng, 0, 14)) for _ in range(100_000)]
    cases = [(u, v) for u, v in cases if u]
    with criterion(1, "word algebra vs push-and-cancel, 1e5 cases", limit=5.0) as info:
        bad = 0
        for u, v in cases:
            if multiply(u, v) != push_cancel(u + v):
                bad += 1
            if invert(u) != push_cancel([-x for x in reversed(u)]):
                bad += 1
            c, g = cyclic_normalize(u)
            if push_cancel(g + c.letters + tuple(-x for x in reversed(g))) != u or c.letters != least_rotation_oracle(u):
                bad += 1
        assert bad == 0, f"{bad} mismatches"
        info["detail"] = f"{len(cases)} cases"


def test_criterion_02_mapping_torus_relation(phi):
    rng = random.Random(7)
    ws = [random_reduced(rng, 0, 12) for _ in range(10_000)]
    t, t_inv = E((), 1), E((), -1)
    with criterion(2, "(1,1)(w,0)(1,-1) = (phi(w),0), 1e4 words", limit=5.0):
        bad = sum(mt_multiply(phi, mt_multiply(phi, t, E(w, 0)), t_inv) != E(substitute(phi.images, w), 0)
                  for w in ws)
        assert bad == 0, f"{bad} mismatches"


def test_criterion_03_transition_matrix_and_pf(phi):
    with criterion(3, "Tribonacci matrix and PF eigenvalue", limit=1.0) as info:
        m = transition_matrix(GraphMap.from_automorphism(phi))
        assert m.tolist() == [[1, 1, 0], [1, 0, 1], [1, 0, 0]]
        lam = pf_eigenvalue(m, 1e-9).value
        ref = char_poly_pf(m)
        assert abs(lam - 1.839287) < 1e-6 and abs(lam - ref) < 1e-6, (lam, ref)
        info["detail"] = f"lambda = {lam:.9f}, char-poly root = {ref:.9f}"


def test_criterion_04_languages(phi, cfg):
    with criterion(4, "language stabilization and containment at k = 6", limit=30.0) as info:
        k = 6
        bfh = bfh_language(GraphMap.from_automorphism(phi), k, stall=cfg.stall, n_max=30)
        assert bfh.stabilized, "bfh language did not stabilize within n <= 30"
        orb = orbit_language(phi, CyclicWord.of(P("a")), k, cfg.n_max, cfg.stall, cfg.orbit_burn_in)
        mit = mitra_language(phi, 2, k, cfg.n_max, cfg.stall, cfg.orbit_burn_in)
        assert bfh.words <= orb.words, "orbit language misses bfh factors"
        assert bfh.words <= mit.words and orb.words <= mit.words, "ball-2 language is not a superset"
        for lang in (bfh, orb, mit):
            assert lang.closure_defects() == []
        info["detail"] = f"|bfh| = {len(bfh)}, |orbit[a]| = {len(orb)}, |ball 2| = {len(mit)}"


def test_criterion_05_phi_and_inverse_distinct(phi, cfg):
    with criterion(5, "phi and phi^-1 languages differ at k <= 6", limit=30.0) as info:
        first = None
        for k in range(1, 7):
            lp = mitra_language(phi, 2, k, cfg.n_max, cfg.stall, 2 * k)
            lm = mitra_language(phi.inverse(), 2, k, cfg.n_max, cfg.stall, 2 * k)
            if lp.words - lm.words and lm.words - lp.words:
                first = first or k
        assert first is not None, "languages agree up to k = 6"
        info["detail"] = f"symmetric difference nonempty both ways from k = {first}"


@pytest.fixture(scope="module")
def search_json(tmp_path_factory):
    out = tmp_path_factory.mktemp("search") / "jobs1.json"
    t0 = time.perf_counter()
    code = cli.main(["singular-search", AUT, "--jobs", "1", "--out", str(out)])
    return code, out, time.perf_counter() - t0


def test_criterion_06_bounds(search_json):
    code, out, took = search_json
    with criterion(6, "bound assertions over a default singular search") as info:
        rep = json.loads(out.read_text())
        assert code == 0, f"exit code {code}"
        assert took < 600, f"search took {took:.0f}s"
        b = rep["bounds"]
        th = b["thresholds"]
        assert (th["two_n"], th["two_n_minus_2"], th["four_n_minus_5"], th["four_n_minus_1"]) == (6, 4, 7, 11)
        assert all(r["degree_lower_bound"] <= 6 for r in rep["reports"])
        assert all(s <= 4 for s in b["type_sums"].values()), b["type_sums"]
        assert b["total_sum"] <= 7 and b["sigma_found"] <= 7
        assert all(p["ok"] for p in b["pair_sums"])
        assert b["violations"] == []
        info["detail"] = (f"search {took:.0f}s, {len(rep['reports'])} reports, families {b['sigma_found']}, "
                          f"type sums {b['type_sums']}")


def test_criterion_07_simple_points(phi, langs, cfg):
    rng = random.Random(99)
    ws = []
    while len(ws) < 20:
        w = random_reduced(rng, 1, 6)
        if w:
            ws.append(w)
    with criterion(7, "w^inf simple for 20 random w", limit=120.0) as info:
        verdicts = [simple_point_check(phi, w, langs, cfg).verdict for w in ws]
        bad = [B.format(w) for w, v in zip(ws, verdicts) if v != "PASS"]
        assert not bad, f"not PASS: {bad}"
        info["detail"] = ", ".join(B.format(w) for w in ws[:5]) + ", ..."


def test_criterion_08_cross_language(search_json, phi, langs, cfg):
    code, out, _ = search_json
    with criterion(8, "identified pairs are refuted in the opposite language") as info:
        rep = json.loads(out.read_text())
        assert rep["cross_check_violations"] == []
        assert all(r["cross_check_violations"] == [] for r in rep["reports"])
        # recheck directly on the singular elements
        from lamina.ctfiber import fiber_report
        from lamina.formats import parse_element

        pairs = 0
        for fam in rep["families"]:
            for spec in fam["elements"]:
                g = parse_element(spec, B)
                r = fiber_report(phi, g, langs, cfg)
                assert r.stabilized
                other = langs[1] if g.m > 0 else langs[0]
                for i, j in r.consistent_pairs:
                    assert leaf_test(other, r.rays[i], r.rays[j], cfg.depth).kind is LeafKind.NO
                    pairs += 1
        info["detail"] = f"{pairs} identified pairs rechecked"


def test_criterion_09_stallings(phi, langs, cfg):
    with criterion(9, "Stallings folding, membership, not-carried leaves", limit=60.0) as info:
        rng = random.Random(5)
        # confluence
        for _ in range(10):
            gens = [random_reduced(rng, 1, 4) or (1,) for _ in range(rng.randint(1, 3))]
            ref = build(gens, 3)
            for _ in range(100):
                shuffled = gens[:]
                rng.shuffle(shuffled)
                assert build(shuffled, 3) == ref
        # membership
        from tests.oracles import all_reduced

        words = all_reduced(3, 4)
        for _ in range(40):
            gens = [random_reduced(rng, 1, 4) or (2,) for _ in range(rng.randint(1, 3))]
            h = build(gens, 3)
            assert all(accepts(h, w) for w in subgroup_ball(gens, 3))
            assert all(accepts(h, w) == naive_fold_accepts(gens, w) for w in words)
        # leaves of the fixture lamination against <a, b>
        ab = build([P("a"), P("b")], 3)
        leaves = []
        for g in (E((), 1), E((), -1), E(P("A"), 1), E(P("a"), -1)):
            from lamina.ctfiber import fiber_report

            r = fiber_report(phi, g, langs, cfg)
            leaves += [(r.rays[i], r.rays[j]) for i, j in r.consistent_pairs]
        leaves = leaves[:10]
        assert len(leaves) == 10
        depths = []
        for x, y in leaves:
            v = carries_leaf(ab, x, y, 12)
            assert v.kind is Carried.NOT_CARRIED, v
            depths.append(v.depth)
        info["detail"] = f"not carried by depth {max(depths)} for all 10 leaves"


def test_criterion_10_determinism(search_json, tmp_path):
    code, out1, _ = search_json
    with criterion(10, "byte-identical JSON for --jobs 1 and --jobs 8"):
        a1, a8 = tmp_path / "a1.json", tmp_path / "a8.json"
        assert cli.main(["analyze", AUT, "--jobs", "1", "--out", str(a1)]) == 0
        assert cli.main(["analyze", AUT, "--jobs", "8", "--out", str(a8)]) == 0
        assert a1.read_bytes() == a8.read_bytes(), "analyze output differs"
        s8 = tmp_path / "s8.json"
        assert cli.main(["singular-search", AUT, "--jobs", "8", "--out", str(s8)]) == code
        assert out1.read_bytes() == s8.read_bytes(), "singular-search output differs"
