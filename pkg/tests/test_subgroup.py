import random

import pytest
from hypothesis import given, strategies as st

from lamina.automorphism import fixed_ray
from lamina.formats import load_subgroup
from lamina.subgroup import Carried, SubgroupGraph, accepts, build, carries_leaf, carries_ray, index_kind
from lamina.words import Basis, PeriodicRay, WordError, invert, multiply, periodic_ray
from tests.conftest import DATA, reduced_words, tribonacci
from tests.oracles import all_reduced, naive_fold_accepts, subgroup_ball

B = Basis.standard(3)
P = B.parse
PHI = tribonacci(B)
AB = build([P("a"), P("b")], 3)

generator_sets = st.lists(reduced_words(min_size=1, max_size=4), min_size=1, max_size=3)


def is_folded_core(h: SubgroupGraph) -> bool:
    seen = {}
    for u, x, v in h.edges:
        for key in ((u, x), (v, -x)):
            if key in seen:
                return False
            seen[key] = True
    return all(h.degree(v) >= 2 for v in range(1, h.vertex_count))


def test_build_examples():
    assert AB.vertex_count == 1 and AB.edges == ((0, 1, 0), (0, 2, 0))
    assert build([P("ab"), P("a")], 3) == AB
    assert build([], 3) == SubgroupGraph(3, 1, ())
    # the basepoint survives core trimming even at degree one
    assert build([P("abA")], 3).vertex_count == 2


def test_index_examples():
    assert index_kind(AB) == ("infinite", None)
    assert index_kind(build([P("a"), P("b"), P("c")], 3)) == ("finite", 1)
    k = build([P(s) for s in ["aa", "b", "abA", "c", "acA"]], 3)
    assert index_kind(k) == ("finite", 2)


def test_accepts_examples():
    assert accepts(AB, P("ab"))
    assert not accepts(AB, P("c"))


@given(generator_sets)
def test_folding_invariants(gens):
    h = build(gens, 3)
    assert is_folded_core(h)
    for g in gens:
        assert accepts(h, g) and accepts(h, invert(g))


@pytest.mark.parametrize("gens", [["ab", "bc", "ca"], ["aab", "bA", "cbc"], ["abAB", "ba", "c"],
                                  ["aaaa", "aaa"], ["abc", "Cba", "bb"]])
def test_folding_confluence(gens):
    rng = random.Random(11)
    words = [P(g) for g in gens]
    ref = build(words, 3)
    for _ in range(100):
        shuffled = words[:]
        rng.shuffle(shuffled)
        # replacing generators by inverses does not change the subgroup either
        shuffled = [invert(w) if rng.random() < 0.5 else w for w in shuffled]
        assert build(shuffled, 3) == ref


@given(generator_sets)
def test_membership_vs_brute_force(gens):
    h = build(gens, 3)
    ball = subgroup_ball(gens, 3)
    assert all(accepts(h, w) for w in ball)
    for w in all_reduced(3, 4):
        assert accepts(h, w) == naive_fold_accepts(gens, w)


@given(generator_sets, reduced_words(max_size=4))
def test_conjugate_subgroup_membership(gens, u):
    h = build([multiply(u, g, invert(u)) for g in gens], 3)
    for g in gens:
        assert accepts(h, multiply(u, g, invert(u)))


def test_carries_ray_examples():
    assert carries_ray(AB, periodic_ray(P("a")), 20).kind is Carried.CARRIED
    v = carries_ray(AB, fixed_ray(PHI, 1), 12)
    assert v.kind is Carried.NOT_CARRIED and v.depth == 4
    full = build([P("a"), P("b"), P("c")], 3)
    assert carries_ray(full, fixed_ray(PHI, 1), 40).kind is Carried.CARRIED


@given(reduced_words(max_size=3), reduced_words(min_size=1, max_size=3))
def test_finite_index_carries_everything(head, period):
    k = build([P(s) for s in ["aa", "b", "abA", "c", "acA"]], 3)
    x = PeriodicRay(head, period)
    assert carries_ray(k, x, 16).kind is Carried.CARRIED


def test_carries_leaf_examples():
    assert carries_leaf(AB, periodic_ray(P("a")), periodic_ray(P("b")), 12).kind is Carried.CARRIED
    full = build([P("a"), P("b"), P("c")], 3)
    x, y = fixed_ray(PHI, 1), PeriodicRay((), P("c"))
    assert carries_leaf(full, x, y, 12).kind is Carried.CARRIED
    v = carries_leaf(AB, periodic_ray(P("a")), periodic_ray(P("c")), 12)
    assert v.kind is Carried.NOT_CARRIED and v.depth == 1


def test_carries_undecided_for_equal_rays():
    assert carries_leaf(AB, periodic_ray(P("a")), periodic_ray(P("aa")), 4).kind is Carried.UNDECIDED


def test_load_subgroup_file():
    gens = load_subgroup(DATA / "ab.sub", B)
    assert build(gens, 3) == AB


def test_generator_outside_rank():
    with pytest.raises(WordError):
        build([(4,)], 3)
