import pytest
from hypothesis import given, strategies as st

from lamina.automorphism import (
    Automorphism,
    BudgetExceeded,
    MappingTorusElement as E,
    MissingInverse,
    MT_IDENTITY,
    IteratedRay,
    apply,
    automorphism_power,
    compose,
    conjugation_automorphism,
    converged_prefix,
    cyclic_classes,
    fixed_ray,
    identity,
    inner,
    iterate_truncated,
    mt_elements,
    mt_inverse,
    mt_multiply,
    periodic_class_scan,
    power_apply,
    reduced_words as enum_words,
    word_ray,
)
from lamina.words import Basis, PeriodicRay, WordError, invert, is_reduced, multiply
from tests.conftest import reduced_words, tribonacci
from tests.oracles import all_reduced, naive_reduce, substitute

B = Basis.standard(3)
P = B.parse
PHI = tribonacci(B)

elements = st.builds(E, reduced_words(max_size=6), st.integers(-3, 3))


def test_apply_examples():
    assert apply(PHI, P("C")) == P("A")
    assert apply(compose(PHI, PHI), P("a")) == P("abac")
    assert apply(identity(B), P("aBc")) == P("aBc")


def test_power_apply_examples():
    assert power_apply(PHI, 0, P("bc")) == P("bc")
    assert power_apply(PHI, 3, P("a")) == P("abacaba")


def test_inverse_verified_at_construction():
    with pytest.raises(WordError):
        Automorphism(B, PHI.images, (P("c"), P("Ca"), P("Ca")))


def test_negative_power_needs_inverse():
    bare = Automorphism(B, PHI.images)
    with pytest.raises(MissingInverse):
        power_apply(bare, -1, P("a"))


def test_budget_is_loud():
    small = Automorphism(B, PHI.images, PHI.inverse_images, budget=50)
    with pytest.raises(BudgetExceeded):
        power_apply(small, 12, P("a"))


@given(reduced_words(max_size=10), st.integers(0, 5))
def test_power_apply_matches_substitution_oracle(u, n):
    w = u
    for _ in range(n):
        w = substitute(PHI.images, w)
    assert power_apply(PHI, n, u) == w
    assert is_reduced(w)


@given(reduced_words(), reduced_words())
def test_apply_is_homomorphism(u, v):
    assert apply(PHI, multiply(u, v)) == multiply(apply(PHI, u), apply(PHI, v))


@given(reduced_words(), st.integers(1, 4))
def test_inverse_round_trip(u, n):
    assert power_apply(PHI, n, power_apply(PHI, -n, u)) == u
    assert power_apply(PHI, -n, power_apply(PHI, n, u)) == u


@given(reduced_words(max_size=6), reduced_words(max_size=6))
def test_inner_composition(u, v):
    assert compose(inner(u, B), inner(v, B)).images == inner(multiply(u, v), B).images


def test_inner_examples():
    assert inner((), B).images == identity(B).images
    assert apply(inner(P("a"), B), P("b")) == P("abA")


def test_mt_multiply_examples():
    g = mt_multiply(PHI, mt_multiply(PHI, E((), 1), E(P("bc"), 0)), E((), -1))
    assert g == E(apply(PHI, P("bc")), 0)
    assert mt_multiply(PHI, E(P("a"), 1), E(P("b"), -1)) == E(P("aac"), 0)


@given(elements, elements, elements)
def test_mt_associative(g, h, k):
    left = mt_multiply(PHI, mt_multiply(PHI, g, h), k)
    right = mt_multiply(PHI, g, mt_multiply(PHI, h, k))
    assert left == right


@given(elements)
def test_mt_inverse(g):
    assert mt_multiply(PHI, g, mt_inverse(PHI, g)) == MT_IDENTITY
    assert mt_multiply(PHI, mt_inverse(PHI, g), g) == MT_IDENTITY
    expect = E(power_apply(PHI, -g.m, invert(g.w)), -g.m)
    assert mt_inverse(PHI, g) == expect


def test_conjugation_automorphism_examples():
    assert conjugation_automorphism(PHI, E((), 1)).images == PHI.images
    assert conjugation_automorphism(PHI, E(P("a"), 0)).images == inner(P("a"), B).images
    assert apply(conjugation_automorphism(PHI, E(P("a"), 1)), P("b")) == P("aacA")


@given(elements, elements)
def test_conjugation_is_a_homomorphism(g, h):
    gh = conjugation_automorphism(PHI, mt_multiply(PHI, g, h))
    both = compose(conjugation_automorphism(PHI, g), conjugation_automorphism(PHI, h))
    assert gh.images == both.images


@given(elements, reduced_words(max_size=6))
def test_conjugation_acts_by_conjugation(g, x):
    # g (x,0) g^-1 = (psi_g(x), 0)
    conj = mt_multiply(PHI, mt_multiply(PHI, g, E(x, 0)), mt_inverse(PHI, g))
    assert conj == E(apply(conjugation_automorphism(PHI, g), x), 0)


def test_automorphism_power_negative():
    assert automorphism_power(PHI, -2).images == compose(PHI.inverse(), PHI.inverse()).images


def test_enumeration_counts():
    # 1 + 6 + 30 + 150 reduced words of length <= 3 in rank 3
    assert len(list(enum_words(3, 3))) == 187
    assert set(enum_words(3, 3)) == set(all_reduced(3, 3))
    assert all(len(c) <= 3 for c in cyclic_classes(3, 3))


def test_periodic_class_scan():
    assert periodic_class_scan(PHI, 4, 6) == []
    everything = periodic_class_scan(identity(B), 2, 1)
    assert everything and all(p == 1 for _, p in everything)
    assert len(periodic_class_scan(inner(P("a"), B), 2, 3)) == len(cyclic_classes(3, 2))


def test_mt_elements_order():
    es = list(mt_elements(2, 1, 2))
    assert [e.m for e in es[:5]] == [1] * 5
    assert {e.m for e in es} == {1, -1, 2, -2}
    assert es[0] == E((), 1)


def test_iterate_truncated_keeps_prefixes():
    seq = iterate_truncated(PHI, P("a"), 6, 10)
    assert seq[3] == P("abacaba")
    assert all(len(w) <= 10 for w in seq)
    full = power_apply(PHI, 6, P("a"))
    assert seq[6] == full[:10]


def test_converged_prefix():
    seq = iterate_truncated(PHI, P("a"), 20, 64)
    step, pre = converged_prefix(seq, 1, 8, 64)
    assert pre == power_apply(PHI, 8, P("a"))[:8]
    # seeds that are merely permuted never converge
    assert converged_prefix([P("a"), P("b")] * 5, 1, 1, 8) is None


def test_fixed_ray_prefix():
    x = fixed_ray(PHI, 1)
    assert x.prefix(7) == P("abacaba")
    assert x.prefix(40) == power_apply(PHI, 10, P("a"))[:40]


def test_period_three_ray():
    # phi^3(A) starts with A, so A seeds an attracting point of period 3
    x = IteratedRay(PHI, P("A"), 3)
    assert x.prefix(7) == P("ABACABA")


def test_word_ray_syntax():
    assert word_ray(B, "a(b)") == PeriodicRay(P("a"), P("b"))
    assert word_ray(B, "iter:a", PHI).prefix(4) == P("abac")
    assert word_ray(B, "iter:A:3", PHI).prefix(3) == P("ABA")
    with pytest.raises(WordError):
        word_ray(B, "iter:a")
    with pytest.raises(WordError):
        word_ray(B, "abc")


def test_substitution_oracle_sanity():
    assert naive_reduce(substitute(PHI.images, P("abc"))) == P("abaca")
