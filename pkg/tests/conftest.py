from pathlib import Path

import pytest
from hypothesis import settings, strategies as st

from lamina.automorphism import Automorphism
from lamina.config import Config
from lamina.ctfiber import build_languages
from lamina.formats import load_automorphism
from lamina.words import Basis

DATA = Path(__file__).parent / "data"

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture(scope="session")
def basis():
    return Basis.standard(3)


@pytest.fixture(scope="session")
def phi():
    return load_automorphism(DATA / "tribonacci.aut")


@pytest.fixture(scope="session")
def cfg():
    return Config()


@pytest.fixture(scope="session")
def languages(phi, cfg):
    return build_languages(phi, cfg)


def letters(rank=3):
    return st.integers(1, rank).flatmap(lambda i: st.sampled_from([i, -i]))


def raw_words(rank=3, max_size=20):
    return st.lists(letters(rank), max_size=max_size).map(tuple)


def reduced_words(rank=3, min_size=0, max_size=20):
    from tests.oracles import naive_reduce

    return raw_words(rank, 3 * max_size).map(naive_reduce).filter(
        lambda w: min_size <= len(w) <= max_size)


def tribonacci(basis: Basis) -> Automorphism:
    p = basis.parse
    return Automorphism(basis, (p("ab"), p("ac"), p("a")), (p("c"), p("Ca"), p("Cb")))


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
