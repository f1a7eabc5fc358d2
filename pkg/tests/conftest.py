import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from wadgebench import degrees as DG
from wadgebench import dsl
from wadgebench.core import Point

ROOT = Path(__file__).resolve().parent.parent
CORPORA = ROOT / "corpora"


def expand(x, n):
    """First n letters of a point, computed without the Point machinery."""
    out = list(x.prefix)
    while len(out) < n:
        out.extend(x.period)
    return out[:n]


def load_corpus(name):
    return list(dsl.parse((CORPORA / name).read_text()).sets())


letters = st.integers(min_value=0, max_value=6)
words = st.lists(letters, max_size=6).map(tuple)
periods = st.lists(letters, min_size=1, max_size=4).map(tuple)
points = st.builds(Point, words, periods)


def random_pairs(rng, n, make_point):
    """Pairs of points sharing a random-length common prefix."""
    out = []
    for _ in range(n):
        x = make_point(rng)
        y = make_point(rng)
        k = rng.randrange(6)
        out.append((x, Point(x.take(k) + y.prefix, y.period)))
    return out


@pytest.fixture(scope="session")
def depth2_corpus():
    return load_corpus("depth2.wdg")


@pytest.fixture(scope="session")
def depth1_corpus():
    return load_corpus("depth1.wdg")


@pytest.fixture(scope="session")
def depth2_analysis(depth2_corpus):
    return DG.CorpusAnalysis(depth2_corpus)


@pytest.fixture(scope="session")
def depth2_audit(depth2_analysis):
    return DG.audit_theorems(depth2_analysis)


@pytest.fixture
def rng():
    return random.Random(0x5EED)
