import random
from functools import lru_cache

import pytest

from wadgebench import games as G
from wadgebench import sets as S
from wadgebench import transducers as T
from wadgebench.core import Point, stratified_points
from wadgebench.errors import ExtractionError
from wadgebench.metrics import Metric

N = S.cylinder
E, F = S.Empty(), S.Full()
ALPHABET = (0, 1, 2, 3)


def minimax_ii_wins(a, b, lead=0, depth=2):
    """Play out the lead-k Lipschitz game letter by letter.

    Both sets must be decided by their first ``depth`` letters.
    """
    def member(e, word):
        return S.evaluate(e, Point(word, (0,)))[0]

    @lru_cache(maxsize=None)
    def ii_wins(xa, xb):
        if len(xa) >= depth and len(xb) >= depth:
            return member(a, xa) == member(b, xb)
        if len(xa) < len(xb) + lead + 1:
            return all(ii_wins(xa + (c,), xb) for c in ALPHABET)
        return any(ii_wins(xa, xb + (c,)) for c in ALPHABET)

    return ii_wins((), ())


def is_empty(e):
    return S.minimal(e).canonical_key() == S.minimal(E).canonical_key()


def test_arena_examples():
    a = S.minimal(N((0,)))
    arena = G.build_arena(a, a)
    assert arena.n_positions <= a.n_states * a.n_states * 2
    assert G.solve(G.build_arena(E, F)).winner == "I"
    assert G.build_arena(a, a, lead=1).buffer_bound == 2


def test_solver_examples(depth1_corpus):
    for _, a in depth1_corpus:
        assert G.game(a, a).winner == "II"
    assert G.game(E, F).winner == "I"
    assert G.game(~N((0,)), N((0,))).winner == "II"
    assert G.game(~S.hits(0), S.hits(0)).winner == "I"


def clopen(corpus):
    return [e for name, e in corpus if name.startswith(("c1_", "c2_"))]


def test_solver_matches_minimax(depth1_corpus):
    sets = clopen(depth1_corpus)
    for a in sets:
        for b in sets:
            assert (G.game(a, b).winner == "II") == minimax_ii_wins(a, b, depth=1)
            assert (G.game(a, b, lead=1).winner == "II") == minimax_ii_wins(a, b, lead=1, depth=1)


def test_solver_matches_minimax_depth_two(depth2_corpus):
    rng = random.Random(12)
    sets = clopen(depth2_corpus)
    for _ in range(150):
        a, b = rng.choice(sets), rng.choice(sets)
        lead = rng.randrange(2)
        assert (G.game(a, b, lead=lead).winner == "II") == minimax_ii_wins(a, b, lead, depth=2)


def test_diagonal_strategy_is_copy(depth1_corpus):
    pts = stratified_points(100, seed=3, letters=5)
    for _, a in depth1_corpus:
        t = G.extract_II(G.game(a, a))
        assert all(T.apply(t, x) == x for x in pts)


def test_extracted_witnesses_reduce(depth1_corpus):
    sets = [e for _, e in depth1_corpus]
    for a in sets:
        for b in sets:
            v = G.game(a, b)
            if v.winner == "II":
                t = G.extract_II(v)
                assert T.verify_reduction(t, a, b)
                assert T.certify_lipschitz(t, Metric.D).constant <= 1
            w = G.game(~b, a)
            if w.winner == "I":
                t = G.extract_I(w)
                assert T.verify_reduction(t, a, b)
                assert T.certify_lipschitz(t, Metric.D).constant <= 0.5


def test_lead_round_trip(depth1_corpus):
    sets = [e for _, e in depth1_corpus][:12]
    for k in (1, 2):
        for a in sets:
            for b in sets:
                v = G.game(a, b, lead=k)
                assert G.check_strategy(v)
                if v.winner == "II":
                    t = G.extract_II(v)
                    assert T.verify_reduction(t, a, b)
                    assert T.certify_lipschitz(t, Metric.D).constant <= 2 ** k
                w = G.game(~b, a, lead=k)
                if w.winner == "I":
                    t = G.extract_I(w)
                    assert T.verify_reduction(t, a, b)
                    assert T.certify_lipschitz(t, Metric.D).constant <= 2 ** -(k + 1)


def test_strategies_recheck(depth1_corpus):
    sets = [e for _, e in depth1_corpus]
    for a in sets:
        for b in sets:
            assert G.check_strategy(G.game(a, b))
            assert G.check_strategy(G.game(a, b, variant="wadge"))


def test_refining_letter_classes_keeps_winner(depth2_corpus):
    rng = random.Random(21)
    sets = [e for _, e in depth2_corpus]
    for _ in range(50):
        a, b = S.minimal(rng.choice(sets)), S.minimal(rng.choice(sets))
        lead = rng.randrange(2)
        before = G.solve(G.GameArena(a, b, lead)).winner
        top = max(a.threshold, b.threshold) + 1
        after = G.solve(G.GameArena(a.expand(top), b.expand(top + 1), lead)).winner
        assert before == after


def test_anti_diagonal(depth2_corpus):
    for _, a in depth2_corpus[::5]:
        assert G.game(a, a).winner == "II"


def test_wadge_matches_clopen_rule(depth1_corpus):
    sets = clopen(depth1_corpus)
    for a in sets:
        for b in sets:
            expected = ((is_empty(a) or not is_empty(b))
                        and (is_empty(~a) or not is_empty(~b)))
            assert (G.game(a, b, variant="wadge").winner == "II") == expected


def test_wadge_separates_open_from_clopen():
    # hits-zero is properly open: no clopen set Wadge-reduces it
    assert G.game(S.hits(0), N((0,)), variant="wadge").winner == "I"
    assert G.game(N((0,)), S.hits(0), variant="wadge").winner == "II"


def test_role_mismatch():
    v = G.game(N((0,)), N((1,)))
    with pytest.raises(ExtractionError):
        G.extract_I(v)
    with pytest.raises(ExtractionError):
        G.extract_II(G.game(E, F))
