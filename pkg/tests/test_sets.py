import random

import pytest

from wadgebench import sets as S
from wadgebench.automata import Default, Explicit, ParityAbove, SetAutomaton
from wadgebench.core import Point, random_point, stratified_points, vec
from wadgebench.errors import ConstructionError, UnsupportedTier

from conftest import expand

N = S.cylinder
E, F = S.Empty(), S.Full()


def p(*prefix, period=(0,)):
    return Point(prefix, period)


def covers(cls, a):
    match cls:
        case Explicit(letter):
            return a == letter
        case ParityAbove(t, parity):
            return a >= t and a % 2 == (0 if parity == "even" else 1)
        case Default(t):
            return a >= t
    raise AssertionError(cls)


def sample_points(n, seed):
    return stratified_points(n, seed=seed, letters=4)


def test_cylinder_examples():
    assert S.minimal(N(())).canonical_key() == S.minimal(F).canonical_key()
    assert S.accepts(N((0, 1)), p(0, 1))
    assert not S.accepts(N((2,)), p(3))


def test_boolean_examples():
    assert S.minimal(~F).canonical_key() == S.minimal(E).canonical_key()
    assert S.accepts(S.bool_op("union", N((0,)), N((1,))), p(1))


def test_localize_and_concat_examples():
    loc = S.localize((0,), N((0, 7)))
    assert S.minimal(loc).canonical_key() == S.minimal(N((7,))).canonical_key()
    cat = S.concat_prefix((2,), F)
    assert S.minimal(cat).canonical_key() == S.minimal(N((2,))).canonical_key()


def test_osum_and_oplus_examples():
    both = S.oplus(E, F)
    assert S.accepts(both, p(1))
    assert not S.accepts(both, p(4))
    assert S.accepts(S.osum([N((9,))], E), p(0, 9))


def test_hits_zero_membership():
    h0 = S.hits(0)
    ok, cert = S.member(h0, p(1, period=(1,)))
    assert not ok and cert.kind == "period"
    ok, cert = S.member(h0, p(1, 0, period=(1,)))
    assert ok and cert == ("depth", 2)


def test_zero_block_family_membership():
    a1 = S.family("A_family", base=N((0,)), m=1)
    x = p(2, 0, 0, 0, period=(1,))
    # hand expansion: branch 2 needs x(1) = x(2) = 0, then x(3) = 0 for N(0)
    assert S.accepts(a1, x)
    assert not S.accepts(a1, p(2, 0, 1, 0, period=(1,)))
    assert S.accepts(S.family("A_family", base=N((0,)), m=1), p(3, 0, 0, 0, 0, period=(1,)))


def test_compile_shapes():
    union = S.compile_set(N((0, 1)) | N((2,)))
    assert isinstance(union, SetAutomaton)
    assert union.n_states == 5
    assert union.minimize().n_states == 4
    assert isinstance(S.compile_set(S.family("A_family", base=N((0,)), m=1)), S.SymbolicSet)
    full = S.compile_set(F)
    assert full.n_states == 1 and full.labels == (True,)


def test_bad_family_parameters():
    with pytest.raises(ConstructionError):
        S.family("A_family", base=N((0,)), m=-1)
    with pytest.raises(ConstructionError):
        S.family("cor5_psi", bits=(0, 2))
    with pytest.raises(ConstructionError):
        S.family("nope")


def test_tier_two_refused_by_automaton():
    with pytest.raises(UnsupportedTier):
        S.automaton(S.family("A_family", base=N((0,)), m=2))


def test_partition_totality_and_weakness(depth2_corpus):
    for _, e in depth2_corpus[::7]:
        aut = S.automaton(e)
        assert aut.is_weak()
        for q in range(aut.n_states):
            classes = [c for c, _ in aut.letter_classes(q)]
            reps = list(range(65)) + [101, 1000, 1001]
            for a in reps:
                hits = [c for c in classes if covers(c, a)]
                assert len(hits) == 1, (q, a, classes)
            defaults = [c for c in classes if isinstance(c, Default)]
            assert len(defaults) <= 1
            bound = min((c.threshold for c in classes if not isinstance(c, Explicit)), default=0)
            assert all(c.letter < bound for c in classes if isinstance(c, Explicit))


def test_partition_transitions_agree_with_step():
    aut = S.automaton(S.oplus(N((0,)), S.hits(1)))
    for q in range(aut.n_states):
        for cls, target in aut.letter_classes(q):
            for a in range(40):
                if covers(cls, a):
                    assert aut.step(q, a) == target


def test_osum_law():
    rng = random.Random(3)
    comps = [N((1,)), S.hits(0), ~N((2, 0))]
    default = S.hits(3)
    total = S.osum(comps, default)
    for _ in range(300):
        n = rng.randrange(6)
        x = random_point(rng, letters=4)
        inner = comps[n] if n < len(comps) else default
        assert S.accepts(total, x.prepend((n,))) == S.accepts(inner, x)


def test_concat_localize_adjoint():
    rng = random.Random(5)
    a = S.hits(0) & ~N((1,))
    for _ in range(200):
        x = random_point(rng, letters=3)
        s = tuple(rng.randrange(3) for _ in range(rng.randrange(3)))
        assert S.accepts(S.concat_prefix(s, a), x.prepend(s)) == S.accepts(a, x)
        assert S.accepts(S.localize(s, S.concat_prefix(s, a)), x) == S.accepts(a, x)
        if not S.accepts(N(s), x):
            assert not S.accepts(S.concat_prefix(s, a), x)


def test_de_morgan_and_double_complement(depth1_corpus):
    pts = sample_points(1000, seed=1)
    named = dict(depth1_corpus)
    items = list(named.values())
    for a, b in zip(items, items[1:] + items[:1]):
        lhs, rhs = S.minimal(~(a | b)), S.minimal(~a & ~b)
        twice = S.minimal(~~a)
        ma = S.minimal(a)
        for x in pts:
            assert lhs.accepts(x) == rhs.accepts(x)
            assert twice.accepts(x) == ma.accepts(x)


def test_tier_agreement_on_corpus(depth2_corpus):
    pts = sample_points(1000, seed=2)
    for _, e in depth2_corpus[::37]:
        aut = S.minimal(e)
        for x in pts:
            assert aut.accepts(x) == S.evaluate(e, x)[0]


def test_tier_agreement_on_families():
    pts = sample_points(1000, seed=4)
    for e in (S.family("cor5_psi", bits=(1, 0, 1)), S.hits(2),
              S.family("psi0", X=(1,), family=(N((5,)), N((0,)), ~S.hits(2))),
              S.family("claim_psi", base=N((0,)), bits=(1, 0))):
        aut = S.minimal(e)
        for x in pts:
            assert aut.accepts(x) == S.evaluate(e, x)[0]


def zero_blocks_oracle(letters, m, trunc=None):
    """Direct reading of A_m over N(0): m blocks "n then n zeros", then a 0."""
    pos = 0
    for _ in range(m):
        n = letters[pos]
        if trunc is not None and n >= trunc:
            return False
        if any(letters[pos + 1 + i] for i in range(n)):
            return False
        pos += 1 + n
    return letters[pos] == 0


def test_zero_block_family_against_oracle():
    base = N((0,))
    rng = random.Random(8)
    for m in (1, 2, 3):
        trunc_aut = S.minimal(S.family("A_trunc", base=base, m=m, trunc=6))
        full = S.family("A_family", base=base, m=m)
        for _ in range(400):
            x = Point(tuple(rng.choice((0, 0, 0, 1, 2, 3, 7)) for _ in range(rng.randrange(12))),
                      tuple(rng.choice((0, 0, 1)) for _ in range(rng.randint(1, 2))))
            letters = expand(x, 200)
            assert S.accepts(full, x) == zero_blocks_oracle(letters, m)
            assert trunc_aut.accepts(x) == zero_blocks_oracle(letters, m, trunc=6)


def test_family_sequences():
    assert [S.nk(k) for k in range(5)] == [0, 1, 2, 5, 26]
    assert S.sharp(0) == 0 and S.sharp(3) == 2
    for i in range(1001):
        k = S.sharp(i)
        assert S.nk(k) <= i < S.nk(k + 1)
    assert all(S.nk(k) < S.nk(k + 1) for k in range(1, 6))
    assert S.rho({2, 5}, 5) == 1 and S.rho({2, 5}, 4) == 0


def test_vec_membership_uses_period():
    assert S.accepts(~S.hits(1), vec(0))
    assert not S.accepts(~S.hits(0), vec(0))
