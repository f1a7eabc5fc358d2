from fractions import Fraction

import pytest

from wadgebench import degrees as DG
from wadgebench import sets as S
from wadgebench import transducers as T
from wadgebench.core import Point, vec
from wadgebench.errors import RejectedInput, UnsupportedTier

N = S.cylinder
E, F = S.Empty(), S.Full()


def test_n_of_r():
    assert DG.n_of_r(Fraction(1, 2)) == 0
    assert DG.n_of_r(Fraction(1, 4)) == 1
    assert DG.n_of_r(Fraction(3, 8)) == 1
    assert DG.n_of_r(Fraction(1, 9)) == 3
    for bad in (0, 1, Fraction(3, 2)):
        with pytest.raises(RejectedInput):
            DG.n_of_r(bad)


def test_rel_parse():
    assert DG.Rel.parse("Cr(1/4)").lead == 1
    assert DG.Rel.parse("Lip(2)").lead == 2
    assert str(DG.Rel.parse("LipB(3)")) == "LipB(3)"
    with pytest.raises(RejectedInput):
        DG.Rel.parse("Cr(3/2)")
    with pytest.raises(RejectedInput):
        DG.Rel.parse("Borel")


def test_leq_examples():
    assert DG.leq("L", E, F).status == "Fails"
    swap = DG.leq("L", N((0,)), N((1,)))
    assert swap.status == "Holds" and swap.check.holds
    assert T.apply(swap.witness, Point((0, 3), (0,)))[0] == 1
    assert T.apply(swap.witness, Point((1, 3), (0,)))[0] != 1
    same = DG.leq("C", N((0,)), N((0,)))
    assert same.status == "Holds" and same.note == "equal sets"
    assert DG.leq("Cr(1/4)", N((0,)), S.concat_prefix((0,), N((0,)))).status == "Fails"
    assert DG.leq("L", N((0,)), S.concat_prefix((0,), N((0,)))).status == "Holds"


def test_contraction_needs_more_than_nonexpansive():
    # clopen sets are L-selfdual, so inside one L-degree the contraction order is trivial
    assert DG.leq("L", N((0,)), N((1,))).status == "Holds"
    assert DG.leq("C", N((0,)), N((1,))).status == "Fails"
    assert DG.selfdual(N((0,)))


def test_half_contraction_equals_contraction(depth1_corpus):
    sets = [e for _, e in depth1_corpus]
    for a in sets:
        for b in sets:
            assert DG.leq("C", a, b).status == DG.leq("Cr(1/2)", a, b).status


def test_lipschitz_relations():
    cat = S.concat_prefix((0,), N((0,)))
    # 0⌢A sits strictly above A: one letter of lead is needed to come back down
    assert DG.leq("Lip(0)", cat, N((0,))).status == "Fails"
    assert DG.leq("Lip(1)", cat, N((0,))).status == "Holds"
    assert DG.leq("Lip(0)", N((0,)), cat).status == "Holds"
    assert DG.leq("LipB(2)", S.hits(0), N((0,))).status == "Unknown"
    assert DG.leq("W", N((0,)), S.hits(0)).status == "Holds"
    assert DG.leq("W", S.hits(0), N((0,))).status == "Fails"


def test_selfdual_examples():
    assert not DG.selfdual(E, "L")
    assert DG.selfdual(N((0,)), "L")
    assert not DG.selfdual(S.hits(0), "L")


def test_selfcontractible_examples():
    empty = DG.selfcontractible(E)
    assert empty and empty.witness == T.Const(vec(0))
    assert not DG.selfcontractible(N((0,)))
    h = DG.selfcontractible(S.hits(0))
    assert h and h.check.holds
    assert T.apply(h.witness, h.fixed_point) == h.fixed_point
    assert T.certify_lipschitz(h.witness, "D").constant <= Fraction(1, 2)


def test_tier_two_rejected():
    with pytest.raises(UnsupportedTier):
        DG.leq("L", S.family("A_family", base=N((0,)), m=1), N((0,)))


def test_verdicts_reverify(depth1_corpus):
    sets = [e for _, e in depth1_corpus]
    for rel in ("L", "C", "Cr(1/4)", "Lip(1)"):
        for a in sets:
            for b in sets:
                v = DG.leq(rel, a, b)
                if v.status == "Holds":
                    assert v.check.holds
                else:
                    assert v.counter_checked


def test_contraction_implies_nonexpansive(depth1_corpus):
    sets = [e for _, e in depth1_corpus]
    for a in sets:
        for b in sets:
            if DG.leq("C", a, b, verify=False):
                assert DG.leq("L", a, b, verify=False)


def test_selfcontractible_iff_nonselfdual(depth1_corpus):
    for _, a in depth1_corpus:
        assert bool(DG.selfcontractible(a)) == (not DG.selfdual(a, "L"))


def test_small_hasse_examples():
    h = DG.hasse([("empty", E), ("full", F)], "L")
    assert len(h.nodes) == 2 and h.edges == []
    groups = DG.equiv_classes([("a", N((0,))), ("b", N((1,))), ("ab", N((0,)) | N((1,)))], "L")
    assert any({"a", "b"} <= set(g) for g in groups)


def test_corpus_analysis_agrees_with_direct_games(depth1_corpus):
    an = DG.CorpusAnalysis(depth1_corpus)
    for i, (_, a) in enumerate(depth1_corpus):
        for j, (_, b) in enumerate(depth1_corpus):
            assert an.L(i, j) == bool(DG.leq("L", a, b, verify=False))
            assert an.C(i, j) == bool(DG.leq("C", a, b, verify=False))
            assert an.Cr(i, j, Fraction(1, 4)) == bool(DG.leq("Cr(1/4)", a, b, verify=False))


def test_audits_on_small_corpus(depth1_corpus):
    checks = DG.audit_theorems(depth1_corpus)
    for check in checks.values():
        assert check.checked and check.ok, check
    assert DG.roundtrip(depth1_corpus).ok


def test_depth_two_audits(depth2_audit):
    for name, check in depth2_audit.items():
        assert check.ok, (name, check.violations[:3])


def test_depth_two_hasse(depth2_analysis):
    an = depth2_analysis
    h = DG.hasse(an, "L")
    assert h.is_acyclic()
    index = {name: i for i, name in enumerate(an.names)}
    sources = {tuple(h.nodes[i].members) for i in h.sources()}
    empty_full = {tuple(n.members) for n in h.nodes
                  if any(S.minimal(an.exprs[index[m]]).canonical_key() in
                         (S.minimal(E).canonical_key(), S.minimal(F).canonical_key())
                         for m in n.members)}
    assert sources == empty_full and len(sources) == 2


def test_contraction_hasse_splits_selfdual_degrees(depth2_analysis):
    an = depth2_analysis
    lh, ch = DG.hasse(an, "L"), DG.hasse(an, "C")
    c_classes = {frozenset(n.members) for n in ch.nodes}
    expected = set()
    for node in lh.nodes:
        if node.selfdual:
            expected |= {frozenset([m]) for m in node.members}
        else:
            expected.add(frozenset(node.members))
    assert c_classes == expected
    assert ch.is_acyclic()
