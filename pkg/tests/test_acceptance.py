"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""

import io
import itertools
import json
import random
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from wadgebench import constructions as C
from wadgebench import degrees as DG
from wadgebench import dsl
from wadgebench import sets as S
from wadgebench import transducers as T
from wadgebench.cli import main
from wadgebench.core import random_point
from wadgebench.metrics import (Metric, d, d0, d1_is_image_of_d0, dagger_check, distance,
                                in_range, ultrametric_check)

ROOT = Path(__file__).parent.parent
CORPORA = ROOT / "corpora"


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        with capsys.disabled():
            print(f"\n{line}")
        assert ok, line
    return emit


def canonical(e):
    return S.minimal(e).canonical_key()


def test_01_game_witness_round_trip(depth2_analysis, report):
    an = depth2_analysis
    undetermined = sum(an.games.verdict(i, j).winner not in ("I", "II")
                       or (an.games.verdict(i, j).winner == "II") != an.L(i, j)
                       for i in range(an.n) for j in range(an.n))
    check = DG.roundtrip(an)
    report(1, "every pair determined, witness exact with role bound",
           undetermined == 0 and check.ok and check.checked == an.n * an.n,
           f"{an.n} sets, {check.checked} pairs, {len(check.violations)} violations")


def test_02_sslo(depth2_audit, report):
    c = depth2_audit["sslo"]
    report(2, "A <=L B or not B <=C A", c.ok, f"{c.checked} pairs")


def test_03_banach(depth2_analysis, depth2_audit, report):
    an = depth2_analysis
    no_c = all(not an.C_neg_to(i, i) for i in range(an.n))
    ii_self = all(an.games.verdict(i, i).winner == "II" for i in range(an.n))
    c = depth2_audit["banach"]
    report(3, "no contraction reduces A to not A", c.ok and no_c and ii_self, f"{an.n} sets")


def test_04_selfcontractible_iff_nonselfdual(depth2_audit, report):
    c = depth2_audit["cor2"]
    h = DG.selfcontractible(S.hits(0))
    fixed = h and T.apply(h.witness, h.fixed_point) == h.fixed_point
    exact = h and h.check.holds and h.check.mode == "exact"
    contraction = h and T.certify_lipschitz(h.witness, Metric.D).constant <= Fraction(1, 2)
    report(4, "selfcontractible iff L-nonselfdual; hits(0) witness and fixed point",
           c.ok and bool(fixed) and bool(exact) and bool(contraction),
           f"{c.checked} sets, fixed point {h.fixed_point}")


def test_05_open_sets_contract_to_hits_zero(depth2_corpus, report):
    target = S.hits(0)
    opens = [(name, e) for name, e in depth2_corpus if DG.is_open(e)]
    bad = [name for name, e in opens
           if not (v := DG.leq("C", e, target)) or not v.check.holds]
    report(5, "every open B satisfies B <=C hits(0)", not bad and len(opens) > 0,
           f"{len(opens)} open sets, {len(bad)} exceptions")


def test_06_cor5_antichain(report):
    sets = [C.cor5_psi(w) for w in itertools.product((0, 1), repeat=4) if any(w)]
    bad = 0
    for i, a in enumerate(sets):
        for j, b in enumerate(sets):
            if i != j:
                bad += DG.leq("L", a, b).status != "Holds"
                bad += DG.leq("C", a, b).status != "Fails"
    report(6, "15 sets pairwise L-equivalent and C-incomparable",
           len(sets) == 15 and bad == 0, f"{bad} exceptions")


def test_07_degree_audits(depth2_audit, report):
    names = ["differentdegrees", "samedegree", "cor1", "cor6", "c_in_l",
             "c(r) r=1/2", "c(r) r=1/4", "c(r) r=1/8"]
    bad = {n: len(depth2_audit[n].violations) for n in names if not depth2_audit[n].ok}
    n0 = S.cylinder((0,))
    shifted = S.concat_prefix((0,), n0)
    cr = DG.leq("Cr(1/4)", n0, shifted)
    lv = DG.leq("L", n0, shifted)
    report(7, "degree audits; Cr(1/4) N(0) vs 0N(0) Fails while L Holds",
           not bad and cr.status == "Fails" and cr.counter_checked
           and lv.status == "Holds" and lv.check.holds,
           f"{sum(depth2_audit[n].checked for n in names)} checks, violations {bad or 0}")


def test_08_metrics(report):
    rng = random.Random(8)
    bad = 0
    for _ in range(10_000):
        x, y, z = (random_point(rng, letters=5) for _ in range(3))
        for m in Metric:
            bad += not ultrametric_check(m, x, y, z)
            bad += not in_range(m, distance(m, x, y))
    for _ in range(10_000):
        x, y = random_point(rng, letters=5), random_point(rng, letters=5)
        bad += not dagger_check(x, y)
        bad += d(x, y) > d0(x, y)
        bad += not d1_is_image_of_d0(x, y)
    report(8, "ultrametric, ranges, dagger, d <= d0, d1 = i(d0)", bad == 0,
           f"10^4 triples and pairs, {bad} violations")


def test_09_inclusion_witnesses(report):
    pack = C.counterexamples().run()
    rng = random.Random(9)
    found = dict(contraction=0, l_d0=0, lip=0)
    bad = 0
    tries = 0
    while min(found.values()) < 100 and tries < 20_000:
        tries += 1
        t = T.random_transducer(rng, 3)
        cd = T.certify_lipschitz(t, Metric.D)
        if isinstance(cd, T.Certified):
            if cd.constant <= Fraction(1, 2) and found["contraction"] < 100:
                found["contraction"] += 1
                bad += not isinstance(T.certify_lipschitz(t, Metric.D0, 1), T.Certified)
            if found["lip"] < 100:
                k = 0
                while Fraction(2) ** k < cd.constant:
                    k += 1
                found["lip"] += 1
                bound = Fraction(2) ** (k + 1)
                bad += not isinstance(T.certify_lipschitz(t, Metric.D1, bound), T.Certified)
        if found["l_d0"] < 100 and isinstance(T.certify_lipschitz(t, Metric.D0, 1), T.Certified):
            found["l_d0"] += 1
            bad += not isinstance(T.certify_lipschitz(t, Metric.D, 1), T.Certified)
    report(9, "counterexample certificates and three inclusion samples",
           pack.passed and bad == 0 and min(found.values()) == 100,
           f"{found}, {tries} generated, {bad} violations")


def test_10_zero_block_family_and_embedding(report):
    fam = C.a_family_witnesses(S.cylinder((0,)), 3, trunc=12, samples=1000)
    fam_report = fam.run()
    ab = [r for r in fam_report.results if r.label[:2] in ("a)", "b)")]
    evidence = [r for r in fam_report.results if r.evidence]
    f = C.thm_reduction_witness({0}, {0, 1})
    cert = T.certify_lipschitz(f, Metric.D0)
    thm = C.thm_pack({0}, {0, 1}, S.cylinder((0,)), trunc=8, samples=1000).run()
    ok = (fam_report.passed and ab and all(r.ok for r in ab)
          and cert == T.Certified(Metric.D0, 1) and thm.passed
          and evidence and all(r.label.startswith("c)") for r in evidence))
    report(10, "A_m packs for m <= 3; X={0} into Y={0,1} witness", ok,
           f"{len(ab)} a/b checks, {len(evidence)} evidence-only c) searches")


def test_11_stand_in_families(report):
    p0 = C.psi0_pack((1,), (1, 2), depth=10).run()
    p1 = C.psi1_pack((1,), (1, 2), samples=1000).run()
    report(11, "psi0 exact and psi1 sampled for X={1} in Y={1,2}",
           p0.passed and p1.passed and len(C.DEFAULT_STANDINS) == 3)


def _cli(*argv):
    out = io.StringIO()
    return main(list(argv), out), out.getvalue()


def test_12_cli_determinism(tmp_path, report):
    trips = []
    for path in sorted(CORPORA.glob("*.wdg")):
        code, text = _cli("fmt", str(path))
        trips.append(code == 0 and dsl.parse(text) == dsl.parse(path.read_text()))
    argv = [sys.executable, "-m", "wadgebench", "--json", "pack", "run", "psi1"]
    runs = [subprocess.run(argv, capture_output=True, check=False).stdout for _ in range(2)]
    same = runs[0] == runs[1] and json.loads(runs[0])["passed"]
    dot = tmp_path / "depth2.dot"
    code, text = _cli("--json", "hasse", str(CORPORA / "depth2.wdg"), "--dot", str(dot))
    h = json.loads(text)
    corpus = dict(dsl.parse((CORPORA / "depth2.wdg").read_text()).sets())
    minimal = {canonical(corpus[m[0]]) for m in h["minimal"]}
    ok = (all(trips) and same and code == 0 and h["acyclic"] and dot.exists()
          and minimal == {canonical(S.Empty()), canonical(S.Full())})
    report(12, "fmt round trip, identical JSON, acyclic Hasse with minima empty and full", ok,
           f"{len(trips)} corpus files, {h['classes']} classes")
