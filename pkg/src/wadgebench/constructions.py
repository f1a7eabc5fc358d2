"""Explicit set families, their reduction witnesses, and self-checking packs.

A :class:`WitnessPack` bundles sets, transducers and a list of expected
outcomes.  ``pack.run()`` re-derives every outcome and reports each one, so a
pack is both documentation of a construction and its regression test.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import degrees as DG
from . import sets as S
from .core import DEFAULT_SEED, Point, vec
from .errors import ConstructionError, PreconditionError, RejectedInput, UnsupportedTier
from .metrics import Metric
from .sets import nk, rho, sharp
from .transducers import (Affine, Certified, Const, Copy, Drop, Half, Mask, MaxWith,
                          NotLipschitz, PadByFirstLetter, Prepend, Refuted, ZeroBlockLift,
                          AddConst, SquarePlusOne, apply, case, certify_lipschitz, compose,
                          fixed_point, flm, iterate, normalize, strip_prefix, verify_reduction)

__all__ = [
    "Check", "CheckResult", "WitnessPack", "PackReport", "AlmostInclusion", "Cofinite",
    "nk", "sharp", "rho", "almost_subset", "find_points",
    "cor5_psi", "cor5_pack", "claim_psi", "claim_witnesses",
    "prepare_base", "a_family", "a_trunc", "a_family_witnesses",
    "thm_psi", "thm_reduction_witness", "thm_pack",
    "psi0", "psi1", "psi0_witness", "psi1_witness", "psi0_pack", "psi1_pack",
    "counterexamples", "shrink", "PACKS", "named_pack",
]

MAX_BRANCHES = 5000


# -- packs ------------------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    """One expected outcome.

    ``kind`` is one of ``reduction`` (witness maps source onto target),
    ``certificate`` (Lipschitz certificate class), ``relation`` (game verdict
    of ``rel`` between two sets) or ``maps`` (witness sends a point to a point).
    Evidence checks are reported but never fail a pack.
    """

    kind: str
    label: str
    params: tuple
    expected: str
    evidence: bool = False

    def arg(self, key, default=None):
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class CheckResult:
    label: str
    kind: str
    expected: str
    observed: str
    ok: bool
    evidence: bool = False
    detail: str = ""

    def as_dict(self):
        out = {"label": self.label, "kind": self.kind, "expected": self.expected,
               "observed": self.observed, "ok": self.ok}
        if self.evidence:
            out["evidence_only"] = True
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class PackReport:
    name: str
    results: list

    @property
    def passed(self):
        return all(r.ok for r in self.results if not r.evidence)

    @property
    def violations(self):
        return [r for r in self.results if not r.evidence and not r.ok]

    def as_dict(self):
        return {"pack": self.name, "passed": self.passed,
                "checks": [r.as_dict() for r in self.results]}


@dataclass
class WitnessPack:
    name: str
    sets: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, kind, label, expected, evidence=False, **params):
        self.checks.append(Check(kind, label, tuple(params.items()), expected, evidence))

    def reduction(self, label, witness, source, target, mode="exact", samples=1000,
                  probes=(), depth=None):
        self.add("reduction", label, "Holds", witness=witness, source=source, target=target,
                 mode=mode, samples=samples, probes=tuple(probes), depth=depth)

    def run(self, seed=DEFAULT_SEED):
        return PackReport(self.name, [self._run_check(c, seed) for c in self.checks])

    def _set(self, key):
        try:
            return self.sets[key]
        except KeyError:
            raise ConstructionError(f"pack {self.name!r} has no set {key!r}") from None

    def _witness(self, key):
        try:
            return self.witnesses[key]
        except KeyError:
            raise ConstructionError(f"pack {self.name!r} has no witness {key!r}") from None

    def _run_check(self, c, seed):
        if c.kind == "reduction":
            t = self._witness(c.arg("witness"))
            a, b = self._set(c.arg("source")), self._set(c.arg("target"))
            mode = c.arg("mode")
            v = verify_reduction(t, a, b, mode=mode, samples=c.arg("samples"), seed=seed,
                                 extra_points=c.arg("probes"))
            observed = "Holds" if v.holds else "Fails"
            detail = f"{mode}, {v.checked} {'points' if mode == 'sampled' else 'product states'}"
            if c.arg("depth") is not None:
                detail += f", truncation {c.arg('depth')}"
            if v.counterexample is not None:
                detail += f", counterexample {v.counterexample}"
            return CheckResult(c.label, c.kind, c.expected, observed,
                               observed == c.expected, c.evidence, detail)
        if c.kind == "certificate":
            t = self._witness(c.arg("witness"))
            cert = certify_lipschitz(t, c.arg("metric"), c.arg("constant"))
            observed = type(cert).__name__
            detail = _describe_certificate(cert)
            return CheckResult(c.label, c.kind, c.expected, observed,
                               observed == c.expected, c.evidence, detail)
        if c.kind == "relation":
            a, b = self._set(c.arg("left")), self._set(c.arg("right"))
            verdict = DG.leq(c.arg("rel"), a, b, verify=c.arg("verify", True))
            observed = verdict.status
            ok = observed == c.expected
            if isinstance(verdict, DG.Holds) and verdict.check is not None and not verdict.check.holds:
                ok, observed = False, "Holds (witness failed verification)"
            return CheckResult(c.label, c.kind, c.expected, observed, ok, c.evidence,
                               getattr(verdict, "note", "") or getattr(verdict, "game", ""))
        if c.kind == "maps":
            t = self._witness(c.arg("witness"))
            got = apply(t, c.arg("point"))
            want = c.arg("image")
            observed = str(got)
            return CheckResult(c.label, c.kind, c.expected, observed, got == want, c.evidence)
        raise RejectedInput(f"unknown check kind {c.kind!r}")


def _describe_certificate(cert):
    match cert:
        case Certified(metric, constant):
            return f"{metric.value} constant {constant}"
        case Refuted(metric, bound, x, y):
            return f"{metric.value} bound {bound} violated at ({x}, {y})"
        case NotLipschitz(metric, family, _):
            return f"{metric.value}: {family}"
    return f"{cert.metric.value}: {cert.reason}"


# -- finite and cofinite index sets -------------------------------------------------------------


@dataclass(frozen=True)
class Cofinite:
    """The natural numbers minus a finite set."""

    excluded: frozenset = frozenset()

    def __contains__(self, k):
        return k not in self.excluded


@dataclass(frozen=True)
class AlmostInclusion:
    holds: bool
    kbar: int | None

    def __bool__(self):
        return self.holds


def almost_subset(xs, ys):
    """Whether every k >= kbar in ``xs`` lies in ``ys``; reports the least such kbar."""
    x_cof, y_cof = isinstance(xs, Cofinite), isinstance(ys, Cofinite)
    if x_cof and not y_cof:
        return AlmostInclusion(False, None)
    if x_cof:
        bad = ys.excluded - xs.excluded
    elif y_cof:
        bad = set(xs) & ys.excluded
    else:
        bad = set(xs) - set(ys)
    return AlmostInclusion(True, max(bad) + 1 if bad else 0)


# -- sample points ---------------------------------------------------------------------------------


def _candidates():
    for a in range(4):
        yield vec(a)
    for a in range(17):
        for b in range(4):
            yield Point((a,), (b,))
            for c in range(3):
                yield Point((a, b), (c,))


def find_points(a):
    """A point outside and a point inside ``a`` (in that order)."""
    y0 = y1 = None
    for x in _candidates():
        inside = S.accepts(a, x)
        if inside and y1 is None:
            y1 = x
        if not inside and y0 is None:
            y0 = x
        if y0 is not None and y1 is not None:
            return y0, y1
    raise PreconditionError("could not find both a member and a non-member among short points")


def _zero_block_word(rng, levels, trunc):
    word = []
    for _ in range(levels):
        n = trunc if trunc is not None and rng.random() < 0.05 else rng.choice((0, 1, 1, 2, 3))
        zeros = [0] * n
        if n and rng.random() < 0.1:
            zeros[rng.randrange(n)] = 1 + rng.randrange(2)
        word += [n] + zeros
    return word


def _probes(rng, count, make_prefix, y0, y1):
    out = []
    for _ in range(count):
        tail = y1 if rng.random() < 0.6 else y0
        out.append(tail.prepend(tuple(make_prefix(rng))))
    return out


# -- a depth-one antichain ------------------------------------------------------------------------------


def cor5_psi(bits):
    """N(0) together with N(n + 2) for every n with bits[n] = 1 (a clopen set of depth 1)."""
    return S.family("cor5_psi", bits=tuple(bits))


def _all_words(width):
    for code in range(1, 2 ** width):
        yield tuple((code >> (width - 1 - i)) & 1 for i in range(width))


def cor5_pack(width=4):
    """Pairwise L-equivalence and C-incomparability over all nonzero words of ``width`` bits."""
    pack = WitnessPack("cor5")
    words = list(_all_words(width))
    for w in words:
        pack.sets["".join(map(str, w))] = cor5_psi(w)
    names = list(pack.sets)
    for i, p in enumerate(names):
        for q in names[i + 1:]:
            for a, b in ((p, q), (q, p)):
                pack.add("relation", f"{a} <=L {b}", "Holds", rel="L", left=a, right=b)
                pack.add("relation", f"{a} <=C {b}", "Fails", rel="C", left=a, right=b,
                         verify=False)
    return pack


# -- the even/odd interleaving claim ---------------------------------------------------------------


def claim_psi(a, bits):
    return S.family("claim_psi", base=a, bits=tuple(bits))


def claim_witnesses(bits, y0, y1):
    """(f, g): f doubles the first letter, g undoes it on even letters and decides odd ones."""
    f = flm({}, Affine(2, 0))
    odd = {2 * i + 1: Const(y1 if b else y0) for i, b in enumerate(bits)}
    g = case(odd, default=flm({}, Half()), odd_default=Const(y0))
    return f, g


def claim_pack(a, bits, trunc=10, y0=None, y1=None, samples=1000, seed=DEFAULT_SEED):
    if y0 is None or y1 is None:
        raise PreconditionError("claim_psi needs a fixed non-member y0 and member y1 of the base")
    if S.accepts(a, y0) or not S.accepts(a, y1):
        raise PreconditionError("y0 must lie outside the base and y1 inside it")
    bits = tuple(bits)
    psi = claim_psi(a, bits)
    f, g = claim_witnesses(bits, y0, y1)
    pack = WitnessPack("claim-psi", {"A": a, "psi": psi}, {"f": f, "g": g})
    exact = _has_exact_form(psi) and _has_exact_form(a)
    mode = "exact" if exact else "sampled"
    if not exact:
        pack.notes.append("the base has no exact form for this construction; checks are sampled")
    pack.reduction("A <=L psi via f", "f", "A", "psi", mode, depth=trunc)
    pack.reduction("psi <=L A via g", "g", "psi", "A", mode, depth=trunc)
    rng = random.Random(seed)
    probes = _probes(rng, 200, lambda r: [r.randrange(2 * len(bits) + 4)], y0, y1)
    pack.reduction("A <=L psi via f (sampled)", "f", "A", "psi", "sampled", samples, probes)
    pack.reduction("psi <=L A via g (sampled)", "g", "psi", "A", "sampled", samples, probes)
    for c in ("f", "g"):
        pack.add("certificate", f"{c} is nonexpansive for d", "Certified",
                 witness=c, metric=Metric.D, constant=1)
    pack.add("maps", "f sends 3 vec0 to 6 vec0", "Holds",
             witness="f", point=Point((3,), (0,)), image=Point((6,), (0,)))
    if len(bits) > 1:
        want = y1 if bits[1] else y0
        pack.add("maps", "g decides letter 3 by the second bit", "Holds",
                 witness="g", point=Point((3,), (0,)), image=want)
    return pack


def _has_exact_form(e):
    try:
        S.minimal(e)
    except (ConstructionError, UnsupportedTier):
        return False
    return True


# -- the zero-block family -------------------------------------------------------------------------


def prepare_base(a):
    """Return (base, replaced): ``a`` if it L-reduces to its complement, else a (+) not-a."""
    if S.tier(a) != 1:
        raise UnsupportedTier("the zero-block family needs a tier-1 base")
    if isinstance(DG.leq("L", a, S.Complement(a), verify=False), DG.Holds):
        return a, False
    return S.oplus(a, S.Complement(a)), True


def a_family(a, m):
    """Level ``m`` of the zero-block family over ``a`` (after :func:`prepare_base`)."""
    base, _ = prepare_base(a)
    if m == 0:
        return base
    return S.family("A_family", base=base, m=m)


def a_trunc(base, m, trunc):
    if m == 0:
        return base
    return S.family("A_trunc", base=base, m=m, trunc=trunc)


def _fillers(y, m):
    """y, 0y, 00y, ...: level-j points that take the n = 0 branch at every level."""
    return [y.prepend((0,) * j) for j in range(m + 1)]


def negation_witness(h0, y1, m, trunc=None):
    """Reduction of level m to its complement, built from a base witness ``h0``."""
    inside = _fillers(y1, m)
    h = h0
    for j in range(1, m + 1):
        lift = ZeroBlockLift(h, inside[j - 1])
        if trunc is None:
            h = lift
        else:
            h = case({n: lift for n in range(trunc)}, default=Const(inside[j]))
    return h


def pad_step(trunc=None):
    """Reduction of level j to level j + 1 (letter n, n zeros, then the whole input)."""
    if trunc is None:
        return PadByFirstLetter()
    jump = Prepend((trunc - 1,) + (0,) * (trunc - 1))
    return case({n: PadByFirstLetter() for n in range(trunc)}, default=jump)


def pad_chain(steps, trunc=None):
    return iterate(pad_step(trunc), steps)


def a_family_witnesses(a, m, trunc=12, samples=1000, shift_word=(1, 0), evidence_k=6,
                       evidence_trunc=8, seed=DEFAULT_SEED):
    """Witness pack for the zero-block family up to level ``m``.

    Exact checks run on the family truncated at ``trunc``; sampled checks run
    on the untruncated symbolic sets.  Property c) is reported as bounded
    search evidence only.
    """
    base, replaced = prepare_base(a)
    y0, y1 = find_points(base)
    h0 = DG.leq("L", base, S.Complement(base)).witness
    pack = WitnessPack(f"a-family(m={m})")
    if replaced:
        pack.notes.append("base replaced by A (+) not-A so that it reduces to its complement")
    pack.notes.append("property c) is not machine-checked; the bounded search below is evidence only")
    rng = random.Random(seed)
    outside = _fillers(y0, m)
    for j in range(m + 1):
        pack.sets[f"A{j}"] = a_family(base, j) if j else base
        pack.sets[f"not A{j}"] = S.Complement(pack.sets[f"A{j}"])
        pack.sets[f"A{j}|{trunc}"] = a_trunc(base, j, trunc)
        pack.sets[f"not A{j}|{trunc}"] = S.Complement(pack.sets[f"A{j}|{trunc}"])

    def probes(levels):
        return _probes(rng, 200, lambda r: _zero_block_word(r, levels, trunc), y0, y1)

    for j in range(m + 1):
        # a) level j reduces to its complement
        pack.witnesses[f"h{j}"] = negation_witness(h0, y1, j)
        pack.witnesses[f"h{j}|{trunc}"] = negation_witness(h0, y1, j, trunc)
        pack.reduction(f"a) A{j} <=L not A{j} (truncated)", f"h{j}|{trunc}",
                       f"A{j}|{trunc}", f"not A{j}|{trunc}", "exact", depth=trunc)
        pack.reduction(f"a) A{j} <=L not A{j}", f"h{j}", f"A{j}", f"not A{j}",
                       "sampled", samples, probes(j))
        # d) a finite prefix does not change the Lipschitz degree
        word = tuple(shift_word)
        pack.sets[f"s A{j}|{trunc}"] = S.concat_prefix(word, pack.sets[f"A{j}|{trunc}"])
        pack.sets[f"s A{j}"] = S.concat_prefix(word, pack.sets[f"A{j}"])
        pack.witnesses[f"prepend{j}"] = Prepend(word)
        pack.witnesses[f"strip{j}"] = strip_prefix(word, outside[j])
        for tag, src, dst in ((f"prepend{j}", f"A{j}", f"s A{j}"), (f"strip{j}", f"s A{j}", f"A{j}")):
            pack.reduction(f"d) {src} <=Lip {dst} (truncated)", tag,
                           f"{src}|{trunc}", f"{dst}|{trunc}", "exact", depth=trunc)
            pack.reduction(f"d) {src} <=Lip {dst}", tag, src, dst, "sampled", samples,
                           [p.prepend(word) if src.startswith("s") else p for p in probes(j)])
        # e) same Wadge degree as the base, at truncation
        pack.add("relation", f"e) A{j} <=W A (truncated)", "Holds",
                 rel="W", left=f"A{j}|{trunc}", right="A0")
        pack.add("relation", f"e) A <=W A{j} (truncated)", "Holds",
                 rel="W", left="A0", right=f"A{j}|{trunc}")
    # b) lower levels reduce to higher ones through a chain of pad steps
    for hi in range(1, m + 1):
        for lo in range(hi):
            key = f"pad{lo}->{hi}"
            pack.witnesses[key] = pad_chain(hi - lo)
            pack.witnesses[f"{key}|{trunc}"] = pad_chain(hi - lo, trunc)
            pack.reduction(f"b) A{lo} <=L A{hi} (truncated)", f"{key}|{trunc}",
                           f"A{lo}|{trunc}", f"A{hi}|{trunc}", "exact", depth=trunc)
            pack.reduction(f"b) A{lo} <=L A{hi}", key, f"A{lo}", f"A{hi}", "sampled", samples,
                           probes(lo))
    # c) bounded search for Lipschitz reductions downwards: evidence only
    for hi in range(1, m + 1):
        pack.sets[f"A{hi}|{evidence_trunc}"] = a_trunc(base, hi, evidence_trunc)
        for lo in range(hi):
            pack.sets.setdefault(f"A{lo}|{evidence_trunc}", a_trunc(base, lo, evidence_trunc))
            for k in range(evidence_k + 1):
                pack.add("relation", f"c) A{hi} <=Lip({k}) A{lo} (truncated {evidence_trunc})",
                         "Fails", evidence=True, rel=f"Lip({k})",
                         left=f"A{hi}|{evidence_trunc}", right=f"A{lo}|{evidence_trunc}",
                         verify=False)
    return pack


# -- the almost-inclusion embedding ------------------------------------------------------------------


def _level(xs, k):
    return 3 * k + rho(xs, k)


def thm_psi(xs, a, trunc=None):
    """Sum over i of level 3 sharp(i) + [sharp(i) in X] of the zero-block family over ``a``."""
    base, _ = prepare_base(a)
    return S.family("thm_psi", X=frozenset(xs), base=base, trunc=trunc)


def thm_reduction_witness(xs, ys, kbar=None):
    """Reduction of thm_psi(X) to thm_psi(Y): i x -> max(i, n_kbar) g(x).

    ``g`` is the pad chain lifting level 3 sharp(i) + [sharp(i) in X] to the
    target level of the output branch.
    """
    xs, ys = frozenset(xs), frozenset(ys)
    inc = almost_subset(xs, ys)
    if not inc:
        raise PreconditionError("X is not almost included in Y")
    if kbar is None:
        kbar = inc.kbar
    if kbar < inc.kbar:
        raise PreconditionError(f"kbar = {kbar} is too small; X and Y disagree at {inc.kbar - 1}")
    floor = nk(kbar)
    branches = {}

    def add(i, steps):
        if len(branches) >= MAX_BRANCHES:
            raise ConstructionError("too many explicit branches; choose a smaller kbar or sets")
        if steps:
            branches[i] = compose(Prepend((i,)), pad_chain(steps), Drop(1))

    target = _level(ys, kbar)
    for i in range(floor):
        add(i, target - _level(xs, sharp(i)))
    for k in sorted(ys - xs):
        if k >= kbar:
            for i in range(nk(k), nk(k + 1)):
                add(i, 1)
    return normalize(compose(flm({}, MaxWith(floor)), case(branches)))


def _thm_probe(xs, trunc):
    def make(rng):
        i = rng.randrange(trunc + 2)
        levels = _level(xs, sharp(i)) + rng.choice((0, 0, 0, 1, -1))
        return [i] + _zero_block_word(rng, max(levels, 0), None)
    return make


def thm_pack(xs, ys, a, trunc=8, kbar=None, samples=1000, seed=DEFAULT_SEED):
    xs, ys = frozenset(xs), frozenset(ys)
    f = thm_reduction_witness(xs, ys, kbar)
    kbar = almost_subset(xs, ys).kbar if kbar is None else kbar
    if nk(kbar) >= trunc:
        raise PreconditionError("the truncation must exceed n_kbar")
    base, _ = prepare_base(a)
    y0, y1 = find_points(base)
    pack = WitnessPack("thm-psi", {"psi X": thm_psi(xs, base, trunc),
                                   "psi Y": thm_psi(ys, base, trunc)}, {"f": f})
    pack.notes.append("the converse direction is not machine-checked")
    rng = random.Random(seed)
    probes = _probes(rng, 300, _thm_probe(xs, trunc), y0, y1)
    probes += _probes(rng, 300, _thm_probe(ys, trunc), y0, y1)
    pack.add("certificate", "f is nonexpansive for d0", "Certified",
             witness="f", metric=Metric.D0, constant=1)
    pack.reduction("psi(X) <=L(d0) psi(Y)", "f", "psi X", "psi Y", "sampled", samples, probes,
                   depth=trunc)
    return pack


# -- stand-in families indexed by a set of naturals -----------------------------------------------


def _family_tuple(fam):
    fam = tuple(fam)
    if not fam:
        raise PreconditionError("the stand-in family must be nonempty")
    for c in fam:
        if S.tier(c) != 1:
            raise PreconditionError("stand-in family members must be tier-1 sets")
    return fam


def psi0(xs, fam):
    return S.family("psi0", X=frozenset(xs), family=_family_tuple(fam))


def psi1(xs, fam):
    return S.family("psi1", X=frozenset(xs), family=_family_tuple(fam))


def psi0_witness(xs):
    """Identity on branches in X, constant vec0 elsewhere."""
    return case({n: Copy() for n in sorted(xs)}, default=Const(vec(0)))


def psi1_witness(schedule):
    """Staged padding: branch n gains ``steps`` zeros right after its first letter.

    ``schedule`` maps each n of X to the stage at which n is enumerated;
    branches never enumerated emit n followed by zeros forever.
    """
    branches = {n: compose(Prepend((n,) + (0,) * steps), Drop(1))
                for n, steps in sorted(dict(schedule).items())}
    return case(branches, default=Mask(1, vec(0)))


def _check_schedule(xs, schedule):
    schedule = dict(schedule)
    missing = set(xs) - set(schedule)
    if missing:
        raise PreconditionError(f"schedule does not enumerate {sorted(missing)}")
    extra = set(schedule) - set(xs)
    if extra:
        raise PreconditionError(f"schedule enumerates {sorted(extra)}, which are not in X")
    if any(not isinstance(s, int) or s < 0 for s in schedule.values()):
        raise PreconditionError("schedule steps must be natural numbers")
    return schedule


DEFAULT_STANDINS = tuple(S.Complement(S.hits(n + 1)) for n in range(3))


def psi0_pack(xs=(1,), ys=(1, 2), fam=DEFAULT_STANDINS, depth=10):
    xs, ys = frozenset(xs), frozenset(ys)
    if not xs <= ys:
        raise PreconditionError("X must be a subset of Y")
    fam = _family_tuple(fam)
    target = psi0(ys, fam)
    if S.accepts(target, vec(0)):
        raise PreconditionError("vec0 lies in psi0(Y), so the constant branch is not a reduction")
    pack = WitnessPack("psi0", {"psi0 X": psi0(xs, fam), "psi0 Y": target},
                       {"f": psi0_witness(xs)})
    pack.notes.append("stand-in families are tier-1 sets; only the positive reduction is checked")
    pack.reduction("psi0(X) <=L psi0(Y)", "f", "psi0 X", "psi0 Y", "exact", depth=depth)
    outside = next((n for n in range(len(fam) + 8) if n not in xs), None)
    pack.add("maps", f"f sends {outside} vec1 to vec0", "Holds",
             witness="f", point=Point((outside,), (1,)), image=vec(0))
    return pack


def psi1_pack(xs=(1,), ys=(1, 2), fam=DEFAULT_STANDINS, schedule=None, samples=1000,
              seed=DEFAULT_SEED):
    xs, ys = frozenset(xs), frozenset(ys)
    if not xs <= ys:
        raise PreconditionError("X must be a subset of Y")
    fam = _family_tuple(fam)
    if schedule is None:
        schedule = {n: 2 for n in xs}
    schedule = _check_schedule(xs, schedule)
    pack = WitnessPack("psi1", {"psi1 X": psi1(xs, fam), "psi1 Y": psi1(ys, fam)},
                       {"phi": psi1_witness(schedule)})
    pack.notes.append("stand-in families are tier-1 sets; only the positive reduction is checked")
    rng = random.Random(seed)
    points = [find_points(c) for c in fam]
    probes = []
    for _ in range(400):
        n = rng.randrange(len(fam) + 1)
        y0, y1 = points[n % len(fam)]
        zeros = (0,) * rng.randrange(4)
        tail = y1 if rng.random() < 0.6 else y0
        probes.append(tail.prepend((n,) + zeros + (1 + rng.randrange(3),)))
        if rng.random() < 0.1:
            probes.append(Point((n,) + zeros, (0,)))
    pack.reduction("psi1(X) <=L psi1(Y)", "phi", "psi1 X", "psi1 Y", "sampled", samples, probes)
    pack.add("certificate", "phi is nonexpansive for d", "Certified",
             witness="phi", metric=Metric.D, constant=1)
    n, steps = min(schedule.items())
    pack.add("maps", f"phi pads branch {n} with {steps} zeros", "Holds", witness="phi",
             point=Point((n, 3, 4), (5,)), image=Point((n,) + (0,) * steps + (3, 4), (5,)))
    return pack


# -- metric counterexamples and shrinking ------------------------------------------------------------


def counterexamples():
    """Three first-letter maps separating the inclusion relations between the metrics."""
    pack = WitnessPack("counterexamples", witnesses={
        "id": Copy(),
        "add1": flm({}, AddConst(1)),
        "sq1": flm({}, SquarePlusOne()),
    })
    half = Fraction(1, 2)
    expected = [
        ("id", Metric.D0, 1, "Certified"),
        ("id", Metric.D, half, "Refuted"),
        ("add1", Metric.D, 1, "Certified"),
        ("add1", Metric.D0, 1, "Refuted"),
        ("add1", Metric.D0, 2, "Certified"),
        ("sq1", Metric.D, 1, "Certified"),
        ("sq1", Metric.D0, None, "NotLipschitz"),
    ]
    for name, metric, constant, want in expected:
        bound = "" if constant is None else f" <= {constant}"
        pack.add("certificate", f"{name} under {metric.value}{bound}", want,
                 witness=name, metric=metric, constant=constant)
    return pack


def shrink(a, t, s):
    """Pack showing A reduces by a contraction to its part inside N(s), and A =W A & N(s)."""
    s = tuple(s)
    check = verify_reduction(t, a, a)
    if not check.holds:
        raise PreconditionError("the transducer does not reduce A to itself")
    cert = certify_lipschitz(t, Metric.D, Fraction(1, 2))
    if not isinstance(cert, Certified):
        raise PreconditionError("the transducer is not a certified contraction")
    x_fix = fixed_point(t)
    if x_fix.take(len(s)) != s:
        raise PreconditionError(f"the fixed point {x_fix} does not lie in N({s})")
    g = normalize(iterate(t, len(s)))
    part = S.Intersection(a, S.cylinder(s))
    pack = WitnessPack("shrink", {"A": a, "A & N(s)": part}, {"T": t, "g": g})
    pack.reduction("A <= A & N(s) via g", "g", "A", "A & N(s)", "exact", depth=len(s))
    pack.add("certificate", "g is a contraction for d", "Certified",
             witness="g", metric=Metric.D, constant=Fraction(1, 2))
    pack.add("maps", "T fixes its fixed point", "Holds", witness="T", point=x_fix, image=x_fix)
    pack.add("relation", "A <=W A & N(s)", "Holds", rel="W", left="A", right="A & N(s)")
    pack.add("relation", "A & N(s) <=W A", "Holds", rel="W", left="A & N(s)", right="A")
    return pack


def hits_zero_shrink(prefix_len=3):
    a = S.hits(0)
    sc = DG.selfcontractible(a)
    if not sc:
        raise ConstructionError("hits(0) is expected to be selfcontractible")
    return shrink(a, sc.witness, sc.fixed_point.take(prefix_len))


# -- registry ----------------------------------------------------------------------------------


N0 = S.cylinder((0,))

PACKS = {
    "counterexamples": counterexamples,
    "cor5": cor5_pack,
    "claim-psi": lambda: claim_pack(N0, (1, 0), 10, Point((1,), (1,)), vec(0)),
    "a-family": lambda: a_family_witnesses(N0, 3),
    "thm-psi": lambda: thm_pack({0}, {0, 1}, N0, 8),
    "psi0": psi0_pack,
    "psi1": psi1_pack,
    "shrink": hits_zero_shrink,
}


def named_pack(name):
    try:
        return PACKS[name]()
    except KeyError:
        raise RejectedInput(f"unknown pack {name!r}; known packs: {', '.join(PACKS)}") from None
