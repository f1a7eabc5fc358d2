"""Set expressions, their compilation to automata, and a symbolic evaluator.

Expressions whose branch depth is uniformly bounded compile to a
``SetAutomaton`` (tier 1).  Families whose depth grows with the first
letter (the zero-block hierarchy, the indexed sums over it, and the
staged ψ1 sets) are wrapped in a ``SymbolicSet`` (tier 2) that decides
membership of ultimately periodic points directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import automata as au
from .automata import Certificate, SetAutomaton
from .core import Point
from .errors import ConstructionError, RejectedInput, UnsupportedTier


class SetExpr:
    """Base class of the set expression AST (all nodes are frozen dataclasses)."""

    def __or__(self, other):
        return Union(self, other)

    def __and__(self, other):
        return Intersection(self, other)

    def __invert__(self):
        return Complement(self)

    def __str__(self):
        from .dsl import print_set
        return print_set(self)


@dataclass(frozen=True)
class Empty(SetExpr):
    pass


@dataclass(frozen=True)
class Full(SetExpr):
    pass


@dataclass(frozen=True)
class Cylinder(SetExpr):
    word: tuple


@dataclass(frozen=True)
class Complement(SetExpr):
    inner: SetExpr


@dataclass(frozen=True)
class Union(SetExpr):
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True)
class Intersection(SetExpr):
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True)
class ConcatPrefix(SetExpr):
    word: tuple
    inner: SetExpr


@dataclass(frozen=True)
class Localize(SetExpr):
    word: tuple
    inner: SetExpr


@dataclass(frozen=True)
class OSum(SetExpr):
    components: tuple
    default: SetExpr


@dataclass(frozen=True)
class OPlus(SetExpr):
    even: SetExpr
    odd: SetExpr


@dataclass(frozen=True)
class Named(SetExpr):
    """A reference to a named definition; semantics are those of ``target``."""

    name: str
    target: SetExpr


@dataclass(frozen=True)
class FamilyRef(SetExpr):
    name: str
    params: tuple  # of (key, value) pairs in the family's declared order

    def arg(self, key):
        for k, v in self.params:
            if k == key:
                return v
        raise ConstructionError(f"{self.name}: missing parameter {key!r}")


# -- family registry -------------------------------------------------------------

FAMILY_PARAMS = {
    "A_family": ("base", "m"),
    "A_trunc": ("base", "m", "trunc"),
    "cor5_psi": ("bits",),
    "claim_psi": ("base", "bits"),
    "thm_psi": ("X", "base", "trunc"),
    "psi0": ("X", "family"),
    "psi1": ("X", "family"),
    "hits": ("letter",),
}


def family(name, **kwargs):
    if name not in FAMILY_PARAMS:
        raise ConstructionError(f"unknown family {name!r}")
    keys = FAMILY_PARAMS[name]
    if set(kwargs) != set(keys):
        raise ConstructionError(f"{name} takes parameters {', '.join(keys)}")
    ref = FamilyRef(name, tuple((k, _freeze(kwargs[k])) for k in keys))
    validate_family(ref)
    return ref


def _freeze(v):
    if isinstance(v, (list, set, frozenset)):
        items = sorted(v) if isinstance(v, (set, frozenset)) else v
        return tuple(items)
    return v


def _nat(v, what, allow_none=False):
    if v is None and allow_none:
        return
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ConstructionError(f"{what} must be a natural number, got {v!r}")


def validate_family(ref):
    name = ref.name
    if name not in FAMILY_PARAMS:
        raise ConstructionError(f"unknown family {name!r}")
    if tuple(k for k, _ in ref.params) != FAMILY_PARAMS[name]:
        raise ConstructionError(f"{name} takes parameters {', '.join(FAMILY_PARAMS[name])}")
    get = ref.arg
    if name in ("A_family", "A_trunc"):
        _nat(get("m"), "m")
        if name == "A_trunc":
            _nat(get("trunc"), "trunc")
    elif name in ("cor5_psi", "claim_psi"):
        bits = get("bits")
        if not isinstance(bits, tuple) or any(b not in (0, 1) for b in bits):
            raise ConstructionError("bits must be a word over {0, 1}")
    elif name == "thm_psi":
        _nat(get("trunc"), "trunc", allow_none=True)
        for j in get("X"):
            _nat(j, "element of X")
    elif name in ("psi0", "psi1"):
        fam = get("family")
        if not isinstance(fam, tuple) or not fam:
            raise ConstructionError(f"{name}: family must be a nonempty list of sets")
        for j in get("X"):
            _nat(j, "element of X")
            if j >= len(fam):
                raise ConstructionError(f"{name}: index {j} in X has no family member")
    elif name == "hits":
        _nat(get("letter"), "letter")


def tier(e) -> int:
    """1 if ``e`` compiles to an automaton, 2 if it needs the symbolic evaluator."""
    return _tier(e)


@lru_cache(maxsize=None)
def _tier(e):
    match e:
        case Empty() | Full() | Cylinder():
            return 1
        case Complement(inner) | ConcatPrefix(_, inner) | Localize(_, inner) | Named(_, inner):
            return _tier(inner)
        case Union(a, b) | Intersection(a, b) | OPlus(a, b):
            return max(_tier(a), _tier(b))
        case OSum(comps, default):
            return max([_tier(c) for c in comps] + [_tier(default)])
        case FamilyRef(name=name):
            if name == "A_family":
                return _tier(e.arg("base")) if e.arg("m") == 0 else 2
            if name in ("thm_psi", "psi1"):
                return 2
            if name in ("A_trunc", "claim_psi"):
                return _tier(e.arg("base"))
            if name == "psi0":
                return max(_tier(c) for c in e.arg("family"))
            return 1
    raise RejectedInput(f"not a set expression: {e!r}")


# -- tier 1 compilation -------------------------------------------------------------


def compile_set(e):
    """Compile to a SetAutomaton (tier 1) or wrap in a SymbolicSet (tier 2)."""
    if isinstance(e, FamilyRef):
        validate_family(e)
    if _tier(e) == 1:
        return automaton(e)
    return SymbolicSet(e)


def automaton(e) -> SetAutomaton:
    """Tier-1 automaton of ``e`` (not minimised at the top level)."""
    if _tier(e) != 1:
        raise UnsupportedTier(
            "this set has unbounded branch depth; use sampled verification "
            "(constructions packs) instead of exact games")
    return _build(e)


@lru_cache(maxsize=4096)
def _build(e):
    match e:
        case Empty():
            return au.empty()
        case Full():
            return au.full()
        case Cylinder(word):
            return au.cylinder(word)
        case Complement(inner):
            return _build(inner).complement()
        case Union(a, b):
            return au.union(_build(a), _build(b))
        case Intersection(a, b):
            return au.intersection(_build(a), _build(b))
        case ConcatPrefix(word, inner):
            return au.concat(word, _build(inner))
        case Localize(word, inner):
            return au.localize(word, _build(inner))
        case OSum(comps, default):
            return au.osum([_build(c) for c in comps], _build(default))
        case OPlus(a, b):
            return au.oplus(_build(a), _build(b))
        case Named(_, inner):
            return _build(inner)
        case FamilyRef():
            return _build_family(e)
    raise RejectedInput(f"not a set expression: {e!r}")


def minimal(e) -> SetAutomaton:
    return _minimal(e)


@lru_cache(maxsize=4096)
def _minimal(e):
    return automaton(e).minimize()


def _build_family(e):
    name = e.name
    if name == "hits":
        return au.hits(e.arg("letter"))
    if name == "A_family":  # only m == 0 reaches here
        return _minimal(e.arg("base"))
    if name == "A_trunc":
        return a_trunc_automaton(e.arg("base"), e.arg("m"), e.arg("trunc"))
    if name == "cor5_psi":
        bits = e.arg("bits")
        t = len(bits) + 2
        row = [2] * (t + 2)
        row[0] = 1
        for n, b in enumerate(bits):
            if b:
                row[n + 2] = 1
        return SetAutomaton(t, [row, [1] * (t + 2), [2] * (t + 2)], [au.OUT, au.IN, au.OUT])
    if name == "claim_psi":
        return claim_psi_automaton(_minimal(e.arg("base")), e.arg("bits"))
    if name == "psi0":
        xs = set(e.arg("X"))
        fam = e.arg("family")
        comps = [_minimal(c) if n in xs else au.empty() for n, c in enumerate(fam)]
        return au.osum(comps, au.empty())
    raise ConstructionError(f"family {name!r} has no tier-1 form")


def a_trunc_automaton(base, m, trunc):
    return _a_trunc(base, m, trunc)


@lru_cache(maxsize=None)
def _a_trunc(base, m, trunc):
    if m == 0:
        return _minimal(base)
    inner = _a_trunc(base, m - 1, trunc)
    comps = [au.concat((0,) * n, inner) for n in range(trunc)]
    return au.osum(comps, au.empty()).minimize()


def claim_psi_automaton(base: SetAutomaton, bits):
    """Exact automaton of the union of (2n)⌢A_n over n with odd-letter cylinders.

    Here A_n is the residual of ``base`` after the letter n.  Needs the
    base's root to send all tail letters to one state.
    """
    t0 = base.threshold
    root = base.delta[base.init]
    if root[t0] != root[t0 + 1]:
        raise ConstructionError(
            "claim_psi needs a base whose first-letter tail does not depend on parity")
    t = max(2 * t0, 2 * len(bits) + 1)
    t += t % 2  # even, so the even tail starts at 2*t0 or beyond
    n = base.n_states
    sink_in, sink_out, init = n, n + 1, n + 2
    rows = [_widen(base.delta[q], t0, t) for q in range(n)]
    rows.append([sink_in] * (t + 2))
    rows.append([sink_out] * (t + 2))
    top = []
    for a in range(t):
        if a % 2 == 0:
            top.append(base.step(base.init, a // 2))
        else:
            i = a // 2
            top.append(sink_in if i < len(bits) and bits[i] else sink_out)
    top += [root[t0], sink_out]
    rows.append(top)
    labels = list(base.labels) + [au.IN, au.OUT, au.OUT]
    return SetAutomaton(t, rows, labels, init).restricted()[0]


def _widen(row, t0, t):
    extra = [row[t0] if a % 2 == 0 else row[t0 + 1] for a in range(t0, t)]
    return list(row[:t0]) + extra + [row[t0], row[t0 + 1]]


# -- sequences used by the indexed families -------------------------------------------


def nk(k):
    """n_0 = 0 and n_{k+1} = n_k * n_k + 1."""
    if k < 0:
        raise RejectedInput("k must be nonnegative")
    n = 0
    for _ in range(k):
        n = n * n + 1
    return n


def sharp(i):
    """The unique k with nk(k) <= i < nk(k+1)."""
    if i < 0:
        raise RejectedInput("i must be nonnegative")
    k, lo = 0, 0
    while True:
        hi = lo * lo + 1
        if lo <= i < hi:
            return k
        k, lo = k + 1, hi


def rho(xs, j):
    return 1 if j in xs else 0


# -- tier 2 evaluation ---------------------------------------------------------------


class SymbolicSet:
    """Exact membership for any set expression, with a decision certificate."""

    __slots__ = ("expr",)

    def __init__(self, expr):
        self.expr = expr

    def member(self, x):
        return evaluate(self.expr, x)

    def accepts(self, x):
        return evaluate(self.expr, x)[0]

    def __repr__(self):
        return f"SymbolicSet({self.expr!s})"


def member(s, x):
    """Membership of ``x`` in a SetExpr, SetAutomaton or SymbolicSet."""
    if isinstance(s, (SetAutomaton, SymbolicSet)):
        return s.member(x)
    if _tier(s) == 1:
        return _minimal(s).member(x)
    return evaluate(s, x)


def accepts(s, x):
    return member(s, x)[0]


def evaluate(e, x: Point):
    """Symbolic membership, usable on tier-1 expressions as well."""
    match e:
        case Empty():
            return False, Certificate("depth", 0)
        case Full():
            return True, Certificate("depth", 0)
        case Cylinder(word):
            for i, a in enumerate(word):
                if x[i] != a:
                    return False, Certificate("depth", i + 1)
            return True, Certificate("depth", len(word))
        case Complement(inner):
            ok, cert = evaluate(inner, x)
            return not ok, cert
        case Union(a, b):
            ok1, c1 = evaluate(a, x)
            ok2, c2 = evaluate(b, x)
            return ok1 or ok2, Certificate.combine(c1, c2)
        case Intersection(a, b):
            ok1, c1 = evaluate(a, x)
            ok2, c2 = evaluate(b, x)
            return ok1 and ok2, Certificate.combine(c1, c2)
        case ConcatPrefix(word, inner):
            for i, a in enumerate(word):
                if x[i] != a:
                    return False, Certificate("depth", i + 1)
            ok, cert = evaluate(inner, x.tail(len(word)))
            return ok, cert.shifted(len(word))
        case Localize(word, inner):
            ok, cert = evaluate(inner, x.prepend(word))
            return ok, cert.shifted(-len(word))
        case OSum(comps, default):
            n = x[0]
            comp = comps[n] if n < len(comps) else default
            ok, cert = evaluate(comp, x.tail(1))
            return ok, cert.shifted(1)
        case OPlus(even, odd):
            ok, cert = evaluate(even if x[0] % 2 == 0 else odd, x.tail(1))
            return ok, cert.shifted(1)
        case Named(_, inner):
            return evaluate(inner, x)
        case FamilyRef():
            return _evaluate_family(e, x)
    raise RejectedInput(f"not a set expression: {e!r}")


def _base_member(base, x):
    if _tier(base) == 1:
        return _minimal(base).member(x)
    return evaluate(base, x)


def zero_block_member(base, m, x, pos=0, trunc=None):
    """Membership of x[pos:] in the m-th zero-block set over ``base``.

    Level j reads a letter n, demands n zeros, and passes to level j-1.
    With ``trunc`` set, letters n >= trunc reject (the truncated family).
    """
    for _ in range(m):
        n = x[pos]
        if trunc is not None and n >= trunc:
            return False, Certificate("depth", pos + 1)
        if not x.all_equal(pos + 1, pos + 1 + n, 0):
            bad = x.first_not_equal(pos + 1, 0)
            return False, Certificate("depth", bad + 1)
        pos += n + 1
    ok, cert = _base_member(base, x.tail(pos))
    return ok, cert.shifted(pos)


def _evaluate_family(e, x):
    name = e.name
    if name == "hits":
        a = e.arg("letter")
        for j in range(x.horizon):
            if x[j] == a:
                return True, Certificate("depth", j + 1)
        return False, Certificate("period", len(x.prefix))
    if name == "A_family":
        return zero_block_member(e.arg("base"), e.arg("m"), x)
    if name == "A_trunc":
        return zero_block_member(e.arg("base"), e.arg("m"), x, trunc=e.arg("trunc"))
    if name == "cor5_psi":
        n = x[0]
        bits = e.arg("bits")
        ok = n == 0 or (n >= 2 and n - 2 < len(bits) and bits[n - 2] == 1)
        return ok, Certificate("depth", 1)
    if name == "claim_psi":
        n = x[0]
        bits = e.arg("bits")
        if n % 2 == 1:
            i = n // 2
            return (i < len(bits) and bits[i] == 1), Certificate("depth", 1)
        ok, cert = _base_member(e.arg("base"), x.tail(1).prepend((n // 2,)))
        return ok, cert
    if name == "thm_psi":
        i = x[0]
        trunc = e.arg("trunc")
        if trunc is not None and i >= trunc:
            return False, Certificate("depth", 1)
        k = sharp(i)
        m = 3 * k + rho(e.arg("X"), k)
        ok, cert = zero_block_member(e.arg("base"), m, x, pos=1)
        return ok, cert
    if name == "psi0":
        n = x[0]
        if n not in e.arg("X"):
            return False, Certificate("depth", 1)
        ok, cert = _base_member(e.arg("family")[n], x.tail(1))
        return ok, cert.shifted(1)
    if name == "psi1":
        n = x[0]
        if n not in e.arg("X"):
            return False, Certificate("depth", 1)
        j = x.first_not_equal(1, 0)
        if j is None:
            return False, Certificate("period", len(x.prefix))
        ok, cert = _base_member(e.arg("family")[n], x.tail(j + 1))
        return ok, cert.shifted(j + 1)
    raise ConstructionError(f"unknown family {name!r}")


# -- convenience constructors -----------------------------------------------------------


def cylinder(word):
    return Cylinder(tuple(word))


def concat_prefix(word, inner):
    return ConcatPrefix(tuple(word), inner)


def localize(word, inner):
    return Localize(tuple(word), inner)


def osum(components, default):
    return OSum(tuple(components), default)


def oplus(even, odd):
    return OPlus(even, odd)


def hits(letter):
    return family("hits", letter=letter)


def bool_op(op, a, b=None):
    if op == "complement":
        return Complement(a)
    if op == "union":
        return Union(a, b)
    if op == "intersection":
        return Intersection(a, b)
    raise RejectedInput(f"unknown Boolean operation {op!r}")
