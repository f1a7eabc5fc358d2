"""Transducers on Baire space.

A transducer is an immutable combinator term.  Every term compiles to a
sequential machine (``start`` emits an initial output, ``step`` consumes
one input letter and emits a finite output), which gives exact
application to ultimately periodic points, exact product verification
against set automata, and Banach fixed points by feeding a machine its own
output.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

from . import sets as S
from .automata import SetAutomaton, tail_reps, tarjan
from .core import DEFAULT_SEED, Point, stratified_points, vec
from .errors import (InternalError, ModeError, PreconditionError, RejectedInput,
                     UnsupportedTier)
from .metrics import Metric, distance, glue_d1, pow2

INF = math.inf
ECHO = -1  # table output symbol: repeat the current input letter

# -- first-letter maps ----------------------------------------------------------------


class DefaultLetterMap:
    """Base class of the letter maps used by FirstLetterMap tails."""

    growth = "affine"

    def tail_bound(self):
        """(alpha, beta, start): f(n) <= alpha*n + beta for n >= start; None if superlinear."""
        raise NotImplementedError

    def parity_out(self, parity):
        """Parity of f(n) for large n of the given parity, or None if it varies."""
        raise NotImplementedError


@dataclass(frozen=True)
class Identity(DefaultLetterMap):
    def __call__(self, n):
        return n

    def tail_bound(self):
        return Fraction(1), Fraction(0), 0

    def parity_out(self, p):
        return p


@dataclass(frozen=True)
class AddConst(DefaultLetterMap):
    c: int

    def __post_init__(self):
        if self.c < 0:
            raise RejectedInput("added constant must be nonnegative")

    def __call__(self, n):
        return n + self.c

    def tail_bound(self):
        return Fraction(1), Fraction(self.c), 0

    def parity_out(self, p):
        return (p + self.c) % 2


@dataclass(frozen=True)
class ConstLetter(DefaultLetterMap):
    c: int
    growth = "bounded"

    def __call__(self, n):
        return self.c

    def tail_bound(self):
        return Fraction(0), Fraction(self.c), 0

    def parity_out(self, p):
        return self.c % 2


@dataclass(frozen=True)
class SquarePlusOne(DefaultLetterMap):
    growth = "superlinear"

    def __call__(self, n):
        return n * n + 1

    def tail_bound(self):
        return None

    def parity_out(self, p):
        return 1 - p


@dataclass(frozen=True)
class MaxWith(DefaultLetterMap):
    c: int

    def __call__(self, n):
        return max(n, self.c)

    def tail_bound(self):
        return Fraction(1), Fraction(0), self.c

    def parity_out(self, p):
        return p


@dataclass(frozen=True)
class Affine(DefaultLetterMap):
    a: int
    b: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise RejectedInput("affine letter map needs nonnegative coefficients")

    @property
    def growth(self):
        return "bounded" if self.a == 0 else "affine"

    def __call__(self, n):
        return self.a * n + self.b

    def tail_bound(self):
        return Fraction(self.a), Fraction(self.b), 0

    def parity_out(self, p):
        return (self.a * p + self.b) % 2


@dataclass(frozen=True)
class Half(DefaultLetterMap):
    def __call__(self, n):
        return n // 2

    def tail_bound(self):
        return Fraction(1, 2), Fraction(0), 0

    def parity_out(self, p):
        return None


def chain_apply(chain, n):
    for f in chain:
        n = f(n)
    return n


def chain_growth(chain):
    if any(f.growth == "bounded" for f in chain):
        return "bounded"
    if any(f.growth == "superlinear" for f in chain):
        return "superlinear"
    return "affine"


def chain_constants(chain):
    out = [0]
    for f in chain:
        for attr in ("c", "a", "b"):
            if hasattr(f, attr):
                out.append(getattr(f, attr))
    return max(out)


def chain_halvings(chain):
    return sum(isinstance(f, Half) for f in chain)


def chain_tail_bound(chain, start):
    """(alpha, beta): f(n) <= alpha*n + beta for every n >= start (affine chains)."""
    alpha, beta, lo = Fraction(1), Fraction(0), start
    for f in chain:
        a, b, s = f.tail_bound()
        beta = a * beta + b
        if lo < s:
            beta = max(beta, Fraction(max(f(m) for m in range(lo, s))))
        alpha = a * alpha
        lo = f(lo)  # every letter map is nondecreasing
    return alpha, beta


@dataclass(frozen=True)
class LetterFn:
    """A total map on letters: finite exceptions plus a chain per parity."""

    explicit: tuple = ()  # sorted (letter, value) pairs
    even: tuple = (Identity(),)
    odd: tuple = (Identity(),)

    @staticmethod
    def const(c):
        return LetterFn((), (ConstLetter(c),), (ConstLetter(c),))

    def __call__(self, n):
        for a, v in self.explicit:
            if a == n:
                return v
        return chain_apply(self.even if n % 2 == 0 else self.odd, n)

    @property
    def keys(self):
        return {a for a, _ in self.explicit}

    def bound(self):
        """A letter beyond every exception and every chain constant."""
        keys = [a for a, _ in self.explicit]
        return max(keys + [chain_constants(self.even), chain_constants(self.odd)]) + 2

    def is_constant(self):
        vals = {v for _, v in self.explicit}
        if chain_growth(self.even) != "bounded" or chain_growth(self.odd) != "bounded":
            return None
        big = self.bound()
        vals |= {self(big), self(big + 1)}
        small = {self(a) for a in range(big)}
        vals |= small
        return vals.pop() if len(vals) == 1 else None

    def growth(self):
        gs = {chain_growth(self.even), chain_growth(self.odd)}
        if "superlinear" in gs:
            return "superlinear"
        if gs == {"bounded"}:
            return "bounded"
        return "affine"

    def then(self, g: "LetterFn"):
        """The map a -> g(self(a))."""
        big = max(self.bound(), g.bound())
        explicit = {a: g(v) for a, v in self.explicit}
        chains = []
        for parity, chain in ((0, self.even), (1, self.odd)):
            if chain_growth(chain) == "bounded":
                c = chain_apply(chain, big + parity)
                chains.append((ConstLetter(g(c)),))
                continue
            # letters whose image falls below g's regular range become exceptions
            start = big + (big % 2 != parity)
            a = parity
            while True:
                if a not in self.keys:
                    if a >= start and chain_apply(chain, a) >= big:
                        break
                    explicit[a] = g(chain_apply(chain, a))
                a += 2
            h = chain_halvings(chain)
            residues = {chain_apply(chain, a + r) % 2 for r in range(0, 2 ** (h + 1), 2)}
            if g.even == g.odd:
                chains.append(chain + g.even)
            elif len(residues) == 1:
                q = residues.pop()
                chains.append(chain + (g.even if q == 0 else g.odd))
            else:
                return None
        return LetterFn(tuple(sorted(explicit.items())), chains[0], chains[1])


IDENTITY_FN = LetterFn()

# -- transducer AST ---------------------------------------------------------------------


class Transducer:
    def __str__(self):
        from .dsl import print_transducer
        return print_transducer(self)


@dataclass(frozen=True)
class Copy(Transducer):
    pass


@dataclass(frozen=True)
class Const(Transducer):
    point: Point


@dataclass(frozen=True)
class Prepend(Transducer):
    word: tuple


@dataclass(frozen=True)
class Drop(Transducer):
    k: int


@dataclass(frozen=True)
class FirstLetterMap(Transducer):
    explicit: tuple  # sorted (letter, value) pairs
    default: DefaultLetterMap = Identity()


@dataclass(frozen=True)
class PadByFirstLetter(Transducer):
    pass


@dataclass(frozen=True)
class CaseOnFirstLetter(Transducer):
    branches: tuple  # sorted (letter, Transducer) pairs; each sees the whole input
    default: Transducer = Copy()
    odd_default: Transducer | None = None


@dataclass(frozen=True)
class Mask(Transducer):
    """Keep the first ``keep`` letters, then emit ``fill``."""

    keep: int
    fill: Point


@dataclass(frozen=True)
class ZeroBlockLift(Transducer):
    """Read n, pass n zeros through, then run ``inner`` on the rest.

    If a nonzero letter interrupts the zero block, the block is completed
    with zeros and ``filler`` is emitted instead.
    """

    inner: Transducer
    filler: Point


@dataclass(frozen=True)
class StrategyTable(Transducer):
    """A finite Mealy machine over letter classes.

    ``rows[q][c] = (next_state, outputs)`` for classes ``c`` in
    ``0..threshold+1`` (explicit letters, then even and odd tails); an
    output equal to ``ECHO`` repeats the input letter.
    """

    role: str
    lead: int
    threshold: int
    opening: tuple
    rows: tuple
    wadge: bool = False
    init: int = 0


@dataclass(frozen=True)
class Compose(Transducer):
    parts: tuple  # outermost first; the last part reads the input


def flm(mapping=None, default=Identity()):
    return FirstLetterMap(tuple(sorted((mapping or {}).items())), default)


def case(branches, default=Copy(), odd_default=None):
    return CaseOnFirstLetter(tuple(sorted(branches.items())), default, odd_default)


def compose(*parts):
    """compose(T1, T2, ...) applies the last argument first."""
    flat = []
    for p in parts:
        if isinstance(p, Compose):
            flat.extend(p.parts)
        elif not isinstance(p, Copy):
            flat.append(p)
    if not flat:
        return Copy()
    if len(flat) == 1:
        return flat[0]
    return Compose(tuple(flat))


def iterate(t, n):
    if n < 0:
        raise RejectedInput("iteration count must be nonnegative")
    if n == 0:
        return Copy()
    if n == 1:
        return t
    return compose(*([t] * n))


def strip_prefix(word, fallback: Point):
    """Inverse of Prepend(word) on inputs starting with ``word``; else ``fallback``."""
    word = tuple(word)
    if not word:
        return Copy()
    inner = strip_prefix(word[1:], fallback)
    inner_guard = compose(inner, Drop(1)) if len(word) > 1 else Drop(1)
    return case({word[0]: inner_guard}, default=Const(fallback))


# -- normalisation and shift discipline -------------------------------------------------------


def normalize(t):
    """Merge adjacent prepends/drops and cancel drop-after-prepend."""
    if isinstance(t, Compose):
        parts = [normalize(p) for p in t.parts]
        flat = []
        for p in parts:
            flat.extend(p.parts if isinstance(p, Compose) else [p])
        out = []
        for p in reversed(flat):  # innermost first
            out.append(p)
            while len(out) >= 2:
                inner, outer = out[-2], out[-1]
                if isinstance(outer, Copy):
                    out.pop()
                elif isinstance(inner, Copy):
                    out.pop(-2)
                elif isinstance(inner, Prepend) and isinstance(outer, Prepend):
                    out[-2:] = [Prepend(outer.word + inner.word)]
                elif isinstance(inner, Drop) and isinstance(outer, Drop):
                    out[-2:] = [Drop(inner.k + outer.k)]
                elif isinstance(inner, Prepend) and isinstance(outer, Drop):
                    k, w = outer.k, inner.word
                    if k <= len(w):
                        out[-2:] = [Prepend(w[k:])]
                    else:
                        out[-2:] = [Drop(k - len(w))]
                elif isinstance(outer, Const) or isinstance(inner, Const) and _keeps_constant(outer):
                    out[-2:] = [Const(apply(outer, inner.point)) if isinstance(inner, Const) else outer]
                else:
                    break
            if out and isinstance(out[-1], Prepend) and not out[-1].word:
                out.pop()
            if out and isinstance(out[-1], Drop) and out[-1].k == 0:
                out.pop()
        out.reverse()
        return compose(*out)
    if isinstance(t, CaseOnFirstLetter):
        return CaseOnFirstLetter(tuple((a, normalize(b)) for a, b in t.branches),
                                 normalize(t.default),
                                 None if t.odd_default is None else normalize(t.odd_default))
    if isinstance(t, ZeroBlockLift):
        return ZeroBlockLift(normalize(t.inner), t.filler)
    return t


def _keeps_constant(t):
    return not isinstance(t, StrategyTable)


def shift(t):
    """Structural shift discipline: agreement depth n gives output agreement n + shift."""
    return _shift(normalize(t), tail=False)


def tail_shift(t):
    """Like ``shift`` but only for inputs that share their first letter."""
    return _shift(normalize(t), tail=True)


def _shift(t, tail):
    match t:
        case Copy() | FirstLetterMap() | PadByFirstLetter():
            return 0
        case Const():
            return INF
        case Prepend(word):
            return len(word)
        case Drop(k):
            return -k
        case Mask(keep, _):
            return INF if keep == 0 else 0
        case ZeroBlockLift(inner, _):
            return min(0, _shift(inner, tail))
        case CaseOnFirstLetter():
            within = min(_shift(b, True) for b in _case_arms(t))
            if tail:
                return within
            # inputs differing at the first letter may take different arms
            return min(within, _cross_agreement(t))
        case StrategyTable(role=role, lead=lead, wadge=wadge):
            if wadge:
                return -INF
            return lead + 1 if role == "I" else -lead
        case Compose(parts):
            if not tail:
                vals = [_shift(p, False) for p in parts]
                return INF if INF in vals else sum(vals)
            # follow an agreement depth of 1 from the innermost part outwards
            depth = 1
            for p in reversed(parts):
                s = _shift(p, depth >= 1)
                if s == INF:
                    return INF
                if s == -INF:
                    return -INF
                depth += s
            return depth - 1
    raise RejectedInput(f"not a transducer: {t!r}")


def _case_arms(t):
    arms = [b for _, b in t.branches] + [t.default]
    if t.odd_default is not None:
        arms.append(t.odd_default)
    return arms


FORCED_CAP = 64


def _cross_agreement(t):
    arms = _case_arms(t)
    if all(isinstance(b, Const) for b in arms) and len({b.point for b in arms}) == 1:
        return INF
    words = [_forced(b, ()) for b in arms]
    n = 0
    while all(len(w) > n for w in words) and len({w[n] for w in words}) == 1:
        n += 1
    return n


def forced_prefix(t, known=()):
    """Output letters fixed by the input prefix ``known`` (at most FORCED_CAP)."""
    return _forced(normalize(t), tuple(known))


def _forced(t, w):
    match t:
        case Const(p):
            out = p.take(FORCED_CAP)
        case Mask(keep, fill):
            out = w[:keep] + fill.take(FORCED_CAP) if len(w) >= keep else w
        case CaseOnFirstLetter():
            if w:
                key, _ = machine(t).pick(w[0])
                arm = {"odd": t.odd_default, "default": t.default}.get(key)
                out = _forced(dict(t.branches)[key] if arm is None else arm, w)
            else:
                words = [_forced(b, ()) for b in _case_arms(t)]
                out = words[0]
                for other in words[1:]:
                    n = 0
                    while n < min(len(out), len(other)) and out[n] == other[n]:
                        n += 1
                    out = out[:n]
        case Compose(parts):
            out = w
            for p in reversed(parts):
                out = _forced(p, out)
        case _:
            m = machine(t)
            s, o = m.start()
            out = list(o)
            for a in w:
                s, o = m.step(s, a)
                out.extend(o)
            out = tuple(out)
    return tuple(out[:FORCED_CAP])


# -- machines ----------------------------------------------------------------------------------


class _Machine:
    def start(self):
        raise NotImplementedError

    def step(self, state, a):
        raise NotImplementedError


class _CopyM(_Machine):
    def start(self):
        return 0, ()

    def step(self, s, a):
        return 0, (a,)


class _PointM(_Machine):
    """Emits a fixed point, one letter per input step (one letter ahead)."""

    def __init__(self, p, lead=()):
        self.seq = p.prefix + p.period
        self.loop = len(p.prefix)
        self.lead = tuple(lead)

    def _next(self, i):
        i += 1
        return i if i < len(self.seq) else self.loop

    def start(self):
        return self._next(0), self.lead + (self.seq[0],)

    def emit(self, i):
        return self._next(i), (self.seq[i],)

    def step(self, s, a):
        return self.emit(s)


class _PrependM(_Machine):
    def __init__(self, word):
        self.word = word

    def start(self):
        return 0, self.word

    def step(self, s, a):
        return 0, (a,)


class _DropM(_Machine):
    def __init__(self, k):
        self.k = k

    def start(self):
        return self.k, ()

    def step(self, s, a):
        if s > 0:
            return s - 1, ()
        return 0, (a,)


class _FLMM(_Machine):
    def __init__(self, fn):
        self.fn = fn

    def start(self):
        return 0, ()

    def step(self, s, a):
        if s == 0:
            return 1, (self.fn(a),)
        return 1, (a,)


class _PadM(_Machine):
    def start(self):
        return 0, ()

    def step(self, s, a):
        if s == 0:
            return 1, (a,) + (0,) * a + (a,)
        return 1, (a,)


class _MaskM(_Machine):
    def __init__(self, keep, fill):
        self.keep = keep
        self.fill = _PointM(fill)

    def start(self):
        if self.keep == 0:
            s, o = self.fill.start()
            return ("f", s), o
        return ("k", 0), ()

    def step(self, s, a):
        tag, v = s
        if tag == "f":
            v, o = self.fill.emit(v)
            return ("f", v), o
        if v + 1 == self.keep:
            f, o = self.fill.start()
            return ("f", f), (a,) + o
        return ("k", v + 1), (a,)


class _ZBLM(_Machine):
    def __init__(self, inner, filler):
        self.inner = machine(inner)
        self.fill = _PointM(filler)

    def start(self):
        return ("s", 0), ()

    def _enter(self, emitted):
        s, o = self.inner.start()
        return ("i", s), emitted + o

    def step(self, s, a):
        tag, v = s
        if tag == "i":
            v, o = self.inner.step(v, a)
            return ("i", v), o
        if tag == "f":
            v, o = self.fill.emit(v)
            return ("f", v), o
        if tag == "s":
            if a == 0:
                return self._enter((0,))
            return ("b", a), (a,)
        # inside the zero block, v zeros still expected
        if a == 0:
            if v == 1:
                return self._enter((0,))
            return ("b", v - 1), (0,)
        f, o = self.fill.start()
        return ("f", f), (0,) * v + o


class _CaseM(_Machine):
    def __init__(self, t):
        self.branches = {a: machine(b) for a, b in t.branches}
        self.default = machine(t.default)
        self.odd = None if t.odd_default is None else machine(t.odd_default)

    def pick(self, a):
        if a in self.branches:
            return a, self.branches[a]
        if self.odd is not None and a % 2 == 1:
            return "odd", self.odd
        return "default", self.default

    def _by_key(self, key):
        if key == "odd":
            return self.odd
        if key == "default":
            return self.default
        return self.branches[key]

    def start(self):
        return None, ()

    def step(self, s, a):
        if s is None:
            key, m = self.pick(a)
            st, o0 = m.start()
            st, o1 = m.step(st, a)
            return (key, st), o0 + o1
        key, st = s
        st, o = self._by_key(key).step(st, a)
        return (key, st), o


class _TableM(_Machine):
    def __init__(self, t):
        self.t = t
        self.top = t.threshold

    def start(self):
        return self.t.init, self.t.opening

    def step(self, s, a):
        top = self.top
        c = a if a < top else top + (a & 1)
        nxt, outs = self.t.rows[s][c]
        if ECHO in outs:
            outs = tuple(a if o == ECHO else o for o in outs)
        return nxt, outs


class _ComposeM(_Machine):
    def __init__(self, parts):
        self.ms = [machine(p) for p in parts]

    def start(self):
        states = [None] * len(self.ms)
        out = ()
        for i in range(len(self.ms) - 1, -1, -1):
            m = self.ms[i]
            s, o0 = m.start()
            buf = list(o0)
            for b in out:
                s, o = m.step(s, b)
                buf.extend(o)
            states[i] = s
            out = tuple(buf)
        return tuple(states), out

    def step(self, state, a):
        states = list(state)
        out = (a,)
        for i in range(len(self.ms) - 1, -1, -1):
            m = self.ms[i]
            s = states[i]
            buf = []
            for b in out:
                s, o = m.step(s, b)
                buf.extend(o)
            states[i] = s
            out = tuple(buf)
            if not out:
                break
        return tuple(states), out


@lru_cache(maxsize=4096)
def machine(t) -> _Machine:
    match t:
        case Copy():
            return _CopyM()
        case Const(p):
            return _PointM(p)
        case Prepend(word):
            return _PrependM(tuple(word))
        case Drop(k):
            return _DropM(k)
        case FirstLetterMap():
            return _FLMM(flm_fn(t))
        case PadByFirstLetter():
            return _PadM()
        case Mask(keep, fill):
            return _MaskM(keep, fill)
        case ZeroBlockLift(inner, filler):
            return _ZBLM(inner, filler)
        case CaseOnFirstLetter():
            return _CaseM(t)
        case StrategyTable():
            return _TableM(t)
        case Compose(parts):
            return _ComposeM(parts)
    raise RejectedInput(f"not a transducer: {t!r}")


def flm_fn(t: FirstLetterMap):
    return LetterFn(t.explicit, (t.default,), (t.default,))


MAX_STEPS = 200_000


def apply(t, x: Point) -> Point:
    """Exact image of an ultimately periodic point."""
    m = machine(t)
    s, out0 = m.start()
    out = list(out0)
    for a in x.prefix:
        s, o = m.step(s, a)
        out.extend(o)
    per = x.period
    seen = {}
    i = 0
    while True:
        key = (s, i % len(per))
        if key in seen:
            mark = seen[key]
            prefix, period = out[:mark], out[mark:]
            if not period:
                raise InternalError(f"{t} emits finitely many letters on {x}")
            return Point(prefix, period)
        if i > MAX_STEPS:
            raise InternalError("period detection exceeded its step budget")
        seen[key] = len(out)
        s, o = m.step(s, per[i % len(per)])
        out.extend(o)
        i += 1


# -- first output letter analysis ---------------------------------------------------------------


class Source(NamedTuple):
    """Output letter j equals ``fn(x[position])``; ``position`` None means constant."""

    position: int | None
    fn: LetterFn


def source(t, j=0):
    """Which input letter determines output letter ``j``, and how (None if unknown)."""
    return _source(normalize(t), j)


def _const_source(c):
    return Source(None, LetterFn.const(c))


def _source(t, j):
    match t:
        case Copy():
            return Source(j, IDENTITY_FN)
        case Const(p):
            return _const_source(p[j])
        case Prepend(word):
            if j < len(word):
                return _const_source(word[j])
            return Source(j - len(word), IDENTITY_FN)
        case Drop(k):
            return Source(j + k, IDENTITY_FN)
        case FirstLetterMap():
            return Source(0, flm_fn(t)) if j == 0 else Source(j, IDENTITY_FN)
        case PadByFirstLetter():
            return Source(0, IDENTITY_FN) if j == 0 else None
        case Mask(keep, fill):
            if j < keep:
                return Source(j, IDENTITY_FN)
            return _const_source(fill[j - keep])
        case ZeroBlockLift():
            return Source(0, IDENTITY_FN) if j == 0 else None
        case CaseOnFirstLetter():
            return _case_source(t, j)
        case StrategyTable():
            return _table_source(t, j)
        case Compose(parts):
            src = _source(parts[0], j)
            fn = src.fn if src else None
            for p in parts[1:]:
                if src is None:
                    return None
                if src.position is None:
                    return src
                inner = _source(p, src.position)
                if inner is None:
                    return None
                fn = inner.fn.then(src.fn)
                if fn is None:
                    return None
                src = Source(inner.position, fn)
            return src
    return None


def _case_source(t, j):
    if j != 0:
        return None
    explicit = {}
    for a, b in t.branches:
        src = _source(b, 0)
        if src is None or src.position not in (0, None):
            return None
        explicit[a] = src.fn(a)
    chains = []
    for parity, branch in ((0, t.default), (1, t.odd_default or t.default)):
        src = _source(branch, 0)
        if src is None or src.position not in (0, None):
            return None
        fn = src.fn
        # exceptions of the branch's map below the branch keys stay exact
        for a, v in fn.explicit:
            if a % 2 == parity and a not in explicit:
                explicit[a] = v
        chains.append(fn.even if parity == 0 else fn.odd)
    return Source(0, LetterFn(tuple(sorted(explicit.items())), chains[0], chains[1]))


def _table_source(t, j):
    if t.role == "I" or len(t.opening) > j:
        if len(t.opening) > j:
            return _const_source(t.opening[j])
        return None
    if t.lead != 0 or t.wadge or j != 0:
        return None
    row = t.rows[t.init]
    explicit = {}
    for c in range(t.threshold):
        outs = row[c][1]
        if len(outs) < 1:
            return None
        explicit[c] = c if outs[0] == ECHO else outs[0]
    chains = []
    for c in (t.threshold, t.threshold + 1):
        outs = row[c][1]
        if len(outs) < 1:
            return None
        chains.append((Identity(),) if outs[0] == ECHO else (ConstLetter(outs[0]),))
    if t.threshold % 2 == 1:
        chains.reverse()
    return Source(0, LetterFn(tuple(sorted(explicit.items())), chains[0], chains[1]))


def first_letter_fn(t):
    """Output's first letter as a function of the input's first letter, if determined."""
    if shift(t) >= 1:
        return LetterFn.const(apply(t, vec(0))[0])
    src = source(t, 0)
    if src is None or src.position not in (0, None):
        return None
    return src.fn


# -- certification -------------------------------------------------------------------------------


@dataclass(frozen=True)
class Certified:
    metric: Metric
    constant: Fraction


@dataclass(frozen=True)
class Refuted:
    metric: Metric
    bound: Fraction
    x: Point
    y: Point


@dataclass(frozen=True)
class NotLipschitz:
    metric: Metric
    family: str
    samples: tuple = ()  # (x, y, ratio) triples


@dataclass(frozen=True)
class Unknown:
    metric: Metric
    reason: str


LipCertificate = Certified | Refuted | NotLipschitz | Unknown


def ratio(metric, t, x, y):
    dx = distance(metric, x, y)
    if dx == 0:
        return Fraction(0)
    return distance(metric, apply(t, x), apply(t, y)) / dx


def _two_pow_neg(s):
    if s == INF:
        return Fraction(0)
    return pow2(-s)


def best_constant(t, metric):
    """('const', L) | ('unbounded', family, samples) | ('unknown', reason)."""
    s = shift(t)
    if s == INF:
        return ("const", Fraction(0))
    if metric is Metric.D:
        if s == -INF:
            return ("unknown", "no shift bound for a pass-allowed strategy table")
        return ("const", _two_pow_neg(s))
    fn = first_letter_fn(t)
    if fn is None:
        if metric is Metric.D1 and s != -INF:
            return ("const", pow2(1 - s))
        src = source(t, 0)
        if metric is Metric.D0 and src is not None and src.position and src.fn.growth() != "bounded":
            return _unbounded_family(t, metric, src.position)
        return ("unknown", "first output letter is not a function of the first input letter")
    if s == -INF:
        return ("unknown", "no shift bound for a pass-allowed strategy table")
    if fn.growth() == "superlinear" and metric is Metric.D0:
        return _unbounded_family(t, metric, 0)
    return ("const", _first_letter_constant(fn, s, tail_shift(t), metric))


def _unbounded_family(t, metric, position):
    prefix = (0,) * position
    samples = []
    for n in (2, 4, 8, 16, 32):
        x, y = vec(0), Point(prefix + (n,), (0,))
        samples.append((x, y, ratio(metric, t, x, y)))
    if position == 0:
        desc = "(vec0, n vec0): ratio grows without bound in n"
    else:
        desc = f"(vec0, 0^{position} n vec0): ratio grows without bound in n"
    return ("unbounded", desc, tuple(samples))


def _first_letter_constant(fn, s, s_tail, metric):
    """Exact Lipschitz constant bound for a first-letter-determined map."""
    same = _two_pow_neg(s_tail)  # inputs with equal first letters
    collide = _two_pow_neg(max(s, 1))  # outputs with equal first letters
    n_max = 2 * fn.bound() + 16
    vals = [fn(a) for a in range(n_max + 1)]

    if metric is Metric.D0:
        def gap_in(m):
            return Fraction(m)

        def gap_out(m):
            return Fraction(m)
    else:
        gap_in = gap_out = glue_d1

    best = same
    for m in range(1, n_max + 1):
        vm = vals[m]
        dm = gap_in(m)
        for b in range(m):
            vb = vals[b]
            out = collide if vb == vm else gap_out(max(vb, vm))
            r = out / dm
            if r > best:
                best = r
    # every pair whose larger letter exceeds n_max
    vmax = max(vals)
    tails = []
    for chain in (fn.even, fn.odd):
        if chain_growth(chain) == "bounded":
            tails.append(("bounded", chain_apply(chain, n_max + 1)))
        elif chain_growth(chain) == "superlinear":
            tails.append(("superlinear", None))
        else:
            tails.append(("affine", chain_tail_bound(chain, n_max + 1)))
    bound_vals = [vmax] + [v for kind, v in tails if kind == "bounded"]
    vstar = max(bound_vals)
    lo = n_max + 1
    if metric is Metric.D0:
        tail = max(Fraction(vstar, lo), collide / lo)
        for kind, v in tails:
            if kind == "affine":
                alpha, beta = v
                tail = max(tail, alpha + max(beta, 0) / lo)
    else:
        def tame(kind, v):
            if kind == "bounded":
                return True
            if kind == "superlinear":
                return False
            alpha, beta = v
            return alpha < 1 and beta <= (1 - alpha) * lo or alpha == 1 and beta <= 0

        small_growth = all(tame(kind, v) for kind, v in tails)
        if small_growth and vstar <= lo:
            tail = Fraction(1)
        else:
            tail = 2 / glue_d1(lo)
        tail = max(tail, collide / glue_d1(lo))
    return max(best, tail)


def _candidate_pairs(t, metric):
    yield vec(0), Point((1,), (0,))
    fn = first_letter_fn(t)
    top = 8 if fn is None else min(2 * fn.bound() + 4, 40)
    for m in range(1, top):
        for b in range(m):
            yield Point((b,), (0,)), Point((m,), (0,))
    for n in range(1, 8):
        for c in range(1, 5):
            yield vec(0), Point((0,) * n + (c,), (0,))
            yield vec(1), Point((1,) * n + (c + 1,), (1,))
    rng = random.Random(DEFAULT_SEED)
    for x in stratified_points(300, seed=DEFAULT_SEED):
        k = rng.randint(0, 4)
        yield x, Point(x.take(k) + (rng.randrange(6),), (rng.randrange(3),))


def find_violation(t, metric, bound):
    for x, y in _candidate_pairs(t, metric):
        if x == y:
            continue
        if ratio(metric, t, x, y) > bound:
            return x, y
    return None


def certify_lipschitz(t, metric, constant=None) -> LipCertificate:
    """Certify (or refute) a Lipschitz bound for ``t`` under ``metric``.

    Without ``constant`` the best structural constant is returned.  With a
    target constant the answer is Certified when the structural constant
    meets it, Refuted (with a verified pair) when a violating pair is found.
    """
    metric = metric if isinstance(metric, Metric) else Metric.parse(metric)
    res = best_constant(t, metric)
    if constant is None:
        if res[0] == "const":
            return Certified(metric, res[1])
        if res[0] == "unbounded":
            return NotLipschitz(metric, res[1], res[2])
        return Unknown(metric, res[1])
    constant = Fraction(constant)
    if res[0] == "const" and res[1] <= constant:
        return Certified(metric, res[1])
    pair = find_violation(t, metric, constant)
    if pair is not None:
        return Refuted(metric, constant, pair[0], pair[1])
    if res[0] == "unbounded":
        return NotLipschitz(metric, res[1], res[2])
    if res[0] == "unknown":
        return Unknown(metric, res[1])
    return Unknown(metric, f"structural constant {res[1]} exceeds {constant}; no violating pair found")


def recheck_certificate(t, cert, pairs):
    """Re-validate a certificate on the given pairs (sound-ness spot check)."""
    match cert:
        case Certified(metric, c):
            return all(ratio(metric, t, x, y) <= c for x, y in pairs)
        case Refuted(metric, b, x, y):
            return ratio(metric, t, x, y) > b
        case NotLipschitz(metric, _, samples):
            rs = [ratio(metric, t, x, y) for x, y, _ in samples]
            return all(a < b for a, b in zip(rs, rs[1:]))
    return True


# -- reduction verification ------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionVerdict:
    holds: bool
    mode: str
    counterexample: Point | None = None
    checked: int = 0
    detail: str = ""

    def __bool__(self):
        return self.holds


def _constants(t):
    """(largest letter constant mentioned, number of halving maps)."""
    hi, halves = 0, 0

    def fmap(f):
        nonlocal hi, halves
        hi = max(hi, chain_constants((f,)))
        halves += isinstance(f, Half)

    def point(p):
        nonlocal hi
        hi = max((hi,) + p.prefix + p.period)

    def walk(t):
        nonlocal hi
        match t:
            case Const(p):
                point(p)
            case Prepend(word):
                hi = max((hi,) + tuple(word))
            case Drop(k):
                hi = max(hi, k)
            case FirstLetterMap(explicit, default):
                for a, v in explicit:
                    hi = max(hi, a, v)
                fmap(default)
            case Mask(keep, fill):
                hi = max(hi, keep)
                point(fill)
            case ZeroBlockLift(inner, filler):
                point(filler)
                walk(inner)
            case CaseOnFirstLetter(branches, default, odd):
                for a, b in branches:
                    hi = max(hi, a)
                    walk(b)
                walk(default)
                if odd is not None:
                    walk(odd)
            case StrategyTable():
                hi = max(hi, t.threshold)
                for row in t.rows:
                    for _, outs in row:
                        hi = max((hi,) + tuple(o for o in outs if o != ECHO))
                hi = max((hi,) + t.opening)
            case Compose(parts):
                for p in parts:
                    walk(p)

    walk(t)
    return hi, halves


def _as_automaton(a):
    if isinstance(a, SetAutomaton):
        return a
    if S.tier(a) != 1:
        raise ModeError("exact verification needs tier-1 sets on both sides; use sampled mode")
    return S.minimal(a)


def verify_reduction(t, a, b, mode="exact", samples=1000, seed=DEFAULT_SEED, extra_points=()):
    """Decide (exact) or test (sampled) whether ``t`` reduces ``a`` to ``b``."""
    if mode == "exact":
        return _verify_exact(t, _as_automaton(a), _as_automaton(b))
    if mode == "sampled":
        return _verify_sampled(t, a, b, samples, seed, extra_points)
    raise RejectedInput(f"unknown verification mode {mode!r}")


def _verify_sampled(t, a, b, n, seed, extra_points):
    points = list(stratified_points(n, seed=seed)) + list(extra_points)
    for x in points:
        if S.accepts(a, x) != S.accepts(b, apply(t, x)):
            return ReductionVerdict(False, "sampled", x, len(points), f"seed={seed}")
    return ReductionVerdict(True, "sampled", None, len(points), f"seed={seed}")


def _verify_exact(t, A: SetAutomaton, B: SetAutomaton):
    if isinstance(t, StrategyTable):
        # tables, A and B all treat letters >= top uniformly within a parity
        top = max(t.threshold, A.threshold, B.threshold)
        reps = list(range(top)) + list(tail_reps(top))
        alts = [None] * len(reps)
    else:
        hi, halves = _constants(t)
        modulus = 2 ** (halves + 1)
        base = max(hi + 2, A.threshold, B.threshold)
        top = (base + 2) * modulus
        reps = list(range(top)) + [top + r for r in range(modulus)]
        alts = [None] * top + [top + r + 64 * modulus for r in range(modulus)]
    m = machine(t)
    s0, out0 = m.start()
    qb0 = B.run(B.init, out0)
    start = (s0, qb0, A.init)
    index = {start: 0}
    nodes = [start]
    succ = []
    emits = []
    parent = [None]
    i = 0
    while i < len(nodes):
        s, qb, qa = nodes[i]
        row, em = [], []
        for c, a in enumerate(reps):
            s2, out = m.step(s, a)
            qb2 = B.run(qb, out)
            qa2 = A.step(qa, a)
            alt = alts[c]
            if alt is not None:
                s3, out3 = m.step(s, alt)
                if s3 != s2 or B.run(qb, out3) != qb2 or bool(out3) != bool(out):
                    raise ModeError(
                        f"{t} treats large first letters non-uniformly; "
                        "verify on a truncation or use sampled mode")
            nxt = (s2, qb2, qa2)
            j = index.get(nxt)
            if j is None:
                j = index[nxt] = len(nodes)
                nodes.append(nxt)
                parent.append((i, a))
            row.append(j)
            em.append(bool(out))
        succ.append(row)
        emits.append(em)
        i += 1
        if i > 2_000_000:
            raise InternalError("product exploration exceeded its budget")
    comp, order = tarjan(len(nodes), lambda v: succ[v])
    cyclic = [False] * len(order)
    for v, row in enumerate(succ):
        for w in row:
            if comp[w] == comp[v]:
                cyclic[comp[v]] = True
    # a cycle emitting nothing means the output is finite on some input
    silent_comp, silent_order = tarjan(
        len(nodes), lambda v: [w for w, e in zip(succ[v], emits[v]) if not e])
    for members in silent_order:
        v = members[0]
        if len(members) > 1 or any(w == v and not e for w, e in zip(succ[v], emits[v])):
            x = _witness(nodes, succ, parent, reps, comp, v,
                         restrict=lambda u, k: not emits[u][k])
            return ReductionVerdict(False, "exact", x, len(nodes), "output is finite on this input")
    for members in order:
        if not cyclic[comp[members[0]]]:
            continue
        _, qb, qa = nodes[members[0]]
        if A.labels[qa] != B.labels[qb]:
            x = _witness(nodes, succ, parent, reps, comp, members[0])
            detail = "x in A but image not in B" if A.labels[qa] else "x not in A but image in B"
            if x is not None and (A.accepts(x) == B.accepts(apply(t, x))):
                raise InternalError("counterexample failed to re-verify")
            return ReductionVerdict(False, "exact", x, len(nodes), detail)
    return ReductionVerdict(True, "exact", None, len(nodes))


def _witness(nodes, succ, parent, reps, comp, v, restrict=None):
    prefix = []
    u = v
    while parent[u] is not None:
        u, a = parent[u]
        prefix.append(a)
    prefix.reverse()
    target = comp[v]
    seen = {}
    queue = deque()
    for k, w in enumerate(succ[v]):
        if comp[w] == target and (restrict is None or restrict(v, k)) and w not in seen:
            seen[w] = (None, reps[k])
            queue.append(w)
    while queue and v not in seen:
        u = queue.popleft()
        for k, w in enumerate(succ[u]):
            if comp[w] == target and (restrict is None or restrict(u, k)) and w not in seen:
                seen[w] = (u, reps[k])
                queue.append(w)
    cycle = []
    u = v
    while True:
        prev, a = seen[u]
        cycle.append(a)
        if prev is None:
            break
        u = prev
    cycle.reverse()
    return Point(prefix, cycle)


# -- strategy tables ---------------------------------------------------------------------------------


def _table_reachable(t, roots):
    seen = set(roots)
    todo = list(roots)
    while todo:
        q = todo.pop()
        for nxt, _ in t.rows[q]:
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


def simplify_table(t: StrategyTable):
    """Rewrite a table as Copy, Prepend, Const or a first-letter map when it is one."""
    if t.wadge:
        return t
    top = t.threshold
    rows = t.rows
    reach = _table_reachable(t, [t.init])

    def echoes(states):
        return all(outs == (ECHO,) for q in states for _, outs in rows[q])

    if t.role == "I" and echoes(reach):
        return Prepend(t.opening)
    if t.role == "II" and t.lead == 0:
        first = rows[t.init]
        after = _table_reachable(t, [nxt for nxt, _ in first])
        if echoes(after) and all(len(outs) == 1 for _, outs in first):
            even, odd = first[top][1][0], first[top + 1][1][0]
            if even == odd == ECHO:
                default = Identity()
            elif even == odd:
                default = ConstLetter(even)
            else:
                return t
            explicit = {}
            for c in range(top):
                v = first[c][1][0]
                v = c if v == ECHO else v
                if v != default(c):
                    explicit[c] = v
            if not explicit and default == Identity():
                return Copy()
            return flm(explicit, default)
    if all(len({row[c] for c in range(top + 2)}) == 1 for row in (rows[q] for q in reach)) \
            and not any(ECHO in outs for q in reach for _, outs in rows[q]):
        return Const(apply(t, vec(0)))
    return t


# -- fixed points and powers --------------------------------------------------------------------------


def fixed_point(t) -> Point:
    """The unique fixed point of a contraction, computed exactly."""
    t = normalize(t)
    s = shift(t)
    if s < 1:
        raise PreconditionError(f"{t} is not a certified contraction (shift {s})")
    if s == INF:
        return apply(t, vec(0))
    m = machine(t)
    state, out = m.start()
    out = list(out)
    fed = []
    seen = {}
    for _ in range(MAX_STEPS):
        i = len(fed)
        # letters emitted but not yet fed back, or fed but not yet emitted
        debt = ("ahead",) + tuple(out[i:]) if len(out) >= i else ("behind",) + tuple(fed[len(out):])
        key = (state, debt)
        if key in seen:
            mark = seen[key]
            x = Point(fed[:mark], fed[mark:])
            _check_fixed_point(t, x, s)
            return x
        seen[key] = i
        # with shift >= 1 the next letter of any image is fixed by the letters fed so far
        a = out[i] if len(out) > i else apply(t, Point(fed, (0,)))[i]
        fed.append(a)
        lo = len(out)
        state, o = m.step(state, a)
        out.extend(o)
        if any(out[j] != fed[j] for j in range(lo, min(len(out), len(fed)))):
            raise InternalError("machine output disagrees with the forced fixed-point letters")
    raise InternalError("fixed point search exceeded its step budget")


def _check_fixed_point(t, x, s):
    if apply(t, x) != x:
        raise InternalError("computed point is not fixed")
    step = 1 if s == INF else s
    for start in (vec(0), vec(1)):
        y = start
        for n in range(1, 6):
            y = apply(t, y)
            if distance(Metric.D, y, x) > pow2(-n * step):
                raise InternalError("Banach iterates do not converge to the fixed point")


def power_to_constant(t, r):
    r = Fraction(r)
    if not 0 < r < 1:
        raise RejectedInput("target constant must satisfy 0 < r < 1")
    res = best_constant(t, Metric.D)
    if res[0] != "const" or res[1] >= 1:
        raise PreconditionError(f"{t} is not a certified contraction")
    n = 1
    while True:
        cand = iterate(t, n)
        c = best_constant(cand, Metric.D)[1]
        if c <= r:
            return cand
        n += 1


# -- random generation (tests and audits) ---------------------------------------------------------------


def random_letter_map(rng, affine_only=False):
    kinds = ["id", "add", "max", "affine", "const"] + ([] if affine_only else ["sq1", "half"])
    k = rng.choice(kinds)
    if k == "id":
        return Identity()
    if k == "add":
        return AddConst(rng.randrange(3))
    if k == "max":
        return MaxWith(rng.randrange(4))
    if k == "affine":
        return Affine(rng.randrange(1, 3), rng.randrange(3))
    if k == "const":
        return ConstLetter(rng.randrange(4))
    if k == "sq1":
        return SquarePlusOne()
    return Half()


def random_point_small(rng):
    return Point(tuple(rng.randrange(4) for _ in range(rng.randrange(3))),
                 tuple(rng.randrange(4) for _ in range(rng.randint(1, 2))))


def random_transducer(rng, depth=2):
    """Random term over the first-letter-analysable combinators."""
    if depth <= 0:
        k = rng.choice(["copy", "prepend", "drop", "flm", "pad", "const", "mask"])
    else:
        k = rng.choice(["copy", "prepend", "drop", "flm", "pad", "const", "mask",
                        "case", "compose", "compose"])
    if k == "copy":
        return Copy()
    if k == "prepend":
        return Prepend(tuple(rng.randrange(4) for _ in range(rng.randint(1, 2))))
    if k == "drop":
        return Drop(rng.randint(1, 2))
    if k == "flm":
        explicit = {rng.randrange(4): rng.randrange(5) for _ in range(rng.randrange(3))}
        return flm(explicit, random_letter_map(rng))
    if k == "pad":
        return PadByFirstLetter()
    if k == "const":
        return Const(random_point_small(rng))
    if k == "mask":
        return Mask(rng.randint(1, 3), random_point_small(rng))
    if k == "case":
        branches = {rng.randrange(4): random_transducer(rng, depth - 1)
                    for _ in range(rng.randint(1, 2))}
        return case(branches, random_transducer(rng, depth - 1))
    return compose(random_transducer(rng, depth - 1), random_transducer(rng, depth - 1))
