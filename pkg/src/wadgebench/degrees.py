"""Reducibility relations as game queries, degrees and theorem audits."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product as cartesian

from . import automata as AU
from . import sets as S
from .automata import SetAutomaton, equivalent
from .core import vec
from .errors import RejectedInput, UnsupportedTier
from .games import (I, II, CorpusGames, GameArena, check_strategy, extract_I, extract_II,
                    solve, verdict_at, _lead_word)
from .metrics import Metric, pow2
from .transducers import Const, Copy, certify_lipschitz, fixed_point, verify_reduction


def n_of_r(r):
    """Least n with 2^-(n+1) <= r, for 0 < r < 1."""
    r = Fraction(r)
    if not 0 < r < 1:
        raise RejectedInput("r must satisfy 0 < r < 1")
    n = 0
    while pow2(-(n + 1)) > r:
        n += 1
    return n


@dataclass(frozen=True)
class Rel:
    kind: str  # L, C, Cr, LipK, LipB, W
    r: Fraction | None = None
    k: int | None = None

    @property
    def lead(self):
        if self.kind == "Cr":
            return n_of_r(self.r)
        if self.kind == "LipK":
            return self.k
        return 0

    def __str__(self):
        if self.kind == "Cr":
            return f"Cr({self.r})"
        if self.kind == "LipK":
            return f"Lip({self.k})"
        if self.kind == "LipB":
            return f"LipB({self.k})" if self.k is not None else "LipB"
        return self.kind

    @staticmethod
    def parse(text):
        if isinstance(text, Rel):
            return text
        t = text.strip()
        if t in ("L", "C", "W"):
            return Rel(t)
        m = re.fullmatch(r"Cr\(\s*(\d+)\s*/\s*(\d+)\s*\)", t)
        if m:
            r = Fraction(int(m.group(1)), int(m.group(2)))
            n_of_r(r)
            return Rel("Cr", r=r)
        m = re.fullmatch(r"(?:Lip|LipK)\(\s*(\d+)\s*\)", t)
        if m:
            return Rel("LipK", k=int(m.group(1)))
        m = re.fullmatch(r"LipB(?:\(\s*(\d+)\s*\))?", t)
        if m:
            return Rel("LipB", k=None if m.group(1) is None else int(m.group(1)))
        raise RejectedInput(f"unknown relation {text!r}; use L, C, Cr(p/q), Lip(k), LipB(K) or W")


L, C, W = Rel("L"), Rel("C"), Rel("W")


def cr(r):
    return Rel("Cr", r=Fraction(r))


# -- verdicts ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Holds:
    witness: object
    check: object = None  # ReductionVerdict of the witness
    note: str = ""
    status = "Holds"

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Fails:
    counter: object = None  # opposing strategy as a transducer, when extractable
    game: str = ""
    counter_checked: bool = False
    status = "Fails"

    def __bool__(self):
        return False


@dataclass(frozen=True)
class Unknown:
    reason: str
    status = "Unknown"

    def __bool__(self):
        return False


def _aut(x) -> SetAutomaton:
    if isinstance(x, SetAutomaton):
        return x
    if S.tier(x) != 1:
        raise UnsupportedTier(
            f"{x} is a symbolic set; reducibility games need tier-1 sets "
            "(use sampled verification from the constructions module)")
    return S.minimal(x)


def _checked(t, a, b):
    return verify_reduction(t, a, b, mode="exact")


def leq(rel, a, b, verify=True):
    """Decide A <=_rel B by the matching game and return a verdict with witnesses."""
    rel = Rel.parse(rel)
    A, B = _aut(a), _aut(b)
    if rel.kind == "L":
        return _lipschitz(A, B, 0, verify, "G_L")
    if rel.kind == "LipK":
        return _lipschitz(A, B, rel.k, verify, f"G_{rel.k}-Lip")
    if rel.kind == "LipB":
        bound = rel.k if rel.k is not None else A.n_states + B.n_states + 4
        for k in range(bound + 1):
            res = _lipschitz(A, B, k, verify, f"G_{k}-Lip")
            if isinstance(res, Holds):
                return res
        return Unknown(f"II wins no G_k-Lip(A, B) for k <= {bound}")
    if rel.kind in ("C", "Cr"):
        if equivalent(A, B):
            return Holds(Copy(), _checked(Copy(), A, B) if verify else None, "equal sets")
        k = rel.lead
        v = verdict_at(GameArena(B.complement(), A, k), B.init, A.init, k)
        name = f"G_{k}-Lip(not B, A)" if k else "G_L(not B, A)"
        if v.winner == "I":
            t = extract_I(v)
            return Holds(t, _checked(t, A, B) if verify else None, f"I wins {name}")
        t = extract_II(v)
        return Fails(t, f"II wins {name}", check_strategy(v))
    if rel.kind == "W":
        v = solve(GameArena(A, B, 0, "wadge"))
        if v.winner == "II":
            t = extract_II(v)
            return Holds(t, _checked(t, A, B) if verify else None, "II wins the Wadge game")
        return Fails(None, "I wins the Wadge game", check_strategy(v))
    raise RejectedInput(f"unsupported relation {rel}")


def _lipschitz(A, B, k, verify, name):
    arena = GameArena(A, B, k)
    v = verdict_at(arena, A.init, B.init, k)
    if v.winner == "II":
        t = extract_II(v)
        return Holds(t, _checked(t, A, B) if verify else None, f"II wins {name}(A, B)")
    t = extract_I(v)
    return Fails(t, f"I wins {name}(A, B)", check_strategy(v))


def selfdual(a, rel=L):
    A = _aut(a)
    return isinstance(leq(rel, A, A.complement(), verify=False), Holds)


@dataclass(frozen=True)
class SelfContraction:
    contractible: bool
    witness: object = None
    check: object = None
    fixed_point: object = None

    def __bool__(self):
        return self.contractible


def selfcontractible(a):
    """Decide whether a contraction f has f^-1(A) = A; returns witness and fixed point."""
    A = _aut(a)
    if equivalent(A, AU.empty()) or equivalent(A, AU.full()):
        t = Const(vec(0))
        return SelfContraction(True, t, _checked(t, A, A), fixed_point(t))
    v = solve(GameArena(A.complement(), A))
    if v.winner != "I":
        return SelfContraction(False)
    t = extract_I(v)
    return SelfContraction(True, t, _checked(t, A, A), fixed_point(t))


# -- corpora --------------------------------------------------------------------------------

MAX_CORPUS = 4096


def _first_class_set(c, letters):
    if c < letters:
        return S.Cylinder((c,))
    parts = [S.Cylinder((a,)) for a in range(letters)]
    return S.Complement(_union(parts))


def _union(parts):
    parts = list(parts)
    if not parts:
        return S.Empty()
    out = parts[0]
    for p in parts[1:]:
        out = S.Union(out, p)
    return out


def _class_set(classes, letters):
    """Sequences whose first letter falls in one of the given classes."""
    classes = sorted(classes)
    if not classes:
        return S.Empty()
    if len(classes) == letters + 1:
        return S.Full()
    if classes[-1] == letters:
        rest = [a for a in range(letters) if a not in classes]
        return S.Complement(_union(S.Cylinder((a,)) for a in rest))
    return _union(S.Cylinder((a,)) for a in classes)


def _clopen_expr(table, depth, letters):
    """Expression for the set decided by the class word of the first ``depth`` letters."""
    k = letters + 1
    if depth == 1:
        return _class_set([c for c in range(k) if table[(c,)]], letters)
    comps = []
    for c in range(k):
        sub = {w[1:]: v for w, v in table.items() if w[0] == c}
        comps.append(_clopen_expr(sub, depth - 1, letters))
    if all(isinstance(x, S.Empty) for x in comps):
        return S.Empty()
    if all(isinstance(x, S.Full) for x in comps):
        return S.Full()
    return S.OSum(tuple(comps[:letters]), comps[letters])


def clopen_corpus(depth=2, letters=2):
    words = list(cartesian(range(letters + 1), repeat=depth))
    count = 2 ** len(words)
    if count > MAX_CORPUS:
        raise RejectedInput(f"corpus of depth {depth} over {letters} letters has {count} sets "
                            f"(limit {MAX_CORPUS})")
    out = []
    for bits in range(count):
        table = {w: bool(bits >> i & 1) for i, w in enumerate(words)}
        out.append((f"c{depth}_{bits:0{(len(words) + 3) // 4}x}", _clopen_expr(table, depth, letters)))
    return out


def named_sets():
    h0, h1 = S.hits(0), S.hits(1)
    return [
        ("hits_zero", h0),
        ("avoids_zero", ~h0),
        ("hits_one", h1),
        ("avoids_one", ~h1),
        ("hits_both", h0 & h1),
        ("hits_neither", ~(h0 | h1)),
        ("hits_either", h0 | h1),
        ("misses_one_of", ~(h0 & h1)),
        ("zero_not_one", h0 & ~h1),
        ("one_or_no_zero", ~(h0 & ~h1)),
        ("starts_zero_or_hits_one", S.Cylinder((0,)) | h1),
        ("avoids_one_after_nonzero", ~(S.Cylinder((0,)) | h1)),
    ]


def enumerate_corpus(depth=2, letters=2, named=True):
    """Clopen sets of the given depth plus named open/closed/difference sets, deduplicated."""
    seen = set()
    out = []
    for name, e in clopen_corpus(depth, letters) + (named_sets() if named else []):
        key = S.minimal(e).canonical_key()
        if key in seen:
            continue
        seen.add(key)
        out.append((name, e))
    return out


def is_open(a):
    """A set is open when every state on an accepting cycle has only accepting futures."""
    A = _aut(a)
    for q in range(A.n_states):
        if A.labels[q] and A.is_cyclic(q) and A.decided(q) is not True:
            return False
    return True


class CorpusAnalysis:
    """Every pairwise relation over a corpus, read off two shared arenas."""

    def __init__(self, corpus):
        self.names = [n for n, _ in corpus]
        self.exprs = [e for _, e in corpus]
        self.automata = [_aut(e) for e in self.exprs]
        n = len(self.automata)
        self.n = n
        extra = [a.complement() for a in self.automata] + [AU.empty(), AU.full()]
        self.games = CorpusGames(self.automata + extra)
        roots = self.games.roots
        self.root = roots[:n]
        self.neg = roots[n:2 * n]
        self.empty_root, self.full_root = roots[2 * n], roots[2 * n + 1]
        self._residual = {}

    @property
    def union(self):
        return self.games.union

    def residual(self, q):
        if q not in self._residual:
            self._residual[q] = self.union.at(q)
        return self._residual[q]

    def _agree_win(self, qa, qb):
        arena = self.games.agree
        return arena.solution().win[arena.i_pos(qa, qb)]

    def _flip_win(self, qa, qb):
        arena = self.games.flip
        return arena.solution().win[arena.i_pos(qa, qb)]

    # -- relations --

    def same(self, i, j):
        return self.root[i] == self.root[j]

    def L(self, i, j):
        return self._agree_win(self.root[i], self.root[j]) == II

    def C(self, i, j):
        return self.same(i, j) or self._flip_win(self.root[j], self.root[i]) == I

    def Cr(self, i, j, r):
        if self.same(i, j):
            return True
        k = n_of_r(r)
        if k == 0:
            return self.C(i, j)
        sol = self.games.flip.solution()
        return _lead_word(self.games.flip, sol, self.root[j], self.root[i], k + 1) is not None

    def L_to_neg(self, i, j):
        """A_i <=_L not A_j."""
        return self._agree_win(self.root[i], self.neg[j]) == II

    def C_neg_to(self, j, i):
        """not A_j <=_c A_i."""
        if self.neg[j] == self.root[i]:
            return True
        return self._flip_win(self.root[i], self.neg[j]) == I

    def selfdual_L(self, i):
        return self.L_to_neg(i, i)

    def selfcontractible(self, i):
        return self._flip_win(self.root[i], self.root[i]) == I

    def banach_violation(self, i):
        """True when leq(C, A, not A) would hold (it never should)."""
        return self.neg[i] == self.root[i] or self._flip_win(self.neg[i], self.root[i]) == I

    def prefixed_L(self, m, i, j):
        """0^m followed by A_i, L-reduces to A_j."""
        arena = self.games.agree
        sol = arena.solution()
        delta = self.union.delta
        memo = {}

        def wins(k, qb):
            if k == 0:
                return sol.win[arena.i_pos(self.root[i], qb)] == II
            key = (k, qb)
            if key not in memo:
                after_zero = any(wins(k - 1, t) for t in delta[qb])
                after_other = any(sol.win[arena.i_pos(self.empty_root, t)] == II for t in delta[qb])
                memo[key] = after_zero and after_other
            return memo[key]

        return wins(m, self.root[j])

    # -- matrices --

    def matrix(self, rel):
        rel = Rel.parse(rel)
        n = self.n
        if rel.kind == "L":
            f = self.L
        elif rel.kind == "C":
            f = self.C
        elif rel.kind == "Cr":
            return [[self.Cr(i, j, rel.r) for j in range(n)] for i in range(n)]
        else:
            return [[isinstance(leq(rel, self.automata[i], self.automata[j], verify=False), Holds)
                     for j in range(n)] for i in range(n)]
        return [[f(i, j) for j in range(n)] for i in range(n)]

    @cached_property
    def l_matrix(self):
        return self.matrix(L)

    @cached_property
    def c_matrix(self):
        return self.matrix(C)

    @cached_property
    def l_selfdual(self):
        return [self.selfdual_L(i) for i in range(self.n)]

    # -- witnesses --

    def witness(self, i, j):
        """Extracted witness for the G_L(A_i, A_j) winner: (role, transducer, verification)."""
        v = self.games.verdict(i, j)
        A, B = self.residual(self.root[i]), self.residual(self.root[j])
        if v.winner == "II":
            t = extract_II(v)
            return "II", t, verify_reduction(t, A, B)
        t = extract_I(v)
        return "I", t, verify_reduction(t, B, A.complement())


# -- degrees and Hasse diagrams ------------------------------------------------------------------


@dataclass
class HasseNode:
    members: list
    selfdual: bool


@dataclass
class HasseDiagram:
    rel: str
    nodes: list
    edges: list  # (lower, upper) covering pairs
    flagged: list = field(default_factory=list)

    def sources(self):
        uppers = {u for _, u in self.edges}
        return [i for i in range(len(self.nodes)) if i not in uppers]

    def is_acyclic(self):
        n = len(self.nodes)
        indeg = [0] * n
        adj = [[] for _ in range(n)]
        for a, b in self.edges:
            adj[a].append(b)
            indeg[b] += 1
        todo = [i for i in range(n) if indeg[i] == 0]
        seen = 0
        while todo:
            v = todo.pop()
            seen += 1
            for w in adj[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    todo.append(w)
        return seen == n

    def to_dot(self):
        if not self.is_acyclic():
            raise RejectedInput("refusing to emit a cyclic Hasse diagram")
        lines = [f'digraph "{self.rel}" {{', "  rankdir=BT;"]
        for i, node in enumerate(self.nodes):
            label = "\\n".join(node.members[:6]) + ("\\n..." if len(node.members) > 6 else "")
            shape = "box" if node.selfdual else "ellipse"
            lines.append(f'  n{i} [label="{label}", shape={shape}];')
        for a, b in self.edges:
            lines.append(f"  n{a} -> n{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _analysis(corpus):
    return corpus if isinstance(corpus, CorpusAnalysis) else CorpusAnalysis(corpus)


def _classes_from(matrix, keys):
    n = len(matrix)
    assigned = [-1] * n
    classes = []
    order = sorted(range(n), key=lambda i: keys[i])
    for i in order:
        if assigned[i] >= 0:
            continue
        cls = [j for j in order if assigned[j] < 0 and matrix[i][j] and matrix[j][i]]
        for j in cls:
            assigned[j] = len(classes)
        classes.append(cls)
    return classes, assigned


def equiv_classes(corpus, rel=L):
    an = _analysis(corpus)
    m = an.matrix(rel)
    keys = [a.canonical_key() for a in an.automata]
    classes, _ = _classes_from(m, keys)
    return [[an.names[i] for i in cls] for cls in classes]


def hasse(corpus, rel=L):
    rel = Rel.parse(rel)
    an = _analysis(corpus)
    m = an.matrix(rel)
    keys = [a.canonical_key() for a in an.automata]
    classes, assigned = _classes_from(m, keys)
    k = len(classes)
    reps = [cls[0] for cls in classes]
    below = [[a != b and m[reps[a]][reps[b]] for b in range(k)] for a in range(k)]
    edges = []
    for a in range(k):
        for b in range(k):
            if below[a][b] and not any(below[a][c] and below[c][b] for c in range(k)):
                edges.append((a, b))
    nodes = [HasseNode([an.names[i] for i in cls], an.l_selfdual[cls[0]]) for cls in classes]
    return HasseDiagram(str(rel), nodes, edges)


# -- audits -------------------------------------------------------------------------------------


@dataclass
class AuditCheck:
    name: str
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def record(self, ok, item):
        self.checked += 1
        if not ok:
            self.violations.append(item)


def audit_theorems(corpus, radii=(Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))):
    """Check the structure theorems relating L, c and c(r) on every applicable pair."""
    an = _analysis(corpus)
    n = an.n
    Lm, Cm, sd = an.l_matrix, an.c_matrix, an.l_selfdual
    names = an.names
    checks = {k: AuditCheck(k) for k in
              ("differentdegrees", "samedegree", "cor1", "cor2", "cor6", "sslo", "banach",
               "c_in_l")}
    for i in range(n):
        for j in range(n):
            pair = (names[i], names[j])
            l_equiv = Lm[i][j] and Lm[j][i]
            if not l_equiv:
                checks["differentdegrees"].record(Cm[i][j] == Lm[i][j], pair)
            elif not an.same(i, j):
                checks["samedegree"].record(Cm[i][j] == (not sd[i]), pair)
            strict_c = Cm[i][j] and not Cm[j][i]
            strict_l = Lm[i][j] and not Lm[j][i]
            checks["cor6"].record(strict_c == strict_l, pair)
            checks["sslo"].record(Lm[i][j] or an.C_neg_to(j, i), pair)
            checks["c_in_l"].record(not Cm[i][j] or Lm[i][j], pair)
    for i in range(n):
        l_class = {j for j in range(n) if Lm[i][j] and Lm[j][i]}
        c_class = {j for j in range(n) if Cm[i][j] and Cm[j][i]}
        expected = l_class if not sd[i] else {j for j in range(n) if an.same(i, j)}
        checks["cor1"].record(c_class == expected, names[i])
        checks["cor2"].record(an.selfcontractible(i) == (not sd[i]), names[i])
        checks["banach"].record(not an.banach_violation(i), names[i])
    for r in radii:
        name = f"c(r) r={r}"
        check = checks[name] = AuditCheck(name)
        k = n_of_r(r)
        for i in range(n):
            for j in range(n):
                lhs = an.Cr(i, j, r)
                rhs = (an.same(i, j) or (not sd[i] and Lm[i][j])
                       or (sd[i] and an.prefixed_L(k + 1, i, j)))
                check.record(lhs == rhs, (names[i], names[j]))
    return checks


def roundtrip(corpus):
    """Extract and exactly verify the G_L witness of every ordered pair."""
    an = _analysis(corpus)
    check = AuditCheck("witness roundtrip")
    half = Fraction(1, 2)
    constants = {}
    for i in range(an.n):
        for j in range(an.n):
            role, t, res = an.witness(i, j)
            if t not in constants:
                cert = certify_lipschitz(t, Metric.D)
                constants[t] = getattr(cert, "constant", None)
            c = constants[t]
            bound = 1 if role == "II" else half
            ok = res.holds and c is not None and c <= bound
            check.record(ok, (an.names[i], an.names[j], role))
    return check
