"""Deterministic weak acceptors over the infinite alphabet of naturals.

Every automaton has one global threshold ``T``.  A state's row lists the
target for each letter ``0..T-1`` followed by the target for even letters
``>= T`` and for odd letters ``>= T``; these ``T + 2`` entries are the
*letter classes*.  Each strongly connected component carries a single
label, so membership is the label of the component the run settles in.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from .core import Point
from .errors import InternalError, RejectedInput

IN = True
OUT = False


@dataclass(frozen=True)
class Explicit:
    letter: int


@dataclass(frozen=True)
class ParityAbove:
    threshold: int
    parity: str  # "even" or "odd"


@dataclass(frozen=True)
class Default:
    threshold: int


LetterClass = Explicit | ParityAbove | Default


class Certificate(NamedTuple):
    """How a membership question was settled.

    ``kind`` is ``"depth"`` when the answer was fixed after reading
    ``depth`` letters, and ``"period"`` when the run entered a
    label-homogeneous cycle at position ``depth`` while reading the period.
    """

    kind: str
    depth: int

    def shifted(self, k):
        return Certificate(self.kind, max(0, self.depth + k))

    @staticmethod
    def combine(*certs):
        kind = "period" if any(c.kind == "period" for c in certs) else "depth"
        return Certificate(kind, max((c.depth for c in certs), default=0))


def tail_reps(threshold):
    """Least even and least odd letter at or above ``threshold``."""
    t = threshold
    return (t, t + 1) if t % 2 == 0 else (t + 1, t)


class SetAutomaton:
    __slots__ = ("threshold", "delta", "labels", "init", "_cache")

    def __init__(self, threshold, delta, labels, init=0):
        self.threshold = threshold
        self.delta = tuple(tuple(row) for row in delta)
        self.labels = tuple(bool(b) for b in labels)
        self.init = init
        self._cache = {}
        n = len(self.delta)
        if len(self.labels) != n or not 0 <= init < n:
            raise InternalError("malformed automaton")
        width = threshold + 2
        for row in self.delta:
            if len(row) != width or any(not 0 <= t < n for t in row):
                raise InternalError("malformed automaton row")

    # -- letters and classes -------------------------------------------------

    @property
    def n_states(self):
        return len(self.delta)

    @property
    def n_classes(self):
        return self.threshold + 2

    def cls(self, a):
        t = self.threshold
        return a if a < t else t + (a & 1)

    def rep(self, c):
        t = self.threshold
        if c < t:
            return c
        even, odd = tail_reps(t)
        return even if c == t else odd

    def step(self, q, a):
        return self.delta[q][self.cls(a)]

    def run(self, q, word):
        for a in word:
            q = self.delta[q][self.cls(a)]
        return q

    def letter_classes(self, q):
        """Human-facing partition of the letters at state ``q``."""
        row = self.delta[q]
        t = self.threshold
        even, odd = row[t], row[t + 1]
        # shrink the explicit part while letters agree with the tail rule
        lo = t
        while lo > 0 and row[lo - 1] == (even if (lo - 1) % 2 == 0 else odd):
            lo -= 1
        out = [(Explicit(a), row[a]) for a in range(lo)]
        if even == odd:
            out.append((Default(lo), even))
        else:
            out.append((ParityAbove(lo, "even"), even))
            out.append((ParityAbove(lo, "odd"), odd))
        return out

    def expand(self, threshold):
        """Same automaton presented with a larger threshold."""
        t = self.threshold
        if threshold <= t:
            return self
        rows = []
        for row in self.delta:
            extra = [row[t] if a % 2 == 0 else row[t + 1] for a in range(t, threshold)]
            rows.append(row[:t] + tuple(extra) + (row[t], row[t + 1]))
        return SetAutomaton(threshold, rows, self.labels, self.init)

    # -- graph structure -----------------------------------------------------

    def _sccs(self):
        if "scc" not in self._cache:
            comp, order = tarjan(self.n_states, lambda q: self.delta[q])
            cyclic = [False] * len(order)
            for q, row in enumerate(self.delta):
                if any(comp[t] == comp[q] for t in row):
                    cyclic[comp[q]] = True
            self._cache["scc"] = (comp, order, cyclic)
        return self._cache["scc"]

    def scc_of(self, q):
        return self._sccs()[0][q]

    def is_cyclic(self, q):
        comp, _, cyclic = self._sccs()
        return cyclic[comp[q]]

    def is_weak(self):
        comp, order, cyclic = self._sccs()
        for members in order:
            if len({self.labels[q] for q in members}) > 1:
                return False
        return True

    def reachable(self, roots=None):
        roots = [self.init] if roots is None else roots
        seen = set(roots)
        todo = list(roots)
        while todo:
            q = todo.pop()
            for t in self.delta[q]:
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return seen

    def outcome_masks(self):
        """Bitmask per state: 1 if an IN cycle is reachable, 2 if an OUT cycle is."""
        if "masks" not in self._cache:
            comp, order, cyclic = self._sccs()
            scc_mask = [0] * len(order)
            for i, members in enumerate(order):  # sinks first
                m = 0
                if cyclic[i]:
                    m |= 1 if self.labels[members[0]] else 2
                for q in members:
                    for t in self.delta[q]:
                        if comp[t] != i:
                            m |= scc_mask[comp[t]]
                scc_mask[i] = m
            self._cache["masks"] = [scc_mask[comp[q]] for q in range(self.n_states)]
        return self._cache["masks"]

    def decided(self, q):
        """IN/OUT when every continuation from ``q`` gives the same answer, else None."""
        m = self.outcome_masks()[q]
        if m == 1:
            return IN
        if m == 2:
            return OUT
        return None

    @property
    def alternation_rank(self):
        """Maximum number of label changes along any path from the initial state."""
        if "alt" not in self._cache:
            comp, order, cyclic = self._sccs()
            best = [0] * len(order)
            for i, members in enumerate(order):
                lab = self.labels[members[0]]
                b = 0
                for q in members:
                    for t in self.delta[q]:
                        j = comp[t]
                        if j != i:
                            b = max(b, best[j] + (self.labels[order[j][0]] != lab))
                best[i] = b
            self._cache["alt"] = best[comp[self.init]]
        return self._cache["alt"]

    # -- membership ----------------------------------------------------------

    def member(self, x: Point, q=None):
        """Exact membership of ``x`` from state ``q`` (default: initial)."""
        q = self.init if q is None else q
        for i, a in enumerate(x.prefix):
            verdict = self.decided(q)
            if verdict is not None:
                return verdict, Certificate("depth", i)
            q = self.delta[q][self.cls(a)]
        base = len(x.prefix)
        per = x.period
        seen = {}
        trace = []
        i = 0
        while True:
            verdict = self.decided(q)
            if verdict is not None:
                return verdict, Certificate("depth", base + i)
            key = (q, i % len(per))
            if key in seen:
                start = seen[key]
                loop = trace[start:]
                label = self.labels[loop[0]]
                comp = self.scc_of(loop[0])
                entry = next(j for j, s in enumerate(trace) if self.scc_of(s) == comp)
                return label, Certificate("period", base + entry)
            seen[key] = i
            trace.append(q)
            q = self.delta[q][self.cls(per[i % len(per)])]
            i += 1

    def accepts(self, x):
        return self.member(x)[0]

    # -- derived automata ----------------------------------------------------

    def complement(self):
        return SetAutomaton(self.threshold, self.delta, [not b for b in self.labels], self.init)

    def restricted(self, roots=None):
        """Drop unreachable states; returns (automaton, old->new map)."""
        roots = [self.init] if roots is None else list(roots)
        order = []
        index = {}
        todo = deque()
        for r in roots:
            if r not in index:
                index[r] = len(order)
                order.append(r)
                todo.append(r)
        while todo:
            q = todo.popleft()
            for t in self.delta[q]:
                if t not in index:
                    index[t] = len(order)
                    order.append(t)
                    todo.append(t)
        rows = [[index[t] for t in self.delta[q]] for q in order]
        labels = [self.labels[q] for q in order]
        return SetAutomaton(self.threshold, rows, labels, index[roots[0]]), index

    def at(self, q):
        """Same automaton started at ``q`` (the residual set), pruned."""
        return SetAutomaton(self.threshold, self.delta, self.labels, q).restricted()[0]

    def minimize(self):
        return minimize_roots(self, [self.init])[0]

    def canonical_key(self):
        if "key" not in self._cache:
            m = self.minimize()
            self._cache["key"] = (m.threshold, m.delta, m.labels)
        return self._cache["key"]

    def colors(self):
        return _colors(self)

    def __repr__(self):
        return f"SetAutomaton(states={self.n_states}, threshold={self.threshold})"


# -- graph helpers ---------------------------------------------------------------


def tarjan(n, succ):
    """Iterative Tarjan.  Returns (component id per node, components sinks-first)."""
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    comp = [-1] * n
    stack = []
    order = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on[w] = True
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if on[w] and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                members = []
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp[w] = len(order)
                    members.append(w)
                    if w == v:
                        break
                order.append(members)
    return comp, order


# -- minimisation ------------------------------------------------------------------


def _colors(aut):
    """Normalised priorities: equal for language-equivalent states.

    Cyclic components get the least value of their label's parity (even for
    IN) that is at least every successor component's value; transient states
    take the maximum over their successors.
    """
    comp, order, cyclic = aut._sccs()
    col = [0] * len(order)
    for i, members in enumerate(order):
        succ = -1
        for q in members:
            for t in aut.delta[q]:
                if comp[t] != i:
                    succ = max(succ, col[comp[t]])
        if cyclic[i]:
            want = 0 if aut.labels[members[0]] else 1
            c = max(succ, 0)
            if c % 2 != want:
                c += 1
        else:
            c = succ
        col[i] = c
    return [col[comp[q]] for q in range(aut.n_states)]


def normalize_threshold(aut):
    top = aut.threshold
    t = top
    while t > 0:
        a = t - 1
        tail_col = top if a % 2 == 0 else top + 1
        if all(row[a] == row[tail_col] for row in aut.delta):
            t -= 1
        else:
            break
    if t == top:
        return aut
    rows = [row[:t] + (row[top], row[top + 1]) for row in aut.delta]
    return SetAutomaton(t, rows, aut.labels, aut.init)


def minimize_roots(aut, roots):
    """Minimal canonical automaton for several start states at once.

    Returns (automaton whose init is the class of roots[0], list of class
    ids for each root).  Class numbering is canonical (breadth-first from
    the roots, letter classes in order), so equal languages give equal
    encodings.
    """
    sub, index = aut.restricted(roots)
    sub = normalize_threshold(sub)
    col = _colors(sub)
    n = sub.n_states
    block = col[:]
    nblocks = len(set(block))
    while True:
        sig = {}
        new = [0] * n
        for q in range(n):
            key = (block[q],) + tuple(block[t] for t in sub.delta[q])
            new[q] = sig.setdefault(key, len(sig))
        if len(sig) == nblocks:
            break
        block, nblocks = new, len(sig)
    rep_of = {}
    for q in range(n):
        rep_of.setdefault(block[q], q)
    # canonical breadth-first numbering of blocks
    number = {}
    queue = deque()
    for r in roots:
        b = block[index[r]]
        if b not in number:
            number[b] = len(number)
            queue.append(b)
    while queue:
        b = queue.popleft()
        for t in sub.delta[rep_of[b]]:
            tb = block[t]
            if tb not in number:
                number[tb] = len(number)
                queue.append(tb)
    rows = [None] * len(number)
    labels = [None] * len(number)
    for b, k in number.items():
        q = rep_of[b]
        rows[k] = [number[block[t]] for t in sub.delta[q]]
        labels[k] = col[q] % 2 == 0
    root_ids = [number[block[index[r]]] for r in roots]
    out = SetAutomaton(sub.threshold, rows, labels, root_ids[0])
    shrunk = normalize_threshold(out)
    return shrunk, root_ids


def equivalent(a, b):
    return a.canonical_key() == b.canonical_key()


# -- constructions -------------------------------------------------------------------


def empty():
    return SetAutomaton(0, [[0, 0]], [OUT])


def full():
    return SetAutomaton(0, [[0, 0]], [IN])


def _check_word(s):
    for a in s:
        if isinstance(a, bool) or not isinstance(a, int) or a < 0:
            raise RejectedInput(f"letters must be natural numbers, got {a!r}")
    return tuple(s)


def cylinder(s):
    s = _check_word(s)
    if not s:
        return full()
    t = max(s) + 1
    n = len(s)
    sink_in, sink_out = n, n + 1
    rows = []
    for i, a in enumerate(s):
        row = [sink_out] * (t + 2)
        row[a] = i + 1 if i + 1 < n else sink_in
        rows.append(row)
    rows.append([sink_in] * (t + 2))
    rows.append([sink_out] * (t + 2))
    return SetAutomaton(t, rows, [OUT] * n + [IN, OUT])


def product(a, b, combine):
    t = max(a.threshold, b.threshold)
    a, b = a.expand(t), b.expand(t)
    start = (a.init, b.init)
    index = {start: 0}
    pairs = [start]
    rows = []
    i = 0
    while i < len(pairs):
        p, q = pairs[i]
        row = []
        for c in range(t + 2):
            nxt = (a.delta[p][c], b.delta[q][c])
            if nxt not in index:
                index[nxt] = len(pairs)
                pairs.append(nxt)
            row.append(index[nxt])
        rows.append(row)
        i += 1
    labels = [combine(a.labels[p], b.labels[q]) for p, q in pairs]
    return SetAutomaton(t, rows, labels)


def union(a, b):
    return product(a, b, lambda x, y: x or y)


def intersection(a, b):
    return product(a, b, lambda x, y: x and y)


def complement(a):
    return a.complement()


def bool_op(op, a, b=None):
    if op == "complement":
        return complement(a)
    if b is None:
        raise RejectedInput(f"{op} needs two operands")
    if op == "union":
        return union(a, b)
    if op == "intersection":
        return intersection(a, b)
    raise RejectedInput(f"unknown Boolean operation {op!r}")


def _disjoint(parts, threshold):
    """Concatenate state spaces; returns (rows, labels, offsets)."""
    rows, labels, offsets = [], [], []
    for p in parts:
        p = p.expand(threshold)
        off = len(rows)
        offsets.append(off)
        rows.extend([[t + off for t in row] for row in p.delta])
        labels.extend(p.labels)
    return rows, labels, offsets


def concat(s, a):
    s = _check_word(s)
    if not s:
        return a
    t = max(a.threshold, max(s) + 1)
    n = len(s)
    rows, labels, offsets = _disjoint([a], t)
    base = len(rows)
    sink = base + n
    chain = []
    for i, letter in enumerate(s):
        row = [sink] * (t + 2)
        row[letter] = base + i + 1 if i + 1 < n else offsets[0] + a.init
        chain.append(row)
    rows.extend(chain)
    rows.append([sink] * (t + 2))
    labels.extend([OUT] * n + [OUT])
    return SetAutomaton(t, rows, labels, base).restricted()[0]


def localize(s, a):
    s = _check_word(s)
    q = a.run(a.init, s)
    return SetAutomaton(a.threshold, a.delta, a.labels, q).restricted()[0]


def osum(components, default):
    n = len(components)
    parts = list(components) + [default]
    t = max([n] + [p.threshold for p in parts])
    rows, labels, offsets = _disjoint(parts, t)
    init = len(rows)
    row = [0] * (t + 2)
    for c in range(t + 2):
        if c < n:
            row[c] = offsets[c] + components[c].init
        else:
            row[c] = offsets[n] + default.init
    rows.append(row)
    labels.append(OUT)
    return SetAutomaton(t, rows, labels, init).restricted()[0]


def oplus(a, b):
    t = max(a.threshold, b.threshold)
    rows, labels, offsets = _disjoint([a, b], t)
    init = len(rows)
    to_a, to_b = offsets[0] + a.init, offsets[1] + b.init
    row = [to_a if c % 2 == 0 else to_b for c in range(t)]
    row += [to_a, to_b]
    rows.append(row)
    labels.append(OUT)
    return SetAutomaton(t, rows, labels, init).restricted()[0]


def hits(letter):
    """Sequences in which ``letter`` occurs at least once (an open set)."""
    t = letter + 1
    search = [0] * (t + 2)
    search[letter] = 1
    return SetAutomaton(t, [search, [1] * (t + 2)], [OUT, IN])


# -- witnesses -----------------------------------------------------------------------


def _path_points(aut, want):
    """An input whose run settles in a cycle with label ``want``, or None."""
    comp, order, cyclic = aut._sccs()
    parent = {aut.init: None}
    queue = deque([aut.init])
    while queue:
        q = queue.popleft()
        if cyclic[comp[q]] and aut.labels[q] == want:
            prefix = []
            v = q
            while parent[v] is not None:
                v, c = parent[v]
                prefix.append(aut.rep(c))
            prefix.reverse()
            cycle = _cycle_word(aut, q)
            return Point(prefix, cycle)
        for c in range(aut.n_classes):
            t = aut.delta[q][c]
            if t not in parent:
                parent[t] = (q, c)
                queue.append(t)
    return None


def _cycle_word(aut, q):
    """Letters of a cycle from ``q`` back to ``q`` inside its component."""
    comp = aut.scc_of(q)
    parent = {}
    queue = deque()
    for c in range(aut.n_classes):
        t = aut.delta[q][c]
        if aut.scc_of(t) == comp and t not in parent:
            parent[t] = (None, c)
            queue.append(t)
    while queue:
        v = queue.popleft()
        if v == q:
            break
        for c in range(aut.n_classes):
            t = aut.delta[v][c]
            if aut.scc_of(t) == comp and t not in parent:
                parent[t] = (v, c)
                queue.append(t)
    word = []
    v = q
    while True:
        u, c = parent[v]
        word.append(aut.rep(c))
        if u is None:
            break
        v = u
    word.reverse()
    return word


def some_member(aut):
    return _path_points(aut, IN)


def some_nonmember(aut):
    return _path_points(aut, OUT)


def difference_witness(a, b):
    """A point in exactly one of the two sets, or None when they are equal."""
    x = product(a, b, lambda p, q: p != q)
    return some_member(x)
