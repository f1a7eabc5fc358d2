"""Lipschitz, lead-k Lipschitz and Wadge games on pairs of set automata.

Positions are integers.  With ``P = |A| * |B|``:

* ``qa * |B| + qb`` is an I-turn position (in the Wadge variant: reached by
  a real move of II),
* ``P + qa * |B| + qb`` is a II-turn position,
* ``2P + qa * |B| + qb`` (Wadge only) is an I-turn position reached by a pass.

Player I plays letters of the first set, II of the second.  II wins a play
when the limit labels of both runs agree; in the Wadge variant II must also
move infinitely often.  Both conditions are decided per strongly connected
component of the arena, sinks first.
"""

from __future__ import annotations

from array import array
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from .automata import SetAutomaton, minimize_roots, tarjan, tail_reps
from .errors import ExtractionError, RejectedInput
from .transducers import ECHO, StrategyTable, simplify_table

I, II = 0, 1
PASS = -2  # II's pass move in the Wadge variant (distinct from ECHO)
PLAYER_NAMES = ("I", "II")
FREE = -1  # position whose winner may move anywhere winning in its component
UNRANKED = -2  # winning position without a recorded strategy


def _common(a: SetAutomaton, b: SetAutomaton):
    t = max(a.threshold, b.threshold)
    return a.expand(t), b.expand(t), t


def _targets(aut):
    return [tuple(dict.fromkeys(row)) for row in aut.delta]


class GameArena:
    """The finite game graph for a pair of automata."""

    def __init__(self, a: SetAutomaton, b: SetAutomaton, lead=0, variant="lipschitz"):
        if lead < 0:
            raise RejectedInput("lead must be nonnegative")
        if variant not in ("lipschitz", "wadge"):
            raise RejectedInput(f"unknown game variant {variant!r}")
        self.a, self.b, self.threshold = _common(a, b)
        self.lead = lead
        self.variant = variant
        self.wadge = variant == "wadge"
        self.na, self.nb = self.a.n_states, self.b.n_states
        self.block = self.na * self.nb
        self.n_positions = (3 if self.wadge else 2) * self.block
        self.init = (self.a.init, self.b.init)
        self._at = _targets(self.a)
        self._bt = _targets(self.b)
        self._la = self.a.labels
        self._lb = self.b.labels
        self._solution = None

    @property
    def buffer_bound(self):
        """Letters of I not yet answered by II, at most."""
        return self.lead + 1

    @property
    def n_classes(self):
        return self.threshold + 2

    def rep(self, c):
        if c < self.threshold:
            return c
        even, odd = tail_reps(self.threshold)
        return even if c == self.threshold else odd

    # -- encoding --

    def i_pos(self, qa, qb, passed=False):
        return (2 * self.block if passed else 0) + qa * self.nb + qb

    def ii_pos(self, qa, qb):
        return self.block + qa * self.nb + qb

    def decode(self, v):
        kind, rest = divmod(v, self.block)
        qa, qb = divmod(rest, self.nb)
        return kind, qa, qb

    def owner(self, v):
        return II if self.block <= v < 2 * self.block else I

    def label(self, v):
        rest = v % self.block
        qa, qb = divmod(rest, self.nb)
        return self._la[qa] == self._lb[qb]

    def recurrent(self, v):
        """Positions II must visit infinitely often (Wadge liveness)."""
        return v < self.block

    def succ(self, v):
        block, nb = self.block, self.nb
        kind, rest = divmod(v, block)
        qa, qb = divmod(rest, nb)
        if kind == 1:
            base = qa * nb
            out = [base + t for t in self._bt[qb]]
            if self.wadge:
                out.append(2 * block + rest)
            return out
        return [block + t * nb + qb for t in self._at[qa]]

    def moves(self, v):
        """All (move, successor) pairs; moves are letter classes or PASS."""
        kind, qa, qb = self.decode(v)
        if kind == 1:
            row = self.b.delta[qb]
            out = [(c, self.i_pos(qa, t)) for c, t in enumerate(row)]
            if self.wadge:
                out.append((PASS, self.i_pos(qa, qb, passed=True)))
            return out
        return [(c, self.ii_pos(t, qb)) for c, t in enumerate(self.a.delta[qa])]

    def solution(self):
        if self._solution is None:
            self._solution = _solve_all(self)
        return self._solution


@dataclass
class Solution:
    win: bytearray
    rank: array
    comp: list
    choice: dict = field(default_factory=dict)  # fixed moves of I in Wadge liveness zones

    def winner(self, v):
        return self.win[v]


def _solve_all(arena: GameArena) -> Solution:
    n = arena.n_positions
    succ = arena.succ
    comp, order = tarjan(n, succ)
    win = bytearray(n)
    rank = array("i", [FREE]) * n
    choice = {}
    owner = arena.owner
    for members in order:
        if len(members) == 1:
            v = members[0]
            ss = succ(v)
            if v not in ss:
                o = owner(v)
                win[v] = o if any(win[w] == o for w in ss) else 1 - o
                continue
        agree = arena.label(members[0])
        zone = set(members)
        if arena.wadge and agree:
            _buchi(arena, zone, win, rank, choice)
            continue
        good = II if agree else I
        attracted = _attractor(arena, zone, 1 - good, (), win)
        for v in members:
            if v in attracted:
                win[v] = 1 - good
                rank[v] = attracted[v]
            else:
                win[v] = good
    return Solution(win, rank, comp, choice)


def _attractor(arena, zone, player, seeds, win):
    """Ranks of the positions in ``zone`` from which ``player`` forces a seed
    or a decided position outside ``zone`` won by ``player``."""
    owner = arena.owner
    rank = {}
    queue = deque()
    for v in seeds:
        rank[v] = 0
        queue.append(v)
    preds = {v: [] for v in zone}
    need = {}
    first = []
    for v in zone:
        if v in rank:
            continue
        inside = 0
        good_exit = bad_exit = False
        for w in set(arena.succ(v)):
            if w in zone:
                preds[w].append(v)
                inside += 1
            elif win[w] == player:
                good_exit = True
            else:
                bad_exit = True
        if owner(v) == player:
            if good_exit:
                first.append(v)
        elif not bad_exit:
            if inside == 0:
                first.append(v)
            need[v] = inside
    for v in first:
        rank[v] = 1
        queue.append(v)
    while queue:
        w = queue.popleft()
        r = rank[w] + 1
        for v in preds[w]:
            if v in rank:
                continue
            if owner(v) == player:
                rank[v] = r
                queue.append(v)
            elif v in need:
                need[v] -= 1
                if need[v] == 0:
                    rank[v] = r
                    queue.append(v)
    return rank


def _buchi(arena, zone, win, rank, choice):
    """II must stay in an agreeing component and move infinitely often."""
    zone = set(zone)
    while zone:
        seeds = [v for v in zone if arena.recurrent(v)]
        reach = _attractor(arena, zone, II, seeds, win)
        trap = zone - reach.keys()
        if not trap:
            for v in zone:
                win[v] = II
                rank[v] = reach[v] if reach[v] > 0 else FREE
            return
        lost = _attractor(arena, zone, I, trap, win)
        for v, r in lost.items():
            if arena.owner(v) == I:
                choice[v] = _keep_or_descend(arena, v, r, zone, trap, lost, win)
        for v in lost:
            win[v] = I
            rank[v] = UNRANKED
        zone -= lost.keys()


def _keep_or_descend(arena, v, r, zone, trap, lost, win):
    """I's move: stay in the trap (rank 0) or step down the attractor."""
    for w in arena.succ(v):
        if w not in zone:
            if win[w] == I:
                return w
        elif r == 0 and w in trap or r > 0 and w in lost and lost[w] < r:
            return w
    raise ExtractionError("no move of I keeps the Wadge trap")


def allowed_moves(arena: GameArena, sol: Solution, v):
    """Winning moves of the owner of ``v`` that make progress in its region."""
    o = arena.owner(v)
    if sol.win[v] != o:
        return []
    if v in sol.choice:
        return [(m, w) for m, w in arena.moves(v) if w == sol.choice[v]]
    r = sol.rank[v]
    if r == UNRANKED:
        raise ExtractionError("no strategy recorded for this position")
    out = []
    for m, w in arena.moves(v):
        if sol.win[w] != o:
            continue
        if sol.comp[w] != sol.comp[v]:
            out.append((m, w))
        elif r == FREE:
            if sol.rank[w] == FREE:
                out.append((m, w))
        elif max(sol.rank[w], 0) < r:
            out.append((m, w))
    return out


# -- verdicts -------------------------------------------------------------------------


@dataclass
class Verdict:
    winner: str
    arena: GameArena
    root: tuple
    lead: int = 0
    opening: tuple | None = None  # class word of I's lead when I wins

    @property
    def solution(self):
        return self.arena.solution()

    @property
    def size(self):
        return self.arena.n_positions

    def strategy(self, v):
        """Representative letter (or PASS) chosen by the winner at position ``v``."""
        moves = allowed_moves(self.arena, self.solution, v)
        if not moves:
            return None
        classes = [c for c, _ in moves if c != PASS]
        return self.arena.rep(min(classes)) if classes else PASS


def _lead_word(arena, sol, qa, qb, length):
    """Least class word of that length taking I into an I-won II-turn position."""
    memo = {}

    def search(q, k):
        if k == 0:
            return () if sol.win[arena.ii_pos(q, qb)] == I else None
        key = (q, k)
        if key not in memo:
            memo[key] = None
            for c, t in enumerate(arena.a.delta[q]):
                rest = search(t, k - 1)
                if rest is not None:
                    memo[key] = (c,) + rest
                    break
        return memo[key]

    return search(qa, length)


def verdict_at(arena: GameArena, qa, qb, lead=None) -> Verdict:
    lead = arena.lead if lead is None else lead
    sol = arena.solution()
    if lead == 0:
        w = sol.win[arena.i_pos(qa, qb)]
        return Verdict(PLAYER_NAMES[w], arena, (qa, qb), 0)
    word = _lead_word(arena, sol, qa, qb, lead + 1)
    if word is None:
        return Verdict("II", arena, (qa, qb), lead)
    return Verdict("I", arena, (qa, qb), lead, word)


def build_arena(a, b, lead=0, variant="lipschitz"):
    from . import sets as S
    a = a if isinstance(a, SetAutomaton) else S.minimal(a)
    b = b if isinstance(b, SetAutomaton) else S.minimal(b)
    return GameArena(a, b, lead, variant)


def solve(arena: GameArena) -> Verdict:
    return verdict_at(arena, *arena.init)


def game(a, b, lead=0, variant="lipschitz"):
    return solve(build_arena(a, b, lead, variant))


# -- extraction ---------------------------------------------------------------------


def _choose(arena, moves, echo_class):
    classes = sorted(m for m, _ in moves if m != PASS)
    target = dict(moves)
    if echo_class is not None and echo_class in target:
        return ECHO, target[echo_class]
    if classes:
        return arena.rep(classes[0]), target[classes[0]]
    return PASS, target[PASS]


def extract_II(v: Verdict, lead=None, simplify=True):
    """II's winning strategy as a transducer reading I's letters."""
    if v.winner != "II":
        raise ExtractionError("extract_II needs a verdict won by II")
    lead = v.lead if lead is None else lead
    if lead != v.lead:
        raise ExtractionError(f"verdict was solved with lead {v.lead}, not {lead}")
    arena, sol = v.arena, v.solution
    qa0, qb0 = v.root
    index = {}
    states = []
    rows = []

    def sid(key):
        if key not in index:
            index[key] = len(states)
            states.append(key)
        return index[key]

    sid((qa0, qb0, lead))
    i = 0
    while i < len(states):
        qa, qb, pending = states[i]
        row = []
        for c in range(arena.n_classes):
            qa2 = arena.a.delta[qa][c]
            if pending:
                row.append((sid((qa2, qb, pending - 1)), ()))
                continue
            pos = arena.ii_pos(qa2, qb)
            moves = allowed_moves(arena, sol, pos)
            if not moves:
                raise ExtractionError("strategy reaches a position lost by II")
            out, w = _choose(arena, moves, c)
            _, _, qb2 = arena.decode(w)
            row.append((sid((qa2, qb2, 0)), () if out == PASS else (out,)))
        rows.append(tuple(row))
        i += 1
    table = StrategyTable("II", lead, arena.threshold, (), tuple(rows), wadge=arena.wadge)
    return simplify_table(table) if simplify else table


def extract_I(v: Verdict, lead=None, simplify=True):
    """I's winning strategy as a transducer reading II's letters."""
    if v.winner != "I":
        raise ExtractionError("extract_I needs a verdict won by I")
    arena, sol = v.arena, v.solution
    if arena.wadge:
        raise ExtractionError("strategies of I are not extracted in the Wadge variant")
    lead = v.lead if lead is None else lead
    if lead != v.lead:
        raise ExtractionError(f"verdict was solved with lead {v.lead}, not {lead}")
    qa, qb = v.root
    if lead == 0:
        moves = allowed_moves(arena, sol, arena.i_pos(qa, qb))
        c = min(m for m, _ in moves)
        word = (c,)
    else:
        word = v.opening
    opening = tuple(arena.rep(c) for c in word)
    qa = arena.a.run(qa, opening)
    index = {}
    states = []
    rows = []

    def sid(key):
        if key not in index:
            index[key] = len(states)
            states.append(key)
        return index[key]

    sid((qa, qb))
    i = 0
    while i < len(states):
        qa, qb = states[i]
        row = []
        for c in range(arena.n_classes):
            qb2 = arena.b.delta[qb][c]
            pos = arena.i_pos(qa, qb2)
            moves = allowed_moves(arena, sol, pos)
            if not moves:
                raise ExtractionError("strategy reaches a position lost by I")
            out, w = _choose(arena, moves, c)
            _, qa2, _ = arena.decode(w)
            row.append((sid((qa2, qb2)), (out,)))
        rows.append(tuple(row))
        i += 1
    table = StrategyTable("I", lead, arena.threshold, opening, tuple(rows))
    return simplify_table(table) if simplify else table


def check_strategy(v: Verdict):
    """Re-verify that the winner's allowed moves win every play from the root."""
    arena, sol = v.arena, v.solution
    me = 0 if v.winner == "I" else 1
    qa, qb = v.root
    if v.lead == 0:
        roots = [arena.i_pos(qa, qb)]
    elif me == I:
        roots = [arena.ii_pos(arena.a.run(qa, tuple(arena.rep(c) for c in v.opening)), qb)]
    else:
        frontier = {qa}
        for _ in range(v.lead + 1):
            frontier = {t for q in frontier for t in arena.a.delta[q]}
        roots = [arena.ii_pos(q, qb) for q in sorted(frontier)]
    index = {}
    nodes = []
    edges = []
    for r in roots:
        if r not in index:
            index[r] = len(nodes)
            nodes.append(r)
    i = 0
    while i < len(nodes):
        p = nodes[i]
        if arena.owner(p) == me:
            moves = allowed_moves(arena, sol, p)
            if not moves:
                return False
        else:
            moves = arena.moves(p)
        out = []
        for _, w in moves:
            if w not in index:
                index[w] = len(nodes)
                nodes.append(w)
            out.append(index[w])
        edges.append(out)
        i += 1
    comp, order = tarjan(len(nodes), lambda u: edges[u])
    for members in order:
        u = members[0]
        if len(members) == 1 and u not in edges[u]:
            continue
        agree = arena.label(nodes[u])
        live = any(arena.recurrent(nodes[m]) for m in members) if arena.wadge else True
        ii_wins = agree and live
        if ii_wins != (me == II):
            return False
    return True


# -- joint arenas for whole corpora ----------------------------------------------------


def disjoint_union(automata):
    """One automaton containing every input; returns (automaton, roots)."""
    t = max(a.threshold for a in automata)
    rows, labels, roots = [], [], []
    for a in automata:
        a = a.expand(t)
        off = len(rows)
        roots.append(off + a.init)
        rows.extend([off + s for s in row] for row in a.delta)
        labels.extend(a.labels)
    return SetAutomaton(t, rows, labels, roots[0]), roots


class CorpusGames:
    """All pairwise G_L games over a list of sets, solved on two shared arenas.

    Every game G_L(X, Y) with X, Y in the list is a sub-game of the arena
    on (U, U) where U is the minimal automaton recognising all of them from
    different start states; G_L(not X, Y) lives in the arena on (co-U, U).
    """

    def __init__(self, automata):
        union, roots = disjoint_union(list(automata))
        self.union, self.roots = minimize_roots(union, roots)

    @cached_property
    def agree(self):
        arena = GameArena(self.union, self.union)
        arena.solution()
        return arena

    @cached_property
    def flip(self):
        arena = GameArena(self.union.complement(), self.union)
        arena.solution()
        return arena

    def verdict(self, i, j, negate_first=False, lead=0):
        arena = self.flip if negate_first else self.agree
        return verdict_at(arena, self.roots[i], self.roots[j], lead)

    def winner(self, i, j, negate_first=False, lead=0):
        if lead == 0:
            arena = self.flip if negate_first else self.agree
            return PLAYER_NAMES[arena.solution().win[arena.i_pos(self.roots[i], self.roots[j])]]
        return self.verdict(i, j, negate_first, lead).winner

    def same_set(self, i, j):
        return self.roots[i] == self.roots[j]
