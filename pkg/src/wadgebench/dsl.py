"""Text syntax for sets, transducers, points and small programs.

Recursive descent over a hand-written lexer.  Every error carries the line,
column and the set of tokens that would have been accepted there.  The
printer emits canonical text, and parsing printed text gives back an equal
AST.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from . import sets as S
from . import transducers as T
from .core import Point, format_point, format_word
from .degrees import Rel
from .errors import ParseError, WadgeError
from .metrics import Metric

__all__ = [
    "Token", "tokenize", "Program", "Command", "parse", "parse_set", "parse_transducer",
    "parse_point_text", "print_set", "print_transducer", "print_program", "print_command",
    "print_rel",
]

# -- lexer ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # NAT, NAME, SYM, EOF
    text: str
    line: int
    col: int

    def describe(self):
        return "end of input" if self.kind == "EOF" else repr(self.text)


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<NAT>\d+)
  | (?P<NAME>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<SYM>->|[()\[\]{},;=|&!~:*/])
""", re.VERBOSE)


def tokenize(text):
    out = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("NAT", "NAME", "SYM"):
            out.append(Token(kind, m.group(), line, col))
        pos = m.end()
    out.append(Token("EOF", "", line, pos - line_start + 1))
    return out


# -- program structure ------------------------------------------------------------------------


@dataclass(frozen=True)
class Command:
    verb: str
    args: tuple
    expect: str | None = None
    line: int = 0


@dataclass
class Program:
    items: list = field(default_factory=list)  # ("let", name, value) or ("cmd", Command)

    @property
    def definitions(self):
        return {name: value for kind, name, value in
                (i for i in self.items if i[0] == "let")}

    @property
    def commands(self):
        return [i[1] for i in self.items if i[0] == "cmd"]

    def sets(self):
        """Named set definitions in file order (a corpus)."""
        return [(i[1], i[2]) for i in self.items
                if i[0] == "let" and isinstance(i[2], S.SetExpr)]

    def __eq__(self, other):
        return isinstance(other, Program) and _items_key(self.items) == _items_key(other.items)


def _items_key(items):
    return [(i[0], i[1], i[2]) if i[0] == "let" else (i[0], _cmd_key(i[1])) for i in items]


def _cmd_key(c):
    return (c.verb, c.args, c.expect)


SET_KEYWORDS = {"empty", "full", "N", "cat", "loc", "osum", "oplus"} | set(S.FAMILY_PARAMS)
TRANS_KEYWORDS = {"id", "const", "prepend", "drop", "pad", "flm", "case", "mask", "zbl",
                  "compose", "table"}
VERBS = {"leq", "selfdual", "selfcontract", "verify", "certify", "fixpoint"}
RESERVED = SET_KEYWORDS | TRANS_KEYWORDS | VERBS | {"let", "expect", "default", "odd", "none",
                                                     "exact", "sample"}

PARAM_KINDS = {"base": "set", "m": "nat", "trunc": "nat?", "bits": "letters", "X": "natset",
               "family": "setlist", "letter": "nat"}

LETTER_MAPS = {"id": 0, "add": 1, "constant": 1, "sq1": 0, "max": 1, "affine": 2, "half": 0}


# -- parser ---------------------------------------------------------------------------------


class Parser:
    def __init__(self, text, env=None):
        self.tokens = tokenize(text)
        self.i = 0
        self.env = dict(env or {})

    # token helpers
    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, expected=(), tok=None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.col, expected)

    def unexpected(self, expected):
        self.error(f"unexpected {self.tok.describe()}", expected)

    def at(self, text):
        return self.tok.kind in ("SYM", "NAME") and self.tok.text == text

    def accept(self, text):
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text, also=()):
        if not self.accept(text):
            self.unexpected((f"'{text}'",) + tuple(also))

    def nat(self, what="natural number"):
        if self.tok.kind != "NAT":
            self.unexpected((what,))
        v = int(self.tok.text)
        self.i += 1
        return v

    def name(self, what="name"):
        if self.tok.kind != "NAME":
            self.unexpected((what,))
        v = self.tok.text
        self.i += 1
        return v

    def letters(self):
        out = []
        while self.tok.kind == "NAT":
            out.append(self.nat())
        return tuple(out)

    def end(self):
        if self.tok.kind != "EOF":
            self.unexpected(("end of input",))

    # points and numbers
    def point(self):
        prefix = self.letters()
        self.expect("~", ("letter",))
        tok = self.tok
        period = self.letters()
        if not period:
            self.error("a point needs a nonempty period", ("letter",), tok)
        return Point(prefix, period)

    def fraction(self):
        num = self.nat("number")
        if self.accept("/"):
            den = self.nat("denominator")
            if den == 0:
                self.error("zero denominator")
            return Fraction(num, den)
        return Fraction(num)

    # sets
    def set_expr(self):
        """A primary, or a chain of primaries joined by one operator (left-nested)."""
        left = self.primary_set()
        if not (self.at("|") or self.at("&")):
            return left
        op_text = self.tok.text
        op = S.Union if op_text == "|" else S.Intersection
        while self.accept(op_text):
            left = op(left, self.primary_set())
        if self.at("|") or self.at("&"):
            self.error("mixing '|' and '&' needs parentheses", (f"'{op_text}'",))
        return left

    def primary_set(self):
        tok = self.tok
        if self.accept("!"):
            self.expect("(")
            inner = self.set_expr()
            self.expect(")")
            return S.Complement(inner)
        if self.accept("("):
            inner = self.set_expr()
            self.expect(")", ("'|'", "'&'"))
            return inner
        if tok.kind != "NAME":
            self.unexpected(("set expression",))
        word = tok.text
        self.i += 1
        if word == "empty":
            return S.Empty()
        if word == "full":
            return S.Full()
        if word == "N":
            self.expect("(")
            letters = self.letters()
            self.expect(")", ("letter",))
            return S.Cylinder(letters)
        if word in ("cat", "loc"):
            self.expect("(")
            letters = self.letters()
            if not self.accept(";"):
                self.expect(",", ("';'", "letter"))
            inner = self.set_expr()
            self.expect(")")
            return (S.ConcatPrefix if word == "cat" else S.Localize)(letters, inner)
        if word == "osum":
            self.expect("[")
            comps = [self.set_expr()]
            while self.accept(","):
                comps.append(self.set_expr())
            self.expect(";", ("','",))
            self.expect("default")
            self.expect("=")
            default = self.set_expr()
            self.expect("]")
            return S.OSum(tuple(comps), default)
        if word == "oplus":
            self.expect("(")
            even = self.set_expr()
            self.expect(",")
            odd = self.set_expr()
            self.expect(")")
            return S.OPlus(even, odd)
        if word in S.FAMILY_PARAMS:
            return self.family_call(word, tok)
        if word in self.env:
            value = self.env[word]
            if not isinstance(value, S.SetExpr):
                self.error(f"{word!r} names a transducer, not a set", ("set expression",), tok)
            return S.Named(word, value)
        self.error(f"unknown name {word!r}", ("set expression",), tok)

    def family_call(self, name, tok):
        keys = S.FAMILY_PARAMS[name]
        self.expect("(")
        values = {}
        position = 0
        while not self.at(")"):
            if values:
                self.expect(",", ("')'",))
            if self.tok.kind == "NAME" and self.tokens[self.i + 1].text == "=" \
                    and self.tok.text in keys:
                key = self.name()
                self.expect("=")
            else:
                if position >= len(keys):
                    self.error(f"{name} takes {len(keys)} arguments", ("')'",))
                key = keys[position]
            if key in values:
                self.error(f"{name}: argument {key!r} given twice")
            values[key] = self.param(PARAM_KINDS[key])
            position += 1
        self.expect(")")
        missing = [k for k in keys if k not in values]
        if missing:
            self.error(f"{name}: missing argument {missing[0]!r}", (), tok)
        try:
            return S.family(name, **values)
        except WadgeError as exc:
            self.error(f"{name}: {exc}", (), tok)

    def param(self, kind):
        if kind == "set":
            return self.set_expr()
        if kind == "nat":
            return self.nat()
        if kind == "nat?":
            if self.accept("none"):
                return None
            return self.nat("natural number or 'none'")
        if kind == "letters":
            return self.letters()
        if kind == "natset":
            self.expect("{")
            out = set()
            if not self.at("}"):
                out.add(self.nat())
                while self.accept(","):
                    out.add(self.nat())
            self.expect("}", ("','",))
            return frozenset(out)
        if kind == "setlist":
            self.expect("[")
            out = [self.set_expr()]
            while self.accept(","):
                out.append(self.set_expr())
            self.expect("]", ("','",))
            return tuple(out)
        raise AssertionError(kind)

    # transducers
    def letter_map(self):
        tok = self.tok
        word = self.name("letter map")
        if word not in LETTER_MAPS:
            self.error(f"unknown letter map {word!r}", tuple(sorted(LETTER_MAPS)), tok)
        args = []
        if LETTER_MAPS[word]:
            self.expect("(")
            args.append(self.nat())
            for _ in range(LETTER_MAPS[word] - 1):
                self.expect(",")
                args.append(self.nat())
            self.expect(")")
        try:
            return {"id": T.Identity, "add": T.AddConst, "constant": T.ConstLetter,
                    "sq1": T.SquarePlusOne, "max": T.MaxWith, "affine": T.Affine,
                    "half": T.Half}[word](*args)
        except WadgeError as exc:
            self.error(str(exc), (), tok)

    def trans_expr(self):
        tok = self.tok
        if tok.kind != "NAME":
            self.unexpected(("transducer",))
        word = tok.text
        self.i += 1
        if word == "id":
            return T.Copy()
        if word == "pad":
            return T.PadByFirstLetter()
        if word == "const":
            self.expect("(")
            p = self.point()
            self.expect(")")
            return T.Const(p)
        if word == "prepend":
            self.expect("(")
            w = self.letters()
            self.expect(")", ("letter",))
            return T.Prepend(w)
        if word == "drop":
            self.expect("(")
            k = self.nat()
            self.expect(")")
            return T.Drop(k)
        if word == "mask":
            self.expect("(")
            k = self.nat()
            self.expect(";")
            p = self.point()
            self.expect(")")
            return T.Mask(k, p)
        if word == "zbl":
            self.expect("(")
            inner = self.trans_expr()
            self.expect(";")
            p = self.point()
            self.expect(")")
            return T.ZeroBlockLift(inner, p)
        if word == "compose":
            self.expect("(")
            parts = [self.trans_expr()]
            while self.accept(","):
                parts.append(self.trans_expr())
            self.expect(")", ("','",))
            return parts[0] if len(parts) == 1 else T.Compose(tuple(parts))
        if word == "flm":
            return self.flm_body()
        if word == "case":
            return self.case_body()
        if word == "table":
            return self.table_body()
        if word in self.env:
            value = self.env[word]
            if not isinstance(value, T.Transducer):
                self.error(f"{word!r} names a set, not a transducer", ("transducer",), tok)
            return value
        self.error(f"unknown name {word!r}", ("transducer",), tok)

    def _arrow_entries(self, value):
        out = {}
        if self.tok.kind == "NAT":
            while True:
                tok = self.tok
                a = self.nat()
                if a in out:
                    self.error(f"letter {a} listed twice", (), tok)
                self.expect("->")
                out[a] = value()
                if not self.accept(","):
                    break
        return out

    def flm_body(self):
        self.expect("{")
        mapping = self._arrow_entries(self.nat)
        default = T.Identity()
        if self.accept(";"):
            self.expect("default")
            self.expect("=")
            default = self.letter_map()
        self.expect("}", ("';'", "','"))
        return T.flm(mapping, default)

    def case_body(self):
        self.expect("{")
        branches = self._arrow_entries(self.trans_expr)
        default, odd = T.Copy(), None
        while self.accept(";"):
            if self.accept("default"):
                self.expect("=")
                default = self.trans_expr()
            elif self.accept("odd"):
                self.expect("=")
                odd = self.trans_expr()
            else:
                self.unexpected(("'default'", "'odd'"))
        self.expect("}", ("';'", "','"))
        return T.case(branches, default, odd)

    def table_body(self):
        self.expect("(")
        fields = {}
        for key, kind in (("role", "role"), ("lead", "nat"), ("threshold", "nat"),
                          ("opening", "letters"), ("init", "nat"), ("wadge", "nat")):
            if fields:
                self.expect(",")
            self.expect(key)
            self.expect("=")
            if kind == "role":
                tok = self.tok
                role = self.name("role")
                if role not in ("I", "II"):
                    self.error("role must be I or II", ("'I'", "'II'"), tok)
                fields[key] = role
            elif kind == "nat":
                fields[key] = self.nat()
            else:
                fields[key] = self.letters()
        width = fields["threshold"] + 2
        rows = []
        while self.accept(";"):
            tok = self.tok
            row = self.table_row()
            if len(row) != width:
                self.error(f"table row needs {width} cells, got {len(row)}", (), tok)
            rows.append(row)
        self.expect(")", ("';'",))
        if not rows:
            self.error("table needs at least one row")
        for row in rows:
            for nxt, _ in row:
                if nxt >= len(rows):
                    self.error(f"table row refers to missing state {nxt}")
        return T.StrategyTable(fields["role"], fields["lead"], fields["threshold"],
                               fields["opening"], tuple(rows), bool(fields["wadge"]),
                               fields["init"])

    def table_row(self):
        self.expect("[")
        cells = [self.table_cell()]
        while self.accept(","):
            cells.append(self.table_cell())
        self.expect("]", ("','",))
        return tuple(cells)

    def table_cell(self):
        nxt = self.nat("state")
        self.expect(":")
        outs = []
        while True:
            if self.tok.kind == "NAT":
                outs.append(self.nat())
            elif self.accept("*"):
                outs.append(T.ECHO)
            else:
                break
        return nxt, tuple(outs)

    # relations, metrics and commands
    def rel(self):
        tok = self.tok
        text = self.name("relation")
        if self.accept("("):
            text += "(" + str(self.nat())
            if self.accept("/"):
                text += "/" + str(self.nat())
            self.expect(")")
            text += ")"
        try:
            return Rel.parse(text)
        except WadgeError as exc:
            self.error(str(exc), ("relation",), tok)

    def metric(self):
        tok = self.tok
        text = self.name("metric")
        try:
            return Metric.parse(text)
        except WadgeError:
            self.error(f"unknown metric {text!r}", ("'D'", "'D0'", "'D1'"), tok)

    def value(self):
        """A set or a transducer, decided by the leading word."""
        tok = self.tok
        if tok.kind == "NAME":
            bound = self.env.get(tok.text)
            if tok.text in TRANS_KEYWORDS or isinstance(bound, T.Transducer):
                return self.trans_expr()
        return self.set_expr()

    def command(self):
        tok = self.tok
        verb = self.name("command")
        if verb == "leq":
            args = (self.rel(), self.set_expr(), self.set_expr())
        elif verb == "selfdual":
            args = (self.rel(), self.set_expr())
        elif verb == "selfcontract":
            args = (self.set_expr(),)
        elif verb == "fixpoint":
            args = (self.trans_expr(),)
        elif verb == "certify":
            args = (self.metric(), self.trans_expr())
            if self.tok.kind == "NAT":
                args += (self.fraction(),)
        elif verb == "verify":
            t = self.trans_expr()
            self.expect(":")
            a = self.set_expr()
            self.expect("->")
            b = self.set_expr()
            mode = ("exact",)
            if self.accept("sample"):
                mode = ("sampled", self.nat("sample count"))
            elif self.accept("exact"):
                pass
            args = (t, a, b) + mode
        else:
            self.error(f"unknown command {verb!r}", tuple(sorted(VERBS)), tok)
        expect = None
        if self.accept("expect"):
            expect = self.name("expected verdict")
        return Command(verb, args, expect, tok.line)

    def program(self):
        prog = Program()
        while self.tok.kind != "EOF":
            if self.accept("let"):
                tok = self.tok
                name = self.name()
                if name in RESERVED:
                    self.error(f"{name!r} is a reserved word", ("name",), tok)
                if name in self.env:
                    self.error(f"{name!r} is already defined", ("name",), tok)
                self.expect("=")
                value = self.value()
                self.expect(";")
                self.env[name] = value
                prog.items.append(("let", name, value))
            elif self.tok.kind == "NAME" and self.tok.text in VERBS:
                cmd = self.command()
                self.expect(";")
                prog.items.append(("cmd", cmd))
            else:
                self.unexpected(("'let'",) + tuple(f"'{v}'" for v in sorted(VERBS)))
        return prog


def parse(text, env=None) -> Program:
    return Parser(text, env).program()


def _parse_whole(text, env, method):
    p = Parser(text, env)
    out = getattr(p, method)()
    p.end()
    return out


def parse_set(text, env=None):
    return _parse_whole(text, env, "set_expr")


def parse_transducer(text, env=None):
    return _parse_whole(text, env, "trans_expr")


def parse_point_text(text):
    return _parse_whole(text, None, "point")


def parse_rel(text):
    return _parse_whole(text, None, "rel")


# -- printer ---------------------------------------------------------------------------------


def print_set(e, expand=False):
    p = lambda x: print_set(x, expand)  # noqa: E731
    match e:
        case S.Empty():
            return "empty"
        case S.Full():
            return "full"
        case S.Cylinder(word):
            return f"N({format_word(word)})"
        case S.Complement(inner):
            return f"!({p(inner)})"
        case S.Union(a, b):
            return f"({p(a)} | {p(b)})"
        case S.Intersection(a, b):
            return f"({p(a)} & {p(b)})"
        case S.ConcatPrefix(word, inner):
            return f"cat({format_word(word)}; {p(inner)})"
        case S.Localize(word, inner):
            return f"loc({format_word(word)}; {p(inner)})"
        case S.OSum(comps, default):
            return f"osum[{', '.join(p(c) for c in comps)}; default={p(default)}]"
        case S.OPlus(a, b):
            return f"oplus({p(a)}, {p(b)})"
        case S.Named(name, inner):
            return p(inner) if expand else name
        case S.FamilyRef(name, params):
            args = ", ".join(f"{k}={_print_param(PARAM_KINDS[k], v, expand)}" for k, v in params)
            return f"{name}({args})"
    raise WadgeError(f"cannot print {e!r}")


def _print_param(kind, v, expand):
    if kind == "set":
        return print_set(v, expand)
    if kind == "nat?" and v is None:
        return "none"
    if kind in ("nat", "nat?"):
        return str(v)
    if kind == "letters":
        return format_word(v)
    if kind == "natset":
        return "{" + ", ".join(str(j) for j in sorted(v)) + "}"
    if kind == "setlist":
        return "[" + ", ".join(print_set(c, expand) for c in v) + "]"
    raise AssertionError(kind)


def print_letter_map(f):
    match f:
        case T.Identity():
            return "id"
        case T.AddConst(c):
            return f"add({c})"
        case T.ConstLetter(c):
            return f"constant({c})"
        case T.SquarePlusOne():
            return "sq1"
        case T.MaxWith(c):
            return f"max({c})"
        case T.Affine(a, b):
            return f"affine({a}, {b})"
        case T.Half():
            return "half"
    raise WadgeError(f"cannot print letter map {f!r}")


def _outs(outs):
    return " ".join("*" if o == T.ECHO else str(o) for o in outs)


def print_transducer(t):
    p = print_transducer
    match t:
        case T.Copy():
            return "id"
        case T.PadByFirstLetter():
            return "pad"
        case T.Const(point):
            return f"const({format_point(point)})"
        case T.Prepend(word):
            return f"prepend({format_word(word)})"
        case T.Drop(k):
            return f"drop({k})"
        case T.Mask(keep, fill):
            return f"mask({keep}; {format_point(fill)})"
        case T.ZeroBlockLift(inner, filler):
            return f"zbl({p(inner)}; {format_point(filler)})"
        case T.Compose(parts):
            return f"compose({', '.join(p(x) for x in parts)})"
        case T.FirstLetterMap(explicit, default):
            body = ", ".join(f"{a}->{v}" for a, v in explicit)
            return f"flm{{{body}; default={print_letter_map(default)}}}"
        case T.CaseOnFirstLetter(branches, default, odd):
            body = ", ".join(f"{a} -> {p(b)}" for a, b in branches)
            text = f"case{{{body}; default={p(default)}"
            if odd is not None:
                text += f"; odd={p(odd)}"
            return text + "}"
        case T.StrategyTable():
            head = (f"table(role={t.role}, lead={t.lead}, threshold={t.threshold}, "
                    f"opening={format_word(t.opening)}, init={t.init}, wadge={int(t.wadge)}")
            rows = "; ".join(
                "[" + ", ".join(f"{nxt}:{_outs(outs)}".rstrip() for nxt, outs in row) + "]"
                for row in t.rows)
            return f"{head}; {rows})"
    raise WadgeError(f"cannot print transducer {t!r}")


def print_rel(rel):
    return str(Rel.parse(rel))


def _fraction(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def print_value(v):
    return print_transducer(v) if isinstance(v, T.Transducer) else print_set(v)


def print_command(c):
    a = c.args
    match c.verb:
        case "leq":
            text = f"leq {print_rel(a[0])} {print_set(a[1])} {print_set(a[2])}"
        case "selfdual":
            text = f"selfdual {print_rel(a[0])} {print_set(a[1])}"
        case "selfcontract":
            text = f"selfcontract {print_set(a[0])}"
        case "fixpoint":
            text = f"fixpoint {print_transducer(a[0])}"
        case "certify":
            text = f"certify {a[0].value} {print_transducer(a[1])}"
            if len(a) > 2:
                text += f" {_fraction(a[2])}"
        case "verify":
            text = f"verify {print_transducer(a[0])} : {print_set(a[1])} -> {print_set(a[2])}"
            text += f" sample {a[4]}" if a[3] == "sampled" else " exact"
        case _:
            raise WadgeError(f"unknown command {c.verb!r}")
    if c.expect:
        text += f" expect {c.expect}"
    return text + ";"


def print_program(prog: Program):
    lines = []
    for item in prog.items:
        if item[0] == "let":
            lines.append(f"let {item[1]} = {print_value(item[2])};")
        else:
            lines.append(print_command(item[1]))
    return "\n".join(lines) + ("\n" if lines else "")
