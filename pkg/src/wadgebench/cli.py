"""Command-line interface: ``wadgebench <verb> ...`` or ``python -m wadgebench``.

Exit codes: 0 when everything checked out, 1 when a violation or unmet
expectation was found, 2 on usage and input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import constructions as C
from . import degrees as DG
from . import dsl
from . import sets as S
from . import transducers as T
from .core import DEFAULT_SEED
from .errors import ParseError, WadgeError
from .games import build_arena, check_strategy, extract_I, extract_II, solve
from .metrics import Metric, distance

SCHEMA = 1


class Session:
    """Per-invocation state: parsed flags, definitions and the output stream."""

    def __init__(self, args, argv, out):
        self.args = args
        self.argv = list(argv)
        self.out = out
        self.env = {}
        self.started = time.perf_counter()
        if getattr(args, "defs", None):
            self.env = dsl.parse(_read(args.defs)).definitions

    def set(self, text):
        return dsl.parse_set(text, self.env)

    def transducer(self, text):
        return dsl.parse_transducer(text, self.env)

    def emit(self, fields, lines, status=0):
        if self.args.json:
            report = {"schema": SCHEMA, "tool": "wadgebench", "version": __version__,
                      "command": self.argv, "seed": self.args.seed}
            report.update(fields)
            report["timing"] = ({"seconds": round(time.perf_counter() - self.started, 3)}
                                if self.args.timing else None)
            self.out.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
        else:
            for line in lines:
                self.out.write(f"{line}\n")
        return status


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise WadgeError(f"cannot read {path}: {exc.strerror}") from None


def _load_corpus(path):
    corpus = dsl.parse(_read(path)).sets()
    if not corpus:
        raise WadgeError(f"{path} defines no sets")
    return corpus


def _fraction(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _show(obj):
    if obj is None:
        return None
    if isinstance(obj, T.Transducer):
        return dsl.print_transducer(obj)
    return str(obj)


def _check_fields(check):
    if check is None:
        return None
    out = {"holds": check.holds, "mode": check.mode}
    if check.counterexample is not None:
        out["counterexample"] = str(check.counterexample)
    if check.detail:
        out["detail"] = check.detail
    return out


def _certificate_fields(cert):
    out = {"certificate": type(cert).__name__, "metric": cert.metric.value}
    match cert:
        case T.Certified(_, constant):
            out["constant"] = _fraction(constant)
        case T.Refuted(_, bound, x, y):
            out.update(bound=_fraction(bound), x=str(x), y=str(y))
        case T.NotLipschitz(_, family, samples):
            out["family"] = family
            out["samples"] = [[str(x), str(y), _fraction(r)] for x, y, r in samples]
        case T.Unknown(_, reason):
            out["reason"] = reason
    return out


def _certificate_line(fields):
    parts = [fields["certificate"], fields["metric"]]
    for key in ("constant", "bound", "x", "y", "family", "reason"):
        if key in fields:
            parts.append(f"{key}={fields[key]}")
    return " ".join(parts)


# -- verbs -----------------------------------------------------------------------------------


def cmd_dist(s):
    metric = Metric.parse(s.args.metric)
    x, y = dsl.parse_point_text(s.args.x), dsl.parse_point_text(s.args.y)
    value = _fraction(distance(metric, x, y))
    return s.emit({"metric": metric.value, "x": str(x), "y": str(y), "distance": value}, [value])


def cmd_certify(s):
    metric = Metric.parse(s.args.metric)
    t = s.transducer(s.args.transducer)
    constant = Fraction(s.args.constant) if s.args.constant is not None else None
    cert = T.certify_lipschitz(t, metric, constant)
    fields = _certificate_fields(cert)
    fields["transducer"] = _show(t)
    status = 1 if constant is not None and not isinstance(cert, T.Certified) else 0
    return s.emit(fields, [_certificate_line(fields)], status)


def cmd_fixpoint(s):
    t = s.transducer(s.args.transducer)
    x = T.fixed_point(t)
    return s.emit({"transducer": _show(t), "fixed_point": str(x)}, [str(x)])


def cmd_verify(s):
    text = " ".join(s.args.claim).replace(ARROW, "->")
    p = dsl.Parser(text, s.env)
    t = p.trans_expr()
    p.expect(":")
    a = p.set_expr()
    p.expect("->")
    b = p.set_expr()
    p.end()
    if s.args.sample is not None:
        v = T.verify_reduction(t, a, b, mode="sampled", samples=s.args.sample, seed=s.args.seed)
    else:
        v = T.verify_reduction(t, a, b, mode="exact")
    fields = {"transducer": _show(t), "source": str(a), "target": str(b),
              "result": _check_fields(v)}
    line = f"{'Holds' if v.holds else 'Fails'} ({v.mode}, {v.checked} checked)"
    if v.counterexample is not None:
        line += f" counterexample {v.counterexample}"
    return s.emit(fields, [line], 0 if v.holds else 1)


VARIANTS = {"lipschitz": "lipschitz", "L": "lipschitz", "wadge": "wadge", "W": "wadge"}


def cmd_game(s):
    variant = VARIANTS.get(s.args.variant)
    if variant is None:
        raise WadgeError(f"unknown game variant {s.args.variant!r}; use lipschitz or wadge")
    a, b = s.set(s.args.a), s.set(s.args.b)
    arena = build_arena(a, b, s.args.lead, variant)
    v = solve(arena)
    fields = {"variant": variant, "lead": s.args.lead, "winner": v.winner,
              "positions": v.size}
    lines = [f"winner {v.winner} ({v.size} positions)"]
    if s.args.witness:
        if v.winner == "II":
            t = extract_II(v)
        elif variant == "wadge":
            t = None
        else:
            t = extract_I(v)
        fields["strategy"] = _show(t)
        fields["strategy_checked"] = check_strategy(v)
        lines.append(f"strategy {_show(t) if t is not None else '(not extracted for I in the Wadge game)'}")
    return s.emit(fields, lines)


def _verdict_fields(verdict):
    fields = {"verdict": verdict.status}
    match verdict:
        case DG.Holds(witness, check, note):
            fields.update(witness=_show(witness), check=_check_fields(check), note=note)
        case DG.Fails(counter, game, checked):
            fields.update(counter_strategy=_show(counter), game=game, counter_checked=checked)
        case DG.Unknown(reason):
            fields["reason"] = reason
    return fields


def _verdict_lines(fields):
    lines = [fields["verdict"]]
    if fields.get("witness"):
        lines.append(f"witness {fields['witness']}")
    if fields.get("counter_strategy"):
        lines.append(f"counter-strategy {fields['counter_strategy']}")
    if fields.get("reason"):
        lines.append(fields["reason"])
    return lines


def cmd_leq(s):
    rel = DG.Rel.parse(s.args.rel)
    verdict = DG.leq(rel, s.set(s.args.a), s.set(s.args.b))
    fields = _verdict_fields(verdict)
    fields["relation"] = str(rel)
    bad = isinstance(verdict, DG.Holds) and verdict.check is not None and not verdict.check.holds
    return s.emit(fields, _verdict_lines(fields), 1 if bad else 0)


def cmd_selfdual(s):
    rel = DG.Rel.parse(s.args.rel)
    value = DG.selfdual(s.set(s.args.a), rel)
    return s.emit({"relation": str(rel), "selfdual": value}, [str(value).lower()])


def cmd_selfcontract(s):
    res = DG.selfcontractible(s.set(s.args.a))
    fields = {"contractible": res.contractible}
    lines = [str(res.contractible).lower()]
    if res.contractible:
        fields.update(witness=_show(res.witness), check=_check_fields(res.check),
                      fixed_point=str(res.fixed_point))
        lines += [f"witness {_show(res.witness)}", f"fixed point {res.fixed_point}"]
    bad = res.contractible and not res.check.holds
    return s.emit(fields, lines, 1 if bad else 0)


def cmd_hasse(s):
    corpus = _load_corpus(s.args.corpus)
    h = DG.hasse(corpus, s.args.rel)
    acyclic = h.is_acyclic()
    sources = [h.nodes[i].members for i in h.sources()]
    if s.args.dot and acyclic:
        Path(s.args.dot).write_text(h.to_dot(), encoding="utf-8")
    fields = {"relation": h.rel, "classes": len(h.nodes), "edges": len(h.edges),
              "acyclic": acyclic, "minimal": sources,
              "nodes": [{"members": n.members, "selfdual": n.selfdual} for n in h.nodes]}
    lines = [f"{len(h.nodes)} classes, {len(h.edges)} covering edges, acyclic={acyclic}",
             "minimal: " + "; ".join(", ".join(m[:3]) for m in sources)]
    return s.emit(fields, lines, 0 if acyclic else 1)


def cmd_audit(s):
    corpus = _load_corpus(s.args.corpus)
    an = DG.CorpusAnalysis(corpus)
    checks = dict(DG.audit_theorems(an))
    if s.args.roundtrip:
        checks["witness roundtrip"] = DG.roundtrip(an)
    limit = s.args.show
    fields = {"sets": an.n, "pairs": an.n * an.n, "checks": {
        name: {"checked": c.checked, "violations": len(c.violations)}
        for name, c in sorted(checks.items())},
        "violations": {name: [list(v) if isinstance(v, tuple) else v
                              for v in c.violations[:limit]]
                       for name, c in sorted(checks.items()) if c.violations}}
    total = sum(len(c.violations) for c in checks.values())
    lines = [f"{name}: {c.checked} checked, {len(c.violations)} violations"
             for name, c in sorted(checks.items())]
    lines.append(f"total violations: {total}")
    return s.emit(fields, lines, 1 if total else 0)


def cmd_parse(s):
    prog = dsl.parse(_read(s.args.file))
    defs, cmds = len(prog.definitions), len(prog.commands)
    fields = {"file": s.args.file, "definitions": defs, "commands": cmds}
    if not s.args.check:
        fields["program"] = dsl.print_program(prog)
    return s.emit(fields, [f"ok: {defs} definitions, {cmds} commands"])


def cmd_fmt(s):
    text = dsl.print_program(dsl.parse(_read(s.args.file)))
    if s.args.write:
        Path(s.args.file).write_text(text, encoding="utf-8")
        return s.emit({"file": s.args.file, "written": True}, [f"formatted {s.args.file}"])
    if s.args.json:
        return s.emit({"file": s.args.file, "program": text}, [])
    s.out.write(text)
    return 0


def corpus_text(depth, letters, named=True):
    corpus = DG.enumerate_corpus(depth, letters, named)
    header = [f"# clopen sets of depth {depth} over letters 0..{letters - 1} and a default class",
              "# (deduplicated by minimal automaton)" + (" plus named open and closed sets"
                                                       if named else ""),
              f"# {len(corpus)} sets"]
    body = [f"let {name} = {dsl.print_set(e)};" for name, e in corpus]
    return "\n".join(header + body) + "\n", len(corpus)


def cmd_corpus(s):
    text, n = corpus_text(s.args.depth, s.args.letters, not s.args.no_named)
    if s.args.out:
        Path(s.args.out).write_text(text, encoding="utf-8")
        return s.emit({"sets": n, "out": s.args.out}, [f"wrote {n} sets to {s.args.out}"])
    if s.args.json:
        return s.emit({"sets": n, "program": text}, [])
    s.out.write(text)
    return 0


def _nat_list(text):
    if text is None or text.strip() == "":
        return frozenset()
    try:
        values = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise WadgeError(f"expected a comma-separated list of naturals, got {text!r}") from None
    if any(v < 0 for v in values):
        raise WadgeError("indices must be natural numbers")
    return frozenset(values)


def _bits(text):
    if not text or any(ch not in "01" for ch in text):
        raise WadgeError(f"bits must be a nonempty word over 0 and 1, got {text!r}")
    return tuple(int(ch) for ch in text)


def _schedule(text):
    out = {}
    for part in (text or "").split(","):
        if not part.strip():
            continue
        n, _, steps = part.partition(":")
        try:
            out[int(n)] = int(steps)
        except ValueError:
            raise WadgeError(f"schedule entries look like n:steps, got {part!r}") from None
    return out


def _pack_fields(pack, report):
    return {"pack": report.name, "passed": report.passed,
            "sets": {k: str(v) for k, v in sorted(pack.sets.items())},
            "witnesses": {k: _show(v) for k, v in sorted(pack.witnesses.items())},
            "notes": list(pack.notes),
            "checks": [r.as_dict() for r in report.results]}


def _pack_lines(report):
    lines = []
    for r in report.results:
        tag = "evidence" if r.evidence else ("pass" if r.ok else "FAIL")
        lines.append(f"[{tag}] {r.label}: expected {r.expected}, observed {r.observed}")
    lines.append(f"{report.name}: {'passed' if report.passed else 'FAILED'}")
    return lines


def _run_pack(s, pack, extra=None, head=()):
    report = pack.run(seed=s.args.seed)
    fields = _pack_fields(pack, report)
    fields.update(extra or {})
    return s.emit(fields, list(head) + _pack_lines(report), 0 if report.passed else 1)


_CONSTRUCT_DEFAULTS = {"a-family": {"trunc": 12}, "claim-psi": {"trunc": 10},
                       "thm-psi": {"trunc": 8, "X": "0", "Y": "0,1"},
                       "psi0": {"X": "1", "Y": "1,2"}, "psi1": {"X": "1", "Y": "1,2"}}


def cmd_construct(s):
    a = s.args
    kind = a.family
    for key, value in _CONSTRUCT_DEFAULTS.get(kind, {}).items():
        if getattr(a, key) is None:
            setattr(a, key, value)
    if kind == "cor5":
        e = C.cor5_psi(_bits(a.bits))
        states = S.minimal(e).n_states
        return s.emit({"set": str(e), "states": states}, [str(e), f"{states} states"])
    if kind == "a-family":
        base = s.set(a.base)
        e = C.a_family(base, a.m)
        pack = C.a_family_witnesses(base, a.m, trunc=a.trunc, samples=a.samples, seed=a.seed)
        return _run_pack(s, pack, {"set": str(e)}, [str(e)])
    if kind == "thm-psi":
        base = s.set(a.base)
        xs, ys = _nat_list(a.X), _nat_list(a.Y)
        pack = C.thm_pack(xs, ys, base, a.trunc, a.kbar, a.samples, a.seed)
        return _run_pack(s, pack, {}, [f"witness {_show(pack.witnesses['f'])}"])
    if kind == "claim-psi":
        base = s.set(a.base)
        y0, y1 = C.find_points(base)
        y0 = dsl.parse_point_text(a.y0) if a.y0 else y0
        y1 = dsl.parse_point_text(a.y1) if a.y1 else y1
        pack = C.claim_pack(base, _bits(a.bits), a.trunc, y0, y1, a.samples, a.seed)
        return _run_pack(s, pack)
    if kind in ("psi0", "psi1"):
        fam = [s.set(t) for t in a.stand_in] if a.stand_in else C.DEFAULT_STANDINS
        xs, ys = _nat_list(a.X), _nat_list(a.Y)
        if kind == "psi0":
            pack = C.psi0_pack(xs, ys, fam)
        else:
            sched = _schedule(a.schedule) if a.schedule else None
            pack = C.psi1_pack(xs, ys, fam, sched, a.samples, a.seed)
        return _run_pack(s, pack)
    if kind == "shrink":
        target = s.set(a.set)
        sc = DG.selfcontractible(target)
        if not sc:
            raise WadgeError(f"{target} is not selfcontractible")
        pack = C.shrink(target, sc.witness, sc.fixed_point.take(a.prefix))
        return _run_pack(s, pack)
    if kind == "counterexamples":
        return _run_pack(s, C.counterexamples())
    raise WadgeError(f"unknown construction {kind!r}")


def cmd_pack(s):
    if s.args.action == "list":
        names = sorted(C.PACKS)
        return s.emit({"packs": names}, names)
    if not s.args.name:
        raise WadgeError("pack run needs a pack name")
    return _run_pack(s, C.named_pack(s.args.name))


def _run_command(c):
    """Execute one program command; returns (observed, detail)."""
    a = c.args
    if c.verb == "leq":
        v = DG.leq(a[0], a[1], a[2])
        bad = isinstance(v, DG.Holds) and v.check is not None and not v.check.holds
        return ("Holds (witness failed verification)" if bad else v.status), \
            _show(getattr(v, "witness", None) or getattr(v, "counter", None))
    if c.verb == "selfdual":
        return str(DG.selfdual(a[1], a[0])).lower(), None
    if c.verb == "selfcontract":
        res = DG.selfcontractible(a[0])
        return str(res.contractible).lower(), (f"fixed point {res.fixed_point}"
                                               if res.contractible else None)
    if c.verb == "fixpoint":
        return str(T.fixed_point(a[0])), None
    if c.verb == "certify":
        cert = T.certify_lipschitz(a[1], a[0], a[2] if len(a) > 2 else None)
        return type(cert).__name__, _certificate_line(_certificate_fields(cert))
    if c.verb == "verify":
        mode = a[3]
        v = T.verify_reduction(a[0], a[1], a[2], mode=mode,
                               samples=a[4] if mode == "sampled" else 1000)
        return ("Holds" if v.holds else "Fails"), (
            f"counterexample {v.counterexample}" if v.counterexample is not None else None)
    raise WadgeError(f"unknown command {c.verb!r}")


def cmd_run(s):
    prog = dsl.parse(_read(s.args.file))
    results, lines, failed = [], [], 0
    for c in prog.commands:
        observed, detail = _run_command(c)
        ok = c.expect is None or c.expect == observed
        failed += not ok
        entry = {"line": c.line, "command": dsl.print_command(c), "observed": observed, "ok": ok}
        if c.expect is not None:
            entry["expected"] = c.expect
        if detail:
            entry["detail"] = detail
        results.append(entry)
        tag = "ok" if ok else "FAIL"
        lines.append(f"[{tag}] line {c.line}: {observed}" + (f" ({detail})" if detail else ""))
    lines.append(f"{len(results)} commands, {failed} unmet expectations")
    return s.emit({"file": s.args.file, "results": results, "violations": failed}, lines,
                  1 if failed else 0)


# -- argument parsing ----------------------------------------------------------------------


def _common_flags(suppress):
    """Global flags; subcommands repeat them with suppressed defaults so either position works."""
    def default(value):
        return argparse.SUPPRESS if suppress else value

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=default(False),
                        help="emit a JSON report")
    common.add_argument("--seed", type=lambda t: int(t, 0), default=default(DEFAULT_SEED),
                        help="seed for sampled checks (default 0x5EED)")
    common.add_argument("--timing", action="store_true", default=default(False),
                        help="include wall-clock timing in JSON reports")
    common.add_argument("--defs", metavar="FILE", default=default(None),
                        help="program file whose definitions may be referenced by name")
    return common


def build_parser():
    common = _common_flags(suppress=True)
    p = argparse.ArgumentParser(prog="wadgebench", parents=[_common_flags(suppress=False)],
                                description="Reducibility games on Baire space.")
    p.add_argument("--version", action="version", version=f"wadgebench {__version__}")
    sub = p.add_subparsers(dest="verb", required=True, metavar="VERB")

    def verb(name, func, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func)
        return sp

    sp = verb("dist", cmd_dist, "distance between two points")
    sp.add_argument("metric", help="D, D0 or D1")
    sp.add_argument("x")
    sp.add_argument("y")

    sp = verb("certify", cmd_certify, "Lipschitz certificate for a transducer")
    sp.add_argument("metric")
    sp.add_argument("transducer")
    sp.add_argument("--constant", help="target constant, e.g. 1/2")

    sp = verb("fixpoint", cmd_fixpoint, "fixed point of a contracting transducer")
    sp.add_argument("transducer")

    sp = verb("verify", cmd_verify, "check that T reduces A to B: verify T : A -> B")
    sp.add_argument("claim", nargs="+")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--exact", type=int, metavar="DEPTH", nargs="?", const=0,
                       help="exact product check (the default)")
    group.add_argument("--sample", type=int, metavar="N", help="check N sampled points")

    sp = verb("game", cmd_game, "solve a reducibility game")
    sp.add_argument("variant", help="lipschitz (L) or wadge (W)")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--lead", type=int, default=0)
    sp.add_argument("--witness", action="store_true", help="extract the winning strategy")

    sp = verb("leq", cmd_leq, "decide A <=_rel B")
    sp.add_argument("rel", help="L, C, W, Cr(p/q), Lip(k) or LipB(K)")
    sp.add_argument("a")
    sp.add_argument("b")

    sp = verb("selfdual", cmd_selfdual, "decide A <=_rel not A")
    sp.add_argument("rel")
    sp.add_argument("a")

    sp = verb("selfcontract", cmd_selfcontract, "find a contraction f with f^-1(A) = A")
    sp.add_argument("a")

    sp = verb("hasse", cmd_hasse, "degree diagram of a corpus")
    sp.add_argument("corpus")
    sp.add_argument("--rel", default="L")
    sp.add_argument("--dot", metavar="FILE", help="write Graphviz output here")

    sp = verb("audit", cmd_audit, "check the structure theorems over a corpus")
    sp.add_argument("corpus")
    sp.add_argument("--roundtrip", action="store_true",
                    help="also extract and verify the witness of every ordered pair")
    sp.add_argument("--show", type=int, default=20, help="violations listed per check")

    sp = verb("parse", cmd_parse, "parse a program file")
    sp.add_argument("file")
    sp.add_argument("--check", action="store_true", help="only report success or the error")

    sp = verb("fmt", cmd_fmt, "print a program in canonical form")
    sp.add_argument("file")
    sp.add_argument("--write", action="store_true", help="rewrite the file in place")

    sp = verb("corpus", cmd_corpus, "generate corpora")
    sp.add_argument("action", choices=["enumerate"])
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--letters", type=int, default=2)
    sp.add_argument("--no-named", action="store_true", help="clopen sets only")
    sp.add_argument("--out", metavar="FILE")

    sp = verb("construct", cmd_construct, "build a family and run its witness pack")
    sp.add_argument("family", choices=["cor5", "a-family", "thm-psi", "claim-psi", "psi0",
                                       "psi1", "shrink", "counterexamples"])
    sp.add_argument("--bits", default="1011")
    sp.add_argument("--base", default="N(0)")
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--trunc", type=int, default=None)
    sp.add_argument("--X", help="index set, e.g. 0,3 (default 0 for thm-psi, 1 for psi0/psi1)")
    sp.add_argument("--Y", help="index set, e.g. 0,1 (default 0,1 for thm-psi, 1,2 for psi0/psi1)")
    sp.add_argument("--kbar", type=int, default=None)
    sp.add_argument("--y0")
    sp.add_argument("--y1")
    sp.add_argument("--stand-in", action="append", help="stand-in family member (repeatable)")
    sp.add_argument("--schedule", help="enumeration schedule for psi1, e.g. 1:2")
    sp.add_argument("--set", default="hits(0)", help="set to shrink")
    sp.add_argument("--prefix", type=int, default=3, help="shrink to the fixed point's prefix")
    sp.add_argument("--samples", type=int, default=1000)

    sp = verb("pack", cmd_pack, "run a named witness pack")
    sp.add_argument("action", choices=["run", "list"])
    sp.add_argument("name", nargs="?")

    sp = verb("run", cmd_run, "execute the commands of a program file")
    sp.add_argument("file")
    return p


ARROW = "\u2192"


def main(argv=None, out=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    out = out or sys.stdout
    parser = build_parser()
    try:
        # a bare "->" would otherwise be read as an option
        args = parser.parse_args([ARROW if a == "->" else a for a in argv])
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        session = Session(args, argv, out)
        return args.func(session)
    except ParseError as exc:
        print(f"wadgebench: parse error: {exc}", file=sys.stderr)
        return 2
    except WadgeError as exc:
        print(f"wadgebench: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
