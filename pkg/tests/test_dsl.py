from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from wadgebench import dsl
from wadgebench import sets as S
from wadgebench import transducers as T
from wadgebench.core import Point
from wadgebench.errors import ParseError

CORPORA = sorted((Path(__file__).parent.parent / "corpora").glob("*.wdg"))


@pytest.mark.parametrize("text", [
    "(N(0 1) | !(N(2)))",
    "osum[N(1), hits(letter=0); default=empty]",
    "A_family(base=N(0), m=2)",
    "(cat(0 1; hits(letter=2)) & loc(3; N(3 4)))",
    "psi0(X={1}, family=[N(5), N(0)])",
])
def test_set_print_is_canonical(text):
    assert dsl.print_set(dsl.parse_set(text)) == text


@pytest.mark.parametrize("text", [
    "compose(prepend(1), pad, drop(1))",
    "case{1 -> id; default=const(0 ~ 1)}",
    "flm{0->1; default=max(2)}",
    "mask(2; 0 ~ 7)",
])
def test_transducer_print_is_canonical(text):
    assert dsl.print_transducer(dsl.parse_transducer(text)) == text


def test_parse_shapes():
    assert dsl.parse_set("N(0) | N(1)") == S.Union(S.Cylinder((0,)), S.Cylinder((1,)))
    assert dsl.parse_transducer("prepend(2 3)") == T.Prepend((2, 3))
    assert dsl.parse_point_text("1 2 ~ 0 3") == Point((1, 2), (0, 3))
    assert dsl.parse_set("hits(0)") == S.hits(0)


def test_shorthands_print_long_form():
    assert dsl.print_set(dsl.parse_set("hits(2)")) == "hits(letter=2)"
    assert dsl.print_transducer(dsl.parse_transducer("compose(id)")) == "id"


def test_definitions_resolve():
    prog = dsl.parse("let a = N(0); let f = flm{0->1, 1->0; default=id}; let b = !(a);")
    env = prog.definitions
    assert set(env) == {"a", "f", "b"}
    assert [name for name, _ in prog.sets()] == ["a", "b"]
    assert S.accepts(env["b"], Point((1,), (0,)))
    assert isinstance(env["f"], T.Transducer)


def test_unclosed_paren_position():
    with pytest.raises(ParseError) as err:
        dsl.parse("let a = N(0")
    assert (err.value.line, err.value.col) == (1, 12)
    assert str(err.value).startswith("1:12:")
    assert "')'" in err.value.expected


@pytest.mark.parametrize("text, where, fragment", [
    ("N(0) | foo", "1:8", "unknown name"),
    ("N(0) | N(1) & N(2)", "1:13", "parentheses"),
    ("osum(N(1); default=empty)", "1:5", "'['"),
])
def test_set_errors(text, where, fragment):
    with pytest.raises(ParseError) as err:
        dsl.parse_set(text)
    assert str(err.value).startswith(where)
    assert fragment in str(err.value)


def test_program_errors():
    with pytest.raises(ParseError, match="already defined"):
        dsl.parse("let x = N(0);\nlet x = N(1);")
    with pytest.raises(ParseError) as err:
        dsl.parse("let a = N(0);\nleq L a b;")
    assert err.value.line == 2
    with pytest.raises(ParseError, match="names a transducer"):
        dsl.parse("let f = id; leq L f f;")
    with pytest.raises(ParseError):
        dsl.parse_transducer("flm{; default=add(x)}")


def test_commands_round_trip():
    text = ("let a = N(0);\n"
            "leq Cr(1/4) a cat(0; a) expect Fails;\n"
            "verify id : a -> a sample 50 expect Holds;\n"
            "certify D0 flm{; default=add(1)} 2 expect Certified;\n")
    prog = dsl.parse(text)
    assert [c.verb for c in prog.commands] == ["leq", "verify", "certify"]
    assert [c.line for c in prog.commands] == [2, 3, 4]
    assert dsl.parse(dsl.print_program(prog)) == prog


@pytest.mark.parametrize("path", CORPORA, ids=lambda p: p.name)
def test_corpus_round_trip(path):
    prog = dsl.parse(path.read_text())
    printed = dsl.print_program(prog)
    again = dsl.parse(printed)
    assert again == prog
    assert dsl.print_program(again) == printed


cylinders = st.lists(st.integers(0, 5), max_size=3).map(lambda w: S.Cylinder(tuple(w)))
set_exprs = st.recursive(
    st.one_of(st.just(S.Empty()), st.just(S.Full()), cylinders,
              st.integers(0, 3).map(S.hits)),
    lambda inner: st.one_of(
        inner.map(S.Complement),
        st.tuples(inner, inner).map(lambda p: S.Union(*p)),
        st.tuples(inner, inner).map(lambda p: S.Intersection(*p)),
        st.tuples(st.lists(st.integers(0, 3), max_size=2), inner)
          .map(lambda p: S.ConcatPrefix(tuple(p[0]), p[1])),
        st.tuples(inner, inner).map(lambda p: S.OPlus(*p)),
    ),
    max_leaves=6,
)


@given(set_exprs)
def test_generated_sets_round_trip(e):
    assert dsl.parse_set(dsl.print_set(e)) == e
