import pytest
from hypothesis import given, strategies as st

from prosit.errors import LexError, ParseError
from prosit.reader import ModeSwitch, Param, Var, classify_atom, read, read_one, to_text, tokenize


def test_atoms_are_classified():
    assert classify_atom("42") == 42
    assert classify_atom("-7") == -7
    assert classify_atom("2.5") == 2.5
    assert classify_atom("*x") == Var("*x")
    assert classify_atom("cicero") == Param("cicero")
    assert classify_atom("[_") == Param("[_")


def test_nested_list():
    assert read_one("(!= sit1 (orator cicero))") == (
        Param("!="), Param("sit1"), (Param("orator"), Param("cicero")))


def test_strings_and_comments():
    forms = read("; a comment\n(load 'island.pst') ; trailing\n")
    assert forms == [(Param("load"), "island.pst")]


def test_mode_switches_only_at_top_level():
    forms = read("! (foo) ? (! (bar))")
    assert forms[0] == ModeSwitch("!")
    assert forms[2] == ModeSwitch("?")
    assert forms[3] == (Param("!"), (Param("bar"),))


def test_quote_inside_atom():
    assert read_one("(a'b)") == (Param("a'b"),)


def test_unbalanced_close_has_span():
    with pytest.raises(ParseError) as exc:
        read("(a))")
    assert exc.value.span == (3, 4)


def test_missing_close_points_at_open():
    with pytest.raises(ParseError) as exc:
        read("(a (b)")
    assert exc.value.span == (0, 1)


def test_unterminated_string():
    with pytest.raises(LexError) as exc:
        tokenize("(load 'x")
    assert exc.value.span[0] == 6


def test_read_one_rejects_many():
    with pytest.raises(ParseError):
        read_one("(a) (b)")


def test_token_spans():
    toks = tokenize("(ab *c)")
    assert [(t.kind, t.text, t.span) for t in toks] == [
        ("open", "(", (0, 1)), ("atom", "ab", (1, 3)), ("atom", "*c", (4, 6)), ("close", ")", (6, 7))]


names = st.from_regex(r"[a-z][a-z0-9_\-]{0,6}", fullmatch=True)
atoms = st.one_of(
    st.integers(-1000, 1000),
    st.floats(allow_nan=False, allow_infinity=False, width=32).filter(lambda f: f == f),
    st.from_regex(r"[a-z ]{0,8}", fullmatch=True),
    names.map(Param),
    names.map(lambda n: Var("*" + n)),
)
exprs = st.recursive(atoms, lambda inner: st.lists(inner, max_size=4).map(tuple), max_leaves=20)


@given(exprs)
def test_round_trip(e):
    assert read_one(to_text(e)) == e
