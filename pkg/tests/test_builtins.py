import io

import pytest
from conftest import load, sit_at, verdict
from hypothesis import given, settings
from hypothesis import strategies as st

from prosit import Engine, read_one
from prosit.builtins import CATALOG, evaluate, lookup
from prosit.errors import BuiltinError, EvalError, InconsistentEquality
from prosit.reader import Param
from prosit.repl import Session


def answers(engine, text, sit=None):
    return [dict(a) for a in engine.ask(read_one(text), sit)]


def session(engine=None):
    return Session(engine or Engine(), out=io.StringIO(), err=io.StringIO(), batch=True)


def test_catalog_lookup_is_case_insensitive():
    assert lookup("RESP") is lookup("resp") is not None
    assert lookup("In") is lookup("in")
    assert lookup("happy") is None
    for name in ["!=", "in", "out", "!", "-!", "<=", "=>", "<=>", "resp", "rule", "and", "or",
                 "not", "cut", "fail", "true", "@<", "<--", "[_", "=", "bind-eval", "load",
                 "demo", "printsit", "trace", "duals", "exit", "run"]:
        assert name in CATALOG, name


def test_describe_asserts_into_child(run):
    e = run("(!= s1 (p 1)) (!= s1 (!= s2 (q 2)))")
    assert sit_at(e, "top/s1").infons == [read_one("(p 1)")]
    assert sit_at(e, "top/s1/s2").infons == [read_one("(q 2)")]
    assert answers(e, "(!= s1 (p *x))") == [{"*x": 1}]
    assert answers(e, "(!= *s (p 1))") == [{"*s": Param("s1")}]
    assert answers(e, "(!= s1 (!= s2 (q *y)))") == [{"*y": 2}]


def test_describe_query_never_creates(run):
    e = run()
    assert not e.succeeds(read_one("(!= ghost (p 1))"))
    assert Param("ghost") not in e.store.top.children


def test_in_out_move_focus():
    s = session()
    s.eval_text("(in s1) (p 1) (in s2) (q 2) (out) (r 3) (out) (t 4)")
    e = s.engine
    assert sit_at(e, "top/s1").infons == [read_one("(p 1)"), read_one("(r 3)")]
    assert sit_at(e, "top/s1/s2").infons == [read_one("(q 2)")]
    assert e.store.top.infons == [read_one("(t 4)")]
    assert s.errors == 0


@settings(max_examples=80, deadline=None)
@given(st.lists(st.booleans(), max_size=12))
def test_in_out_keep_focus_balanced(moves):
    s = session()
    depth = 0
    for i, go_in in enumerate(moves):
        if go_in:
            s.eval_text(f"(in c{i})")
            depth += 1
        else:
            s.eval_text("(out)")
            depth = max(0, depth - 1)
        assert len(s.focus) == depth + 1
    assert s.focus[0] is s.engine.store.top


def test_in_out_need_a_session(run):
    with pytest.raises(BuiltinError):
        run("(in s)")


def test_bang_is_idempotent(run):
    e = run("(! (k 1) (k 2))")
    once = e.store.fingerprint()
    load(e, "(! (k 1) (k 2)) (k 1)")
    assert e.store.fingerprint() == once


def test_retract_flips_verdict(run):
    e = run("(k 1) (k 2) (no (j 1))")
    assert verdict(e, "(k 1)") == "yes"
    load(e, "(-! (k 1))")
    assert verdict(e, "(k 1)") == "unknown"
    assert verdict(e, "(k 2)") == "yes"
    load(e, "(-! (k *x))")
    assert answers(e, "(k *x)") == []
    load(e, "(-! (no (j 1)))")
    assert verdict(e, "(j 1)") == "unknown"


@pytest.mark.parametrize("form, pattern", [
    ("(-! (k 1))", "cannot be queried"),
    ("(in s)", "needs an interactive session"),
])
def test_mode_errors_on_query(run, form, pattern):
    with pytest.raises(BuiltinError, match=pattern):
        answers(run(), form)


@pytest.mark.parametrize("form, pattern", [
    ("(cut)", "cannot be asserted"),
    ("(= a)", "expects 2"),
    ("(!= top)", "at least 2"),
    ("(fail)", "asserted"),
    ("5", "only lists"),
    ("(<= (a))", "at least 2"),
])
def test_assert_errors(run, form, pattern):
    with pytest.raises(BuiltinError, match=pattern):
        run(form)


def test_resp_and_rule(run):
    e = run("(!= s (p 1)) (resp s (<= (r) (p 1))) (!= s (rule (<= (g *x) (p *x))))")
    s = sit_at(e, "top/s")
    assert e.succeeds(read_one("(r)"), s)
    assert not e.succeeds(read_one("(r)"))
    assert answers(e, "(resp s (<= (r) (p 1)))") == [{}]
    assert answers(e, "(resp s (<= (r) (p 2)))") == []
    assert answers(e, "(!= s (g *x))") == [{"*x": 1}]


def test_constraints_are_inherited_by_subtype_only(run):
    e = run("(!= s (p 1)) (resp s (<= (r) (p 1))) (@< s t) (<-- s u)")
    assert e.succeeds(read_one("(!= t (r))"))
    assert not e.succeeds(read_one("(!= u (r))"))
    assert e.succeeds(read_one("(!= u (p 1))"))


def test_link_queries(run):
    e = run("(@< s t) (<-- s u) ([_ v w)")
    assert answers(e, "(@< s *z)") == [{"*z": Param("t")}]
    assert answers(e, "(@< *w t)") == [{"*w": Param("s")}]
    assert answers(e, "(<-- s u)") == [{}]
    assert answers(e, "(<- s u)") == [{}]
    assert answers(e, "([_ v w)") == [{}]
    assert answers(e, "(@< t s)") == []
    assert answers(e, "(<-- t s)") == []


def test_parameter_equality(run):
    e = run("(!= s (= cicero tully)) (!= s (orator cicero))")
    s = sit_at(e, "top/s")
    assert e.succeeds(read_one("(= tully cicero)"), s)
    assert e.succeeds(read_one("(orator tully)"), s)
    assert not e.succeeds(read_one("(= tully cicero)"))
    # identifying two constants is recorded as an incoherence, not stored
    load(e, "(!= c (= a 1)) (!= c (= a 2))")
    c = sit_at(e, "top/c")
    assert e.check_incoherent(c) == read_one("(= a 2)")
    assert e.succeeds(read_one("(= a 1)"), c)
    with pytest.raises(InconsistentEquality):
        e.store.top.equalities.union(1, 2)
    with pytest.raises(BuiltinError):
        load(e, "(= *x a)")


def test_clear_retracts_infons_only(run):
    e = run("(!= s (p 1)) (!= s (<= (r) (true))) (!= s (= a b)) (!= s (!= inner (q 1))) (@< t s)")
    load(e, "(clear s)")
    s = sit_at(e, "top/s")
    assert s.infons == []
    assert not e.succeeds(read_one("(= a b)"), s)
    # constraints, links and sub-situations survive
    assert e.succeeds(read_one("(r)"), s)
    assert e.succeeds(read_one("(!= inner (q 1))"), s)
    assert e.succeeds(read_one("(@< t s)"))
    assert answers(e, "(clear s)") == [{}]


def test_me_names_current_situation(run):
    e = run("(!= s (p 1))")
    assert answers(e, "(me *m)") == [{"*m": Param("top")}]
    assert answers(e, "(!= s (me *m))") == [{"*m": Param("s")}]


@pytest.mark.parametrize("form, value", [
    ("(+ 1 2 3)", 6), ("(- 10 4)", 6), ("(- 3)", -3), ("(* 2 3 4)", 24),
    ("(/ 6 3)", 2), ("(/ 7 2)", 3.5), ("(mod 7 3)", 1), ("(abs -4)", 4),
    ("(min 3 1 2)", 1), ("(max 3 1 2)", 3), ("(+ 1.5 1)", 2.5),
])
def test_evaluate(form, value):
    assert evaluate(read_one(form)) == value


@pytest.mark.parametrize("form", ["(foo 1)", "(+ 1 a)", "(+ 1 *x)", "(/ 1 0)", "(mod 1 0)", "(+)", "'text'"])
def test_evaluate_rejects(form):
    with pytest.raises(EvalError):
        evaluate(read_one(form))


def test_comparisons_and_lisp(run):
    e = run()
    assert e.succeeds(read_one("(> 3 2)"))
    assert not e.succeeds(read_one("(< 3 2)"))
    assert e.succeeds(read_one("(>= 2 2)")) and e.succeeds(read_one("(=< 2 2)"))
    assert e.succeeds(read_one("(lisp (> (+ 1 2) 2))"))
    assert not e.succeeds(read_one("(lisp (< 5 2))"))
    assert answers(e, "(bind-lisp *n (- 3 1))") == [{"*n": 2}]
    with pytest.raises(EvalError):
        e.succeeds(read_one("(lisp (format t 'hi'))"))
    with pytest.raises(EvalError):
        e.succeeds(read_one("(> 3 *x)"))


def test_or_asserted_is_stored(run):
    e = run("(or (a) (b))")
    assert read_one("(or (a) (b))") in e.store.top.infons


def test_and_asserted_asserts_each(run):
    e = run("(and (a) (b))")
    assert e.store.top.infons == [read_one("(a)"), read_one("(b)")]


def test_session_commands(tmp_path):
    prog = tmp_path / "p.pst"
    prog.write_text("(k 1)\n?\n(k 1)\n")
    s = session()
    s.eval_text(f"(load '{prog}') (k 2) (printsit) (duals on) (trace off)")
    assert s.errors == 0
    assert s.mode == "assert"
    assert s.duals is True
    out = s.out.getvalue().splitlines()
    assert out[0] == "yes."
    assert "(k 1)" in out and "(k 2)" in out


def test_session_command_errors(tmp_path):
    s = session()
    s.eval_text(f"(load '{tmp_path / 'missing.pst'}') (duals maybe) (printsit nowhere)")
    assert s.errors == 3
    assert "cannot read" in s.err.getvalue()
