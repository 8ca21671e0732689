"""System predicates.

Each entry knows how to run as a query (a solution stream) and, where that
makes sense, as an assertion.  Names are matched case-insensitively.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Iterator, Optional

from .errors import BuiltinError, EvalError
from .reader import Expression, Param, Var, to_text
from .store import is_constraint_form
from .terms import BindingEnv, head_name, v_unify

if TYPE_CHECKING:
    from .engine import Engine, Frame
    from .store import Situation

TRUE = Param("true")
FALSE = Param("false")

QueryFn = Callable[..., Iterator[None]]
TellFn = Callable[..., None]


@dataclass(frozen=True)
class BuiltinEntry:
    name: str
    min_args: int
    max_args: Optional[int]  # None: variadic
    query: Optional[QueryFn]
    tell: Optional[TellFn]

    @property
    def mode(self) -> str:
        if self.query and self.tell:
            return "both"
        return "queryable" if self.query else "assertable"

    def check_arity(self, form: tuple) -> None:
        n = len(form) - 1
        if n < self.min_args or (self.max_args is not None and n > self.max_args):
            if self.max_args is None:
                want = f"at least {self.min_args}"
            elif self.max_args == self.min_args:
                want = str(self.min_args)
            else:
                want = f"{self.min_args} to {self.max_args}"
            raise BuiltinError(f"{self.name} expects {want} argument(s): {to_text(form)}")

    def run_query(self, engine: "Engine", form, sit, env, depth, frame) -> Iterator[None]:
        self.check_arity(form)
        if self.query is None:
            raise BuiltinError(f"{self.name} cannot be queried: {to_text(form)}")
        return self.query(engine, form[1:], sit, env, depth, frame)

    def run_assert(self, engine: "Engine", form, sit) -> None:
        self.check_arity(form)
        if self.tell is None:
            raise BuiltinError(f"{self.name} cannot be asserted: {to_text(form)}")
        self.tell(engine, form[1:], sit)


CATALOG: dict[str, BuiltinEntry] = {}


def lookup(name: str) -> Optional[BuiltinEntry]:
    return CATALOG.get(name.lower())


def _register(name: str, min_args: int, max_args: Optional[int],
              query: Optional[QueryFn] = None, tell: Optional[TellFn] = None) -> None:
    CATALOG[name] = BuiltinEntry(name, min_args, max_args, query, tell)


def _once() -> Iterator[None]:
    yield


def _nothing() -> Iterator[None]:
    return
    yield


def _param(x: Expression, what: str) -> Param:
    if isinstance(x, Param):
        return x
    if isinstance(x, Var):
        raise BuiltinError(f"{what} must be bound, got unbound {x!r}")
    raise BuiltinError(f"{what} must be a situation name, got {to_text(x)}")


# -- situation description ----------------------------------------------------

def _describe_query(engine, args, sit, env, depth, frame):
    from .engine import Frame
    target, infons = args[0], args[1:]
    store = engine.store
    mark = env.mark()
    try:
        if isinstance(target, Var):
            for inner in store.described(sit):
                if v_unify(target, inner.name, env):
                    yield from engine.solve_conj(infons, inner, env, depth + 1, Frame())
                    env.undo(mark)
        elif isinstance(target, Param):
            for inner in store.resolve_all(sit, target):
                yield from engine.solve_conj(infons, inner, env, depth + 1, Frame())
    finally:
        env.undo(mark)
    # (!= s F) may also be derived by constraints of the describing situation
    yield from engine.solve_constraints((Param("!="),) + tuple(args), sit, env, depth)


def _describe_tell(engine, args, sit):
    inner = engine.store.resolve(sit, _param(args[0], "situation"))
    for infon in args[1:]:
        engine._tell(infon, inner)


_register("!=", 2, None, _describe_query, _describe_tell)


# -- focus (interactive) ---------------------------------------------------------

def _session(engine, name):
    if engine.session is None:
        raise BuiltinError(f"{name} needs an interactive session")
    return engine.session


def _in_tell(engine, args, sit):
    session = _session(engine, "in")
    session.enter(engine.store.resolve(sit, _param(args[0], "situation")))


def _out_tell(engine, args, sit):
    _session(engine, "out").leave()


def _as_query(tell: TellFn) -> QueryFn:
    def query(engine, args, sit, env, depth, frame):
        tell(engine, args, sit)
        return _once()
    return query


_register("in", 1, 1, _as_query(_in_tell), _in_tell)
_register("out", 0, 0, _as_query(_out_tell), _out_tell)


# -- assertion and retraction ----------------------------------------------------

def _assert_tell(engine, args, sit):
    for infon in args:
        engine._tell(infon, sit)


def _retract_tell(engine, args, sit):
    for pattern in args:
        engine.store.retract_matching(sit, pattern)


_register("!", 1, None, _as_query(_assert_tell), _assert_tell)
_register("-!", 1, None, None, _retract_tell)


# -- constraints ---------------------------------------------------------------------

def _respects(engine, target, form, env) -> Iterator[None]:
    mark = env.mark()
    try:
        for c in list(engine.store.respected_constraints(target)):
            if v_unify(form, c.form, env):
                yield
                env.undo(mark)
    finally:
        env.undo(mark)


def _make_constraint_entry(head: str) -> None:
    def query(engine, args, sit, env, depth, frame):
        return _respects(engine, sit, (Param(head),) + tuple(args), env)

    def tell(engine, args, sit):
        engine.store.add_constraint(sit, (Param(head),) + tuple(args))

    _register(head, 2, None, query, tell)


for _head in ("<=", "=>", "<=>"):
    _make_constraint_entry(_head)


def _check_constraint(form) -> None:
    if not is_constraint_form(form):
        raise BuiltinError(f"not a constraint: {to_text(form)}")


def _resp_tell(engine, args, sit):
    target = engine.store.resolve(sit, _param(args[0], "situation"))
    for form in args[1:]:
        _check_constraint(form)
        engine.store.add_constraint(target, form)


def _resp_query(engine, args, sit, env, depth, frame):
    forms = tuple(args[1:])
    for target in engine.store.resolve_all(sit, _param(args[0], "situation")):
        yield from _respects_all(engine, target, forms, env)


def _respects_all(engine, target, forms, env):
    if not forms:
        yield
        return
    for _ in _respects(engine, target, forms[0], env):
        yield from _respects_all(engine, target, forms[1:], env)


def _rule_tell(engine, args, sit):
    for form in args:
        _check_constraint(form)
        engine.store.add_constraint(sit, form)


def _rule_query(engine, args, sit, env, depth, frame):
    from .engine import Frame
    goals = tuple(args)
    for g in goals:
        _check_constraint(g)
    return engine.solve_conj(goals, sit, env, depth, Frame())


_register("resp", 2, None, _resp_query, _resp_tell)
_register("rule", 1, None, _rule_query, _rule_tell)


# -- control ---------------------------------------------------------------------------

def _and_query(engine, args, sit, env, depth, frame):
    return engine.solve_conj(tuple(args), sit, env, depth, frame)


def _or_query(engine, args, sit, env, depth, frame):
    for branch in args:
        yield from engine.solve(branch, sit, env, depth, frame)
        if frame.cut:
            return


def _or_tell(engine, args, sit):
    # no disjunctive facts: the disjunction is stored as an opaque infon
    engine.assert_with_forward(sit, (Param("or"),) + tuple(args))


def _not_query(engine, args, sit, env, depth, frame):
    from .engine import Frame
    mark = env.mark()
    inner = engine.solve(args[0], sit, env, depth, Frame())
    try:
        for _ in inner:
            return
    finally:
        inner.close()
        env.undo(mark)
    yield


def _cut_query(engine, args, sit, env, depth, frame):
    yield
    frame.cut = True


def _true_tell(engine, args, sit):
    pass


def _fail_tell(engine, args, sit):
    raise BuiltinError("(fail) asserted")


_register("and", 0, None, _and_query, _assert_tell)
_register("or", 1, None, _or_query, _or_tell)
_register("not", 1, 1, _not_query, None)
_register("cut", 0, 0, _cut_query, None)
_register("fail", 0, 0, lambda *a: _nothing(), _fail_tell)
_register("true", 0, 0, lambda *a: _once(), _true_tell)


# -- relations between situations -----------------------------------------------------

_LINK_NAMES = {"@<": "@<", "<--": "<--", "<-": "<--", "[_": "[_"}


def _make_link_entry(spelling: str) -> None:
    kind = _LINK_NAMES[spelling]

    def tell(engine, args, sit):
        store = engine.store
        a = store.resolve(sit, _param(args[0], "situation"))
        b = store.resolve(sit, _param(args[1], "situation"))
        if kind == "@<":
            store.subtype_link(a, b)
        elif kind == "<--":
            store.subsituation_link(a, b)
        else:
            store.subchunk_link(a, b)
        store.log_relation(sit, (Param(kind), args[0], args[1]))

    def query(engine, args, sit, env, depth, frame):
        store = engine.store
        x, y = args
        if isinstance(x, Param) and isinstance(y, Param):
            if any(store.has_link(kind, a, b)
                   for a in store.resolve_all(sit, x)
                   for b in store.resolve_all(sit, y)):
                return _once()
            return _nothing()
        return _logged_links(engine, kind, x, y, sit, env)

    _register(spelling, 2, 2, query, tell)


def _logged_links(engine, kind, x, y, sit, env):
    store = engine.store
    mark = env.mark()
    try:
        for src in store.visible_sources(sit):
            for entry in list(src.relation_log):
                if head_name(entry) != kind:
                    continue
                a = store.resolve(src, entry[1], create=False)
                b = store.resolve(src, entry[2], create=False)
                if a is None or b is None or not store.has_link(kind, a, b):
                    continue
                if v_unify((x, y), (entry[1], entry[2]), env):
                    yield
                    env.undo(mark)
    finally:
        env.undo(mark)


for _spelling in _LINK_NAMES:
    _make_link_entry(_spelling)


# -- equality ----------------------------------------------------------------------------

def _eq_tell(engine, args, sit):
    a, b = args
    if isinstance(a, Var) or isinstance(b, Var):
        raise BuiltinError(f"cannot P-unify unbound variables: {to_text((Param('='), a, b))}")
    if isinstance(a, tuple) and isinstance(b, tuple):
        raise BuiltinError("P-unification needs a parameter on at least one side")
    engine.store.p_unify(sit, a, b)


def _eq_query(engine, args, sit, env, depth, frame):
    return _unify_once(args[0], args[1], env, engine.store.equalities_for(sit))


def _unify_once(a, b, env, eq=None) -> Iterator[None]:
    mark = env.mark()
    if v_unify(a, b, env, eq):
        try:
            yield
        finally:
            env.undo(mark)


_register("=", 2, 2, _eq_query, _eq_tell)


# -- arithmetic -------------------------------------------------------------------------

def _div(a, b):
    if b == 0:
        raise EvalError("division by zero")
    if isinstance(a, int) and isinstance(b, int) and a % b == 0:
        return a // b
    return a / b


def _mod(a, b):
    if b == 0:
        raise EvalError("division by zero")
    return a % b


_ARITH: dict[str, Callable] = {
    "+": lambda *xs: sum(xs),
    "-": lambda a, *xs: a - sum(xs) if xs else -a,
    "*": None,
    "/": _div,
    "mod": _mod,
    "abs": abs,
    "min": min,
    "max": max,
}


def _product(*xs):
    out = 1
    for x in xs:
        out *= x
    return out


_ARITH["*"] = _product

_COMPARE: dict[str, Callable] = {
    ">": operator.gt,
    "<": operator.lt,
    ">=": operator.ge,
    "<=": operator.le,
    "=<": operator.le,
    "=": operator.eq,
    "/=": operator.ne,
}


def evaluate(form: Expression) -> Expression:
    """Value of a ground arithmetic form."""
    if isinstance(form, bool):
        return TRUE if form else FALSE
    if isinstance(form, (int, float)):
        return form
    if isinstance(form, Var):
        raise EvalError(f"unbound variable {form!r} in arithmetic")
    if form in (TRUE, FALSE):
        return form
    if not isinstance(form, tuple) or not form or not isinstance(form[0], Param):
        raise EvalError(f"not an arithmetic expression: {to_text(form)}")
    op = form[0].name.lower()
    args = [evaluate(x) for x in form[1:]]
    if op in _COMPARE:
        if len(args) != 2:
            raise EvalError(f"{op} takes two operands")
        _numbers(op, args)
        return TRUE if _COMPARE[op](*args) else FALSE
    fn = _ARITH.get(op)
    if fn is None:
        raise EvalError(f"unknown operator {form[0].name!r}")
    if not args:
        raise EvalError(f"{op} needs operands")
    _numbers(op, args)
    try:
        return fn(*args)
    except TypeError as exc:
        raise EvalError(f"bad operands for {op}: {exc}") from None


def _numbers(op, args) -> None:
    for a in args:
        if isinstance(a, bool) or not isinstance(a, (int, float)):
            raise EvalError(f"{op} expects numbers, got {to_text(a)}")


def _bind_query(engine, args, sit, env, depth, frame):
    var, form = args
    return _unify_once(var, evaluate(form), env)


def _lisp_query(engine, args, sit, env, depth, frame):
    if evaluate(args[0]) != FALSE:
        yield


_register("bind-eval", 2, 2, _bind_query, None)
_register("bind-lisp", 2, 2, _bind_query, None)
_register("lisp", 1, 1, _lisp_query, None)


def _make_comparison(name: str, fn: Callable) -> None:
    def query(engine, args, sit, env, depth, frame):
        a, b = evaluate(args[0]), evaluate(args[1])
        _numbers(name, [a, b])
        return _once() if fn(a, b) else _nothing()

    _register(name, 2, 2, query, None)


for _name in (">", "<", ">=", "=<"):
    _make_comparison(_name, _COMPARE[_name])


# -- situation utilities -----------------------------------------------------------

def _me_query(engine, args, sit, env, depth, frame):
    return _unify_once(args[0], sit.name, env)


def _clear_tell(engine, args, sit):
    store = engine.store
    for name in args:
        store.clear(store.resolve(sit, _param(name, "situation")))


_register("me", 1, 1, _me_query, None)
_register("clear", 1, None, _as_query(_clear_tell), _clear_tell)


# -- session commands ---------------------------------------------------------------

def _make_session_entry(name: str, min_args: int, max_args: Optional[int]) -> None:
    def tell(engine, args, sit):
        getattr(_session(engine, name), "cmd_" + name)(args, sit)

    _register(name, min_args, max_args, _as_query(tell), tell)


for _name, _lo, _hi in (("load", 1, 1), ("demo", 1, 1), ("printsit", 0, 1),
                        ("trace", 0, 1), ("duals", 0, 1), ("exit", 0, 0), ("run", 0, 0)):
    _make_session_entry(_name, _lo, _hi)
