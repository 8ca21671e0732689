"""Query evaluation and assertion.

Queries are solved depth-first, left to right, in database order.  A
solution stream is a generator that yields once per solution, leaving the
solution's bindings in the shared :class:`BindingEnv`; on resumption it
undoes them and looks for the next one.
"""

from __future__ import annotations

import enum
import sys
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional, TextIO

from . import builtins
from .errors import AssertionBudgetExceeded, BuiltinError, DepthLimitExceeded
from .reader import Expression, Param, Var, to_text
from .store import Situation, SituationStore
from .terms import (BindingEnv, dual, fresh_scope, has_vars, head_name, normalize, rename,
                    substitute, v_unify, variables)

DEFAULT_DEPTH = 512
DEFAULT_BUDGET = 10_000


class Verdict(str, enum.Enum):
    YES = "yes"
    NO = "no"
    BOTH = "yes and no"
    UNKNOWN = "unknown"


@dataclass
class Answer:
    verdict: Verdict
    bindings: dict[str, Expression] = field(default_factory=dict)


class Frame:
    """Cut barrier: one per goal resolved against the database, and per query."""

    __slots__ = ("cut",)

    def __init__(self) -> None:
        self.cut = False


class Engine:
    def __init__(self, store: Optional[SituationStore] = None, *,
                 depth_limit: int = DEFAULT_DEPTH,
                 assertion_budget: int = DEFAULT_BUDGET,
                 trace: Optional[TextIO] = None):
        self.store = store if store is not None else SituationStore()
        self.depth_limit = depth_limit
        self.assertion_budget = assertion_budget
        self.trace_stream = trace
        self.session = None
        self._budget: Optional[int] = None
        # each depth level costs a handful of nested generator frames
        need = 8 * depth_limit + 2000
        if sys.getrecursionlimit() < need:
            sys.setrecursionlimit(need)

    # -- solving ---------------------------------------------------------------

    def solve(self, goal: Expression, sit: Situation, env: BindingEnv,
              depth: int = 0, frame: Optional[Frame] = None) -> Iterator[None]:
        if depth > self.depth_limit:
            raise DepthLimitExceeded(substitute(goal, env), self.depth_limit)
        goal = normalize(substitute(goal, env))
        if frame is None:
            frame = Frame()
        gen = self._dispatch(goal, sit, env, depth, frame)
        if self.trace_stream is not None:
            gen = self._traced(gen, goal, sit, env, depth)
        return gen

    def _dispatch(self, goal, sit, env, depth, frame) -> Iterator[None]:
        name = head_name(goal)
        if name is not None:
            entry = builtins.lookup(name)
            if entry is not None:
                return entry.run_query(self, goal, sit, env, depth, frame)
        if not isinstance(goal, (tuple, Var)):
            return iter(())
        return self.solve_database(goal, sit, env, depth)

    def solve_database(self, goal, sit, env, depth) -> Iterator[None]:
        """Match ``goal`` against explicit infons, then backward constraints."""
        store = self.store
        eq = store.equalities_for(sit)
        mark = env.mark()
        # ground goal without equalities: an explicit match is an exact duplicate
        exact = not eq and not has_vars(goal)
        try:
            for src in store.visible_sources(sit):
                nonground = src.nonground
                if exact:
                    if src.has_infon(goal):
                        yield
                    for fact in list(nonground):
                        if v_unify(goal, rename(fact, fresh_scope()), env, eq):
                            yield
                            env.undo(mark)
                    continue
                for fact in list(src.infons):
                    if nonground and fact in nonground:
                        fact = rename(fact, fresh_scope())
                    if v_unify(goal, fact, env, eq):
                        yield
                        env.undo(mark)
        finally:
            env.undo(mark)
        yield from self.solve_constraints(goal, sit, env, depth)

    def solve_constraints(self, goal, sit, env, depth) -> Iterator[None]:
        eq = self.store.equalities_for(sit)
        mark = env.mark()
        frame = Frame()
        try:
            for c in self.store.respected_constraints(sit):
                if not c.backward:
                    continue
                scope = fresh_scope()
                if not v_unify(goal, rename(c.trigger, scope), env, eq):
                    continue
                body = rename(c.body, scope)
                yield from self.solve_conj(body, sit, env, depth + 1, frame)
                env.undo(mark)
                if frame.cut:
                    return
        finally:
            env.undo(mark)

    def solve_conj(self, goals, sit, env, depth, frame) -> Iterator[None]:
        n = len(goals)
        if n == 0:
            yield
            return
        mark = env.mark()
        stack = [self.solve(goals[0], sit, env, depth, frame)]
        try:
            while stack:
                try:
                    next(stack[-1])
                except StopIteration:
                    stack.pop()
                    if frame.cut:
                        return
                    continue
                if len(stack) == n:
                    yield
                else:
                    stack.append(self.solve(goals[len(stack)], sit, env, depth, frame))
        finally:
            for g in reversed(stack):
                g.close()
            env.undo(mark)

    def _traced(self, gen, goal, sit, env, depth) -> Iterator[None]:
        out = self.trace_stream
        where = sit.name.name

        def emit(port: str, expr) -> None:
            out.write(f"{port} {depth} {where} {to_text(expr)}\n")

        emit("CALL", goal)
        while True:
            try:
                next(gen)
            except StopIteration:
                emit("FAIL", goal)
                return
            emit("EXIT", substitute(goal, env))
            yield
            emit("REDO", goal)

    # -- convenience queries --------------------------------------------------

    def ask(self, goal: Expression, sit: Optional[Situation] = None) -> Iterator[dict]:
        """Yield one answer dict (variable name -> value) per solution."""
        sit = sit or self.store.top
        env = BindingEnv()
        qvars = variables(goal)
        gen = self.solve(goal, sit, env, 0, Frame())
        try:
            for _ in gen:
                yield env.answer(qvars)
        finally:
            gen.close()
            env.undo(0)

    def succeeds(self, goal: Expression, sit: Optional[Situation] = None) -> bool:
        for _ in self.ask(goal, sit):
            return True
        return False

    def query_dual(self, goal: Expression, sit: Optional[Situation] = None) -> Answer:
        """Evaluate ``goal`` and its dual; map the pair onto a four-valued verdict."""
        sit = sit or self.store.top
        bindings = None
        for answer in self.ask(goal, sit):
            bindings = answer
            break
        positive = bindings is not None
        negative = self.succeeds(dual(normalize(goal)), sit)
        if positive and negative:
            verdict = Verdict.BOTH
        elif positive:
            verdict = Verdict.YES
        elif negative:
            verdict = Verdict.NO
        else:
            verdict = Verdict.UNKNOWN
        return Answer(verdict, bindings or {})

    def check_incoherent(self, sit: Optional[Situation] = None) -> Optional[Expression]:
        """An infon ``F`` such that ``sit`` supports both ``F`` and ``(no F)``, or None."""
        sit = sit or self.store.top
        for src in self.store.visible_sources(sit):
            if src.conflicts:
                return src.conflicts[0]
        for src in self.store.visible_sources(sit):
            for fact in list(src.infons):
                if fact in src.nonground:
                    continue
                if self.succeeds(dual(fact), sit):
                    if head_name(fact) == "no" and len(fact) == 2:
                        return fact[1]
                    return fact
        return None

    # -- assertion --------------------------------------------------------------

    def tell(self, form: Expression, sit: Optional[Situation] = None) -> None:
        """Assert ``form`` in ``sit``, dispatching system predicates."""
        sit = sit or self.store.top
        outermost = self._budget is None
        if outermost:
            self._budget = self.assertion_budget
        try:
            self._tell(normalize(form), sit)
        finally:
            if outermost:
                self._budget = None

    def _tell(self, form: Expression, sit: Situation) -> None:
        name = head_name(form)
        if name is not None:
            entry = builtins.lookup(name)
            if entry is not None:
                entry.run_assert(self, form, sit)
                return
        if not isinstance(form, tuple):
            raise BuiltinError(f"only lists can be asserted, not {to_text(form)}")
        self.assert_with_forward(sit, form)

    def assert_with_forward(self, sit: Situation, infon: Expression) -> bool:
        """Store ``infon`` unless it already holds, then fire forward constraints.

        Consequences are asserted breadth-first from a local agenda, so a
        runaway cascade hits the assertion budget instead of the stack.
        """
        if self._budget is None:
            self._budget = self.assertion_budget
            try:
                return self.assert_with_forward(sit, infon)
            finally:
                self._budget = None
        agenda = deque([(sit, infon)])
        added = None
        while agenda:
            s, x = agenda.popleft()
            ok = self._assert_one(s, x, agenda)
            if added is None:
                added = ok
        return bool(added)

    def _assert_one(self, sit: Situation, infon: Expression, agenda: deque) -> bool:
        if self.succeeds(infon, sit):
            return False
        if not self.store.add_infon(sit, infon):
            return False
        self._budget -= 1
        if self._budget < 0:
            raise AssertionBudgetExceeded(
                f"more than {self.assertion_budget} assertions while asserting {to_text(infon)}")
        heads = []
        for c in list(self.store.respected_constraints(sit)):
            if c.direction == "forward":
                env = BindingEnv()
                scope = fresh_scope()
                if v_unify(rename(c.trigger, scope), infon, env, self.store.equalities_for(sit)):
                    heads += [normalize(substitute(rename(h, scope), env)) for h in c.body]
            elif c.direction == "both":
                heads += self._both_ways_heads(c, infon, sit)
        for head in heads:
            name = head_name(head)
            if isinstance(head, tuple) and (name is None or builtins.lookup(name) is None):
                agenda.append((sit, head))
            else:
                self._tell(head, sit)
        return True

    def _both_ways_heads(self, c, infon, sit) -> list:
        """Heads of ``(<=> head p1 ... pn)`` made true by asserting ``infon``.

        ``infon`` may match any premise; the other premises are then queried.
        """
        heads = []
        for i in range(len(c.body)):
            scope = fresh_scope()
            env = BindingEnv()
            if not v_unify(rename(c.body[i], scope), infon, env, self.store.equalities_for(sit)):
                continue
            rest = rename(c.body[:i] + c.body[i + 1:], scope)
            head = rename(c.trigger, scope)
            gen = self.solve_conj(rest, sit, env, 1, Frame())
            try:
                for _ in gen:
                    h = normalize(substitute(head, env))
                    if h not in heads:
                        heads.append(h)
            finally:
                gen.close()
        return heads

    def bind_eval(self, var: Var, form: Expression, env: BindingEnv) -> bool:
        value = builtins.evaluate(substitute(form, env))
        return v_unify(var, value, env)


def situation_name(sit: Situation) -> Param:
    return sit.name
