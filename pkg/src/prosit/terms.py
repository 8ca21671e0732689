"""Term operations: substitution, V-unification and P-unification.

V-unification binds variables in a :class:`BindingEnv` and is undone by
rewinding its trail.  P-unification merges parameters in an
:class:`EqualityStore`; it is never undone by backtracking.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Optional

from .errors import InconsistentEquality
from .reader import Expression, Param, Var

_scopes = itertools.count(1)


def fresh_scope() -> int:
    return next(_scopes)


def head_name(e: Expression) -> Optional[str]:
    """Lower-cased relation name of a list whose head is a parameter."""
    if isinstance(e, tuple) and e and isinstance(e[0], Param):
        return e[0].name.lower()
    return None


NO = Param("no")


def normalize(e: Expression) -> Expression:
    """Collapse every ``(no (no F))`` into ``F``."""
    if not isinstance(e, tuple):
        return e
    while len(e) == 2 and head_name(e) == "no" and head_name(e[1]) == "no" and len(e[1]) == 2:
        e = e[1][1]
        if not isinstance(e, tuple):
            return e
    return tuple(normalize(x) for x in e)


def dual(e: Expression) -> Expression:
    if isinstance(e, tuple) and len(e) == 2 and head_name(e) == "no":
        return e[1]
    return (NO, e)


def has_vars(e: Expression) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, tuple):
        return any(has_vars(x) for x in e)
    return False


def rename(e: Expression, scope: int) -> Expression:
    """Copy of ``e`` with every variable moved into ``scope``."""
    if isinstance(e, Var):
        return Var(e.name, scope)
    if isinstance(e, tuple):
        return tuple(rename(x, scope) for x in e)
    return e


class BindingEnv:
    """Variable bindings with a trail for undo on backtracking."""

    __slots__ = ("bindings", "trail")

    def __init__(self) -> None:
        self.bindings: dict[Var, Expression] = {}
        self.trail: list[Var] = []

    def mark(self) -> int:
        return len(self.trail)

    def bind(self, var: Var, value: Expression) -> None:
        self.bindings[var] = value
        self.trail.append(var)

    def undo(self, mark: int) -> None:
        trail, bindings = self.trail, self.bindings
        while len(trail) > mark:
            del bindings[trail.pop()]

    def walk(self, t: Expression) -> Expression:
        bindings = self.bindings
        while isinstance(t, Var):
            v = bindings.get(t)
            if v is None:
                return t
            t = v
        return t

    def answer(self, variables: Iterable[Var]) -> dict[str, Expression]:
        """Substituted values of the given (source-level) variables."""
        out = {}
        for v in variables:
            val = substitute(v, self)
            if val != v:
                out[v.name] = val
        return out


def substitute(e: Expression, env: BindingEnv) -> Expression:
    e = env.walk(e)
    if isinstance(e, tuple):
        return tuple(substitute(x, env) for x in e)
    return e


def variables(e: Expression) -> list[Var]:
    """Distinct variables of ``e`` in order of first occurrence."""
    seen: dict[Var, None] = {}

    def visit(x):
        if isinstance(x, Var):
            seen.setdefault(x)
        elif isinstance(x, tuple):
            for y in x:
                visit(y)

    visit(e)
    return list(seen)


class EqualityStore:
    """Union-find over parameters; each class carries at most one constant."""

    __slots__ = ("parent", "values")

    def __init__(self) -> None:
        self.parent: dict[Param, Param] = {}
        self.values: dict[Param, Expression] = {}

    def __bool__(self) -> bool:
        return bool(self.parent)

    def find(self, p: Param) -> Param:
        parent = self.parent
        root = p
        while True:
            up = parent.get(root)
            if up is None or up == root:
                break
            root = up
        while p != root:
            up = parent.get(p, root)
            parent[p] = root
            p = up
        return root

    def resolve(self, p: Param) -> Optional[Expression]:
        """The constant identified with ``p``, if any."""
        if p not in self.parent:
            return None
        return self.values.get(self.find(p))

    def representative(self, e: Expression) -> Expression:
        if isinstance(e, Param) and e in self.parent:
            root = self.find(e)
            return self.values.get(root, root)
        return e

    def same(self, a: Expression, b: Expression) -> bool:
        if a == b:
            return True
        return self.representative(a) == self.representative(b)

    def union(self, a: Expression, b: Expression) -> None:
        """Merge the classes of ``a`` and ``b``.

        Raises :class:`InconsistentEquality` when that would identify two
        distinct constants; the store is left unchanged in that case.
        """
        if isinstance(a, Var) or isinstance(b, Var):
            raise TypeError("variables cannot be P-unified")
        if not isinstance(a, Param):
            a, b = b, a
        if not isinstance(a, Param):
            if a != b:
                raise InconsistentEquality(a, b)
            return
        ra = self._add(a)
        if isinstance(b, Param):
            rb = self._add(b)
            if ra == rb:
                return
            va, vb = self.values.get(ra), self.values.get(rb)
            if va is not None and vb is not None and va != vb:
                raise InconsistentEquality(va, vb)
            self.parent[rb] = ra
            if vb is not None:
                self.values[ra] = vb
                del self.values[rb]
        else:
            va = self.values.get(ra)
            if va is not None and va != b:
                raise InconsistentEquality(va, b)
            self.values[ra] = b

    def _add(self, p: Param) -> Param:
        if p not in self.parent:
            self.parent[p] = p
            return p
        return self.find(p)

    def classes(self) -> list[tuple[list[Param], Optional[Expression]]]:
        groups: dict[Param, list[Param]] = {}
        for p in self.parent:
            groups.setdefault(self.find(p), []).append(p)
        return [(members, self.values.get(root)) for root, members in groups.items()]

    def merged_with(self, others: Iterable["EqualityStore"]) -> "EqualityStore":
        out = EqualityStore()
        for store in itertools.chain((self,), others):
            for members, value in store.classes():
                first = members[0]
                for m in members[1:]:
                    out.union(first, m)
                if value is not None:
                    out.union(first, value)
        return out


def p_unify(a: Expression, b: Expression, eq: EqualityStore) -> EqualityStore:
    eq.union(a, b)
    return eq


def v_unify(a: Expression, b: Expression, env: BindingEnv,
            eq: Optional[EqualityStore] = None) -> bool:
    """Unify ``a`` with ``b``, extending ``env``.

    Parameters match when they are equal or P-unified in ``eq``.  On failure
    ``env`` is rewound to its state on entry.
    """
    mark = env.mark()
    stack = [(a, b)]
    walk = env.walk
    # pairs of lists already compared; keeps cyclic bindings from looping
    seen: set = set()
    while stack:
        x, y = stack.pop()
        x = walk(x)
        y = walk(y)
        if x is y:
            continue
        if isinstance(x, Var):
            if x != y:
                env.bind(x, y)
            continue
        if isinstance(y, Var):
            env.bind(y, x)
            continue
        if eq:
            if isinstance(x, Param):
                x = eq.representative(x)
            if isinstance(y, Param):
                y = eq.representative(y)
        if isinstance(x, tuple):
            if isinstance(y, tuple) and len(x) == len(y):
                key = (id(x), id(y))
                if key not in seen:
                    seen.add(key)
                    stack.extend(zip(x, y))
                continue
            env.undo(mark)
            return False
        if isinstance(y, tuple) or x != y:
            env.undo(mark)
            return False
    return True
