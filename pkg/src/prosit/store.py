"""The situation tree and everything stored in it.

Each :class:`Situation` keeps its explicitly asserted infons, the
constraints it respects directly, the situations it inherits from
(``@<`` and ``<--`` links), the situations it describes as subchunks
(``[_`` links) and its parameter equalities.  Owner and subchunk
reflection are not materialized: ``(!= s i)`` is answered by resolving
``s`` from the querying situation and asking ``i`` there.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import BuiltinError, InconsistentEquality
from .reader import Expression, Param, to_text
from .terms import (BindingEnv, EqualityStore, fresh_scope, has_vars, head_name,
                    rename, v_unify)

TOP = Param("top")


@dataclass(eq=False)
class Constraint:
    direction: str  # 'forward', 'backward' or 'both'
    trigger: Expression
    body: tuple
    form: Expression
    home: "Situation"

    @property
    def forward(self) -> bool:
        return self.direction != "backward"

    @property
    def backward(self) -> bool:
        return self.direction != "forward"


_DIRECTIONS = {"<=": "backward", "=>": "forward", "<=>": "both"}


def is_constraint_form(form: Expression) -> bool:
    return head_name(form) in _DIRECTIONS


def make_constraint(form: Expression, home: "Situation") -> Constraint:
    name = head_name(form)
    if name not in _DIRECTIONS:
        raise BuiltinError(f"not a constraint: {to_text(form)}")
    if len(form) < 3:
        raise BuiltinError(f"constraint needs a trigger and a non-empty body: {to_text(form)}")
    return Constraint(_DIRECTIONS[name], form[1], tuple(form[2:]), form, home)


class Situation:
    __slots__ = ("name", "owner", "sid", "children", "infons", "_infon_set",
                 "nonground", "constraints", "sources", "subchunks",
                 "equalities", "relation_log", "conflicts")

    def __init__(self, name: Param, owner: Optional["Situation"], sid: int):
        self.name = name
        self.owner = owner
        self.sid = sid
        self.children: dict[Param, Situation] = {}
        self._reset()

    def _reset(self) -> None:
        self.children = {}
        self.infons: list[Expression] = []
        self._infon_set: set = set()
        self.nonground: set = set()
        self.constraints: list[Constraint] = []
        # (source, inherits_constraints): True for @<, False for <--
        self.sources: list[tuple[Situation, bool]] = []
        # situations this one describes via [_ (it is their superchunk)
        self.subchunks: list[Situation] = []
        self.equalities = EqualityStore()
        self.relation_log: list[Expression] = []
        self.conflicts: list[Expression] = []

    @property
    def path(self) -> str:
        parts = []
        s: Optional[Situation] = self
        while s is not None:
            parts.append(s.name.name)
            s = s.owner
        return "/".join(reversed(parts))

    def has_infon(self, infon: Expression) -> bool:
        return infon in self._infon_set

    def __repr__(self) -> str:
        return f"<Situation {self.path}>"


class SituationStore:
    """All situations of one interpreter, rooted at ``top``."""

    def __init__(self) -> None:
        self._next_id = 1
        self.top = Situation(TOP, None, 0)
        self.version = 0
        self._cache: dict = {}

    # -- tree ---------------------------------------------------------------

    def _touch(self) -> None:
        self.version += 1
        self._cache.clear()

    def child_situation(self, owner: Situation, name: Param) -> Situation:
        child = owner.children.get(name)
        if child is None:
            child = Situation(name, owner, self._next_id)
            self._next_id += 1
            owner.children[name] = child
            self._touch()
        return child

    def resolve(self, sit: Situation, name: Param, create: bool = True) -> Optional[Situation]:
        """The situation called ``name`` as described in ``sit``.

        That is a child of ``sit``, else a subchunk described by ``sit``;
        failing both, a new child (or ``None`` when ``create`` is false).
        """
        if name.name.lower() == "top":
            return self.top
        child = sit.children.get(name)
        if child is not None:
            return child
        for inner in sit.subchunks:
            if inner.name == name:
                return inner
        return self.child_situation(sit, name) if create else None

    def resolve_all(self, sit: Situation, name: Param) -> list[Situation]:
        """Every situation called ``name`` that ``sit`` describes, directly or by inheritance."""
        if name.name.lower() == "top":
            return [self.top]
        out: list[Situation] = []
        for src in self.visible_sources(sit):
            hit = self.resolve(src, name, create=False)
            if hit is not None and hit not in out:
                out.append(hit)
        return out

    def described(self, sit: Situation) -> list[Situation]:
        out: list[Situation] = []
        for src in self.visible_sources(sit):
            for s in list(src.children.values()) + src.subchunks:
                if s not in out:
                    out.append(s)
        return out

    def walk(self) -> Iterator[Situation]:
        stack = [self.top]
        while stack:
            s = stack.pop()
            yield s
            stack.extend(reversed(list(s.children.values())))

    def find_path(self, path: str) -> Optional[Situation]:
        """Look up ``'top/a/b'`` or ``'a/b'`` (relative to top) without creating."""
        parts = [p for p in path.split("/") if p]
        if parts and parts[0].lower() == "top":
            parts = parts[1:]
        s: Optional[Situation] = self.top
        for p in parts:
            s = self.resolve(s, Param(p), create=False)
            if s is None:
                return None
        return s

    # -- infons and constraints -------------------------------------------

    def add_infon(self, sit: Situation, infon: Expression) -> bool:
        if infon in sit._infon_set:
            return False
        sit.infons.append(infon)
        sit._infon_set.add(infon)
        if has_vars(infon):
            sit.nonground.add(infon)
        self._touch()
        return True

    def add_constraint(self, sit: Situation, form: Expression) -> bool:
        if any(c.form == form for c in sit.constraints):
            return False
        sit.constraints.append(make_constraint(form, sit))
        self._touch()
        return True

    def retract_matching(self, sit: Situation, pattern: Expression) -> int:
        eq = self.equalities_for(sit)
        keep, removed = [], 0
        for infon in sit.infons:
            env = BindingEnv()
            if v_unify(pattern, rename(infon, fresh_scope()), env, eq):
                removed += 1
                sit._infon_set.discard(infon)
                sit.nonground.discard(infon)
            else:
                keep.append(infon)
        sit.infons = keep
        if is_constraint_form(pattern):
            before = len(sit.constraints)
            sit.constraints = [c for c in sit.constraints
                               if not v_unify(pattern, rename(c.form, fresh_scope()), BindingEnv(), eq)]
            removed += before - len(sit.constraints)
        if removed:
            self._touch()
        return removed

    def clear(self, sit: Situation) -> None:
        """Retract every infon of ``sit``, equalities included.

        Constraints, links and sub-situations stay.
        """
        sit.infons = []
        sit._infon_set = set()
        sit.nonground = set()
        sit.equalities = EqualityStore()
        sit.conflicts = []
        self._touch()

    # -- relations between situations --------------------------------------

    def _link_source(self, src: Situation, dst: Situation, with_constraints: bool) -> bool:
        for i, (s, flag) in enumerate(dst.sources):
            if s is src:
                if with_constraints and not flag:
                    dst.sources[i] = (src, True)
                    self._touch()
                    return True
                return False
        dst.sources.append((src, with_constraints))
        self._touch()
        return True

    def subtype_link(self, sub: Situation, sup: Situation) -> bool:
        """``(@< sub sup)``: ``sup`` inherits the infons and constraints of ``sub``."""
        return self._link_source(sub, sup, True)

    def subsituation_link(self, sub: Situation, sup: Situation) -> bool:
        """``(<-- sub sup)``: ``sup`` inherits the infons of ``sub``."""
        return self._link_source(sub, sup, False)

    def subchunk_link(self, inner: Situation, outer: Situation) -> bool:
        """``([_ inner outer)``: ``outer`` totally describes ``inner``."""
        if inner in outer.subchunks:
            return False
        outer.subchunks.append(inner)
        self._touch()
        return True

    def has_link(self, kind: str, a: Situation, b: Situation) -> bool:
        if kind == "[_":
            return a in b.subchunks
        want = kind == "@<"
        return any(s is a and (flag or not want) for s, flag in b.sources)

    def log_relation(self, sit: Situation, form: Expression) -> None:
        if form not in sit.relation_log:
            sit.relation_log.append(form)
            self._touch()

    # -- equalities ---------------------------------------------------------

    def p_unify(self, sit: Situation, a: Expression, b: Expression) -> bool:
        """Identify ``a`` and ``b`` in ``sit``; False records a conflict."""
        try:
            sit.equalities.union(a, b)
        except InconsistentEquality:
            sit.conflicts.append((Param("="), a, b))
            self._touch()
            return False
        self._touch()
        return True

    def equalities_for(self, sit: Situation) -> EqualityStore:
        key = ("eq", sit.sid)
        eq = self._cache.get(key)
        if eq is None:
            stores = [s.equalities for s in self.visible_sources(sit) if s.equalities]
            if not stores:
                eq = sit.equalities
            elif len(stores) == 1:
                eq = stores[0]
            else:
                try:
                    eq = stores[0].merged_with(stores[1:])
                except InconsistentEquality:
                    eq = stores[0]
            self._cache[key] = eq
        return eq

    # -- visibility ----------------------------------------------------------

    def visible_sources(self, sit: Situation) -> list[Situation]:
        key = ("src", sit.sid)
        out = self._cache.get(key)
        if out is None:
            out, seen = [], set()

            def visit(s: Situation) -> None:
                if s.sid in seen:
                    return
                seen.add(s.sid)
                out.append(s)
                for src, _ in s.sources:
                    visit(src)

            visit(sit)
            self._cache[key] = out
        return out

    def respected_constraints(self, sit: Situation) -> list[Constraint]:
        key = ("con", sit.sid)
        out = self._cache.get(key)
        if out is None:
            out, seen = list(sit.constraints), {sit.sid}

            def visit(s: Situation) -> None:
                for src, with_constraints in s.sources:
                    if with_constraints and src.sid not in seen:
                        seen.add(src.sid)
                        out.extend(src.constraints)
                        visit(src)

            visit(sit)
            self._cache[key] = out
        return out

    # -- inspection ------------------------------------------------------------

    def printsit(self, sit: Situation) -> list[str]:
        lines = [to_text(i) for i in sit.infons]
        for members, value in sit.equalities.classes():
            first = members[0]
            lines.extend(to_text((Param("="), first, m)) for m in members[1:])
            if value is not None:
                lines.append(to_text((Param("="), first, value)))
        lines.extend(to_text(f) for f in sit.relation_log if head_name(f) not in ("<--", "<-"))
        lines.extend(to_text(c.form) for c in sit.constraints)
        return lines

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for s in self.walk():
            h.update(s.path.encode())
            for i in s.infons:
                h.update(b"I" + to_text(i).encode())
            for c in s.constraints:
                h.update(b"C" + to_text(c.form).encode())
            for src, flag in s.sources:
                h.update(b"S" + src.path.encode() + (b"+" if flag else b"-"))
            for inner in s.subchunks:
                h.update(b"K" + inner.path.encode())
            for members, value in s.equalities.classes():
                h.update(b"E" + " ".join(sorted(m.name for m in members)).encode()
                         + b"=" + (to_text(value).encode() if value is not None else b""))
            for f in s.relation_log:
                h.update(b"R" + to_text(f).encode())
            for f in s.conflicts:
                h.update(b"X" + to_text(f).encode())
        return h.hexdigest()
