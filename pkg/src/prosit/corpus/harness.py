"""Drivers for the puzzle programs and a table-driven checker.

Each driver runs a program in a fresh interpreter and records its results
in the situation ``answers``, so expected outcomes can be stated as
ordinary queries in the fixture files.
"""

from __future__ import annotations

import csv
import io
import itertools
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence, TextIO

from ..engine import Engine, Verdict
from ..errors import PrositError
from ..reader import Expression, Param, read_one, to_text
from ..repl import Session
from ..store import Situation

ANSWERS = Param("answers")


def program_path(name: str):
    return resources.files(__package__) / "programs" / name


def new_session(*programs: str, depth: Optional[int] = None) -> Session:
    engine = Engine() if depth is None else Engine(depth_limit=depth)
    session = Session(engine, out=io.StringIO(), err=io.StringIO(), batch=True)
    for name in programs:
        with resources.as_file(program_path(name)) as path:
            session.run_file(path)
        if session.errors:
            raise PrositError(f"{name}: {session.err.getvalue().strip()}")
    return session


def tell(engine: Engine, text: str, sit: Optional[Situation] = None) -> None:
    engine.tell(read_one(text), sit)


def record(engine: Engine, infon: Expression) -> None:
    engine.tell((Param("!="), ANSWERS, infon))


# -- expectations ------------------------------------------------------------------

@dataclass(frozen=True)
class Expectation:
    situation: str
    infon: Expression
    verdict: Verdict
    provenance: str


@dataclass
class CheckResult:
    expectation: Expectation
    got: Verdict

    @property
    def passed(self) -> bool:
        return self.got == self.expectation.verdict

    def line(self) -> str:
        e = self.expectation
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {e.situation} {to_text(e.infon)} "
                f"expected={e.verdict.value} got={self.got.value}")


def load_fixture(name: str) -> list[Expectation]:
    """Rows of ``fixtures/<name>.tsv``: situation, infon, verdict, provenance."""
    text = (resources.files(__package__) / "fixtures" / f"{name}.tsv").read_text()
    rows = []
    for row in csv.reader(io.StringIO(text), delimiter="\t"):
        if not row or row[0].startswith("#"):
            continue
        if len(row) != 4 or not row[3].strip():
            raise ValueError(f"fixture {name}: malformed row {row!r}")
        rows.append(Expectation(row[0], read_one(row[1]), Verdict(row[2]), row[3]))
    return rows


def fixture_exists(name: str) -> bool:
    return (resources.files(__package__) / "fixtures" / f"{name}.tsv").is_file()


def check(engine: Engine, expectations: Sequence[Expectation]) -> list[CheckResult]:
    out = []
    for e in expectations:
        sit = engine.store.find_path(e.situation)
        got = Verdict.UNKNOWN if sit is None else engine.query_dual(e.infon, sit).verdict
        out.append(CheckResult(e, got))
    return out


# -- hypothetical worlds ------------------------------------------------------------

def enumerate_hypotheses(engine: Engine, axes: Sequence[tuple[str, Sequence[str]]],
                         base: Situation, prefix: str = "sit") -> list[Situation]:
    """One world per combination of options, e.g. ``(knight H)``, inheriting from ``base``.

    Worlds are siblings of ``base`` named ``sit1``, ``sit2``, ... with the
    first axis varying slowest.
    """
    for name, options in axes:
        if not options:
            raise ValueError(f"axis {name!r} has no options")
    owner = base.owner or base
    worlds = []
    for i, combo in enumerate(itertools.product(*(opts for _, opts in axes)), 1):
        world = engine.store.child_situation(owner, Param(f"{prefix}{i}"))
        engine.tell((Param("@<"), base.name, world.name), owner)
        for (name, _), option in zip(axes, combo):
            engine.tell((Param(option), Param(name)), world)
        worlds.append(world)
    return worlds


def coherence_rule(speakers: Sequence[str]) -> Expression:
    """``(<= (coherent) (means P1 *s1 *t1) ... (and *t1 ...))`` for the given speakers."""
    if not speakers:
        return read_one("(<= (coherent) (true))")
    premises = [f"(means {p} *s{i} *t{i})" for i, p in enumerate(speakers, 1)]
    ts = " ".join(f"*t{i}" for i in range(1, len(speakers) + 1))
    return read_one(f"(<= (coherent) {' '.join(premises)} (and {ts}))")


@dataclass
class WorldReport:
    world: Situation
    assumptions: list[Expression]
    coherent: bool
    witness: Optional[Expression] = None


def solve_knights_knaves(engine: Engine, axes: Sequence[tuple[str, Sequence[str]]],
                         speakers: Sequence[str], island: Optional[Situation] = None,
                         ) -> list[WorldReport]:
    """Build every hypothetical world and test its coherence.

    In each world the translation of every utterance is asserted; the world
    is coherent when ``(coherent)`` holds and no infon is supported together
    with its dual.
    """
    store = engine.store
    island = island or store.resolve(store.top, Param("island"))
    tell(engine, f"(resp island {to_text(coherence_rule(speakers))})", island.owner)
    reports = []
    worlds = enumerate_hypotheses(engine, axes, island)
    combos = itertools.product(*(opts for _, opts in axes))
    for world, combo in zip(worlds, combos):
        assumptions = [(Param(opt), Param(name)) for (name, _), opt in zip(axes, combo)]
        for speaker in speakers:
            goal = (Param("means"), Param(speaker), read_one("*s"), read_one("*t"))
            for translation in [a["*t"] for a in engine.ask(goal, world)]:
                engine.tell(translation, world)
        witness = engine.check_incoherent(world)
        ok = witness is None and engine.succeeds(read_one("(coherent)"), world)
        reports.append(WorldReport(world, assumptions, ok, witness))
        verdict = (Param("coherent"), world.name)
        record(engine, verdict if ok else (Param("no"), verdict))
    return reports


def census_taker() -> tuple[Session, list[WorldReport]]:
    session = new_session("census-taker.pst")
    axes = [("H", ["knight", "knave"]), ("W", ["knight", "knave"])]
    return session, solve_knights_knaves(session.engine, axes, ["H"])


def oona() -> tuple[Session, list[WorldReport]]:
    session = new_session("oona.pst")
    axes = [("A", ["knight", "knave"]), ("B", ["knight", "knave"]),
            ("Oona", ["on_island", "not_on_island"])]
    return session, solve_knights_knaves(session.engine, axes, ["A", "B"])


def cicero() -> Session:
    return new_session("cicero.pst")


# -- three wisemen -------------------------------------------------------------------

WISEMEN = ("a", "b", "c")


def run_three_wisemen(hats: Sequence[str] = ("white", "white", "white"),
                      order: Sequence[str] = WISEMEN) -> tuple[Session, list[tuple[str, bool]]]:
    """Ask the wisemen in turn whether they know their hat color, until one does.

    Returns the session and ``(wiseman, knows)`` per turn.  Turn ``t``
    (from 0) is the time argument of ``know``; every "no" becomes common
    knowledge before the next question.
    """
    hats = tuple(hats)
    if len(hats) != 3 or any(h not in ("red", "white") for h in hats):
        raise ValueError("hats must be three of red/white")
    if "white" not in hats:
        raise ValueError("at least one hat must be white")
    if sorted(order) != sorted(WISEMEN):
        raise ValueError("order must be a permutation of a, b, c")
    session = new_session("three-wisemen.pst")
    engine = session.engine
    color = dict(zip(WISEMEN, hats))
    for x in WISEMEN:
        for y in WISEMEN:
            if x != y:
                tell(engine, f"(!= {x} (hat {y} {color[y]}))")
    transcript = []
    for t, x in enumerate(order):
        knows = engine.succeeds(read_one(f"(!= {x} (know {x} {t}))"))
        transcript.append((x, knows))
        if knows:
            # questioning ends here: nothing is learned from a "yes"
            record(engine, read_one(f"(knows {x} {t})"))
            break
        tell(engine, f"(!= w (no (!= {x} (know {x} {t}))))")
        record(engine, read_one(f"(no (knows {x} {t}))"))
    return session, transcript


# -- cheating husbands ------------------------------------------------------------------

WIVES = ("a", "b", "c")


@dataclass
class NightLog:
    night: int
    shooters: list[str] = field(default_factory=list)


def run_cheating_husbands(n: int, max_nights: Optional[int] = None) -> tuple[Session, list[NightLog]]:
    """Wives a..c, the first ``n`` of them cheated; nights run until a shot is fired."""
    if not 1 <= n <= len(WIVES):
        raise ValueError(f"number of unfaithful husbands must be 1..{len(WIVES)}, got {n}")
    session = new_session("cheating-husbands.pst")
    engine = session.engine
    character = {w: "unfaithful" if i < n else "faithful" for i, w in enumerate(WIVES)}
    log = []
    for night in range(1, (max_nights or len(WIVES) + 1) + 1):
        for w in WIVES:
            for other in WIVES:
                if other != w:
                    tell(engine, f"(!= {w} ({character[other]} {other} {night}))")
        entry = NightLog(night)
        for w in WIVES:
            if engine.succeeds(read_one(f"(!= {w} (unfaithful {w} {night}))")):
                entry.shooters.append(w)
        log.append(entry)
        for w in WIVES:
            shot = w in entry.shooters
            fact = read_one(f"(shot {w} {night})")
            record(engine, fact if shot else (Param("no"), fact))
        if entry.shooters:
            break
        for w in WIVES:
            tell(engine, f"(!= wives (no (!= {w} (faithful {w} {night}))))")
            tell(engine, f"(!= wives (no (!= {w} (unfaithful {w} {night}))))")
    return session, log


# -- facing logicians ----------------------------------------------------------------

@dataclass
class Turn:
    speaker: str
    knows: bool
    learned: list[Expression]


@dataclass
class DialogueResult:
    turns: list[Turn]
    knower: Optional[str] = None
    number: Optional[int] = None

    @property
    def turn(self) -> Optional[int]:
        return len(self.turns) if self.knower else None


def run_facing_logicians(a: int, b: int, max_turns: Optional[int] = None,
                         first: str = "b") -> tuple[Session, DialogueResult]:
    """Alternately ask the logicians (``first`` starts) until one knows his number."""
    if a < 1 or b < 1 or abs(a - b) != 1:
        raise ValueError(f"numbers must be consecutive positive integers, got {a}, {b}")
    session = new_session("facing-logicians.pst")
    engine = session.engine
    store = engine.store
    tell(engine, f"(!= a (num b {b}))")
    tell(engine, f"(!= b (num a {a}))")
    common = store.resolve(store.top, Param("common"))
    other = {"a": "b", "b": "a"}
    speaker = first
    result = DialogueResult([])
    for _ in range(max_turns or 2 * max(a, b) + 4):
        sit = store.resolve(store.top, Param(speaker))
        if engine.succeeds(read_one(f"(know {speaker})"), sit):
            found = [x for x in sit.infons if x[0] == Param("num") and x[1] == Param(speaker)]
            result.turns.append(Turn(speaker, True, []))
            result.knower = speaker
            result.number = found[-1][2] if found else None
            record(engine, read_one(f"(knows {speaker} {result.number})"))
            break
        tell(engine, f"(!= common (no (!= {speaker} (know {speaker}))))")
        listener = other[speaker]
        lsit = store.resolve(store.top, Param(listener))
        marker = len(common.infons)
        for _ in engine.ask(read_one(f"(no (know {listener}))"), lsit):
            pass
        learned = [x for x in common.infons[marker:]
                   if x[0] == Param("no") and x[1][0] == Param("num")]
        result.turns.append(Turn(speaker, False, learned))
        speaker = listener
    return session, result


def dialogue_reference(a: int, b: int, first: str = "b",
                       max_turns: Optional[int] = None) -> tuple[Optional[str], Optional[int], Optional[int]]:
    """Who first knows, at which turn (from 1), and the number; plain set reasoning.

    Worlds are consecutive pairs; an "I don't know" removes every world in
    which the speaker would have known.
    """
    bound = 3 * max(a, b) + 12
    worlds = {(x, y) for x in range(1, bound) for y in range(1, bound) if abs(x - y) == 1}
    speaker = first

    def options(world, who):
        x, y = world
        if who == "a":
            return {w for w in worlds if w[1] == y}
        return {w for w in worlds if w[0] == x}

    def knows(world, who):
        idx = 0 if who == "a" else 1
        return len({w[idx] for w in options(world, who)}) == 1

    for turn in range(1, (max_turns or 2 * max(a, b) + 4) + 1):
        if knows((a, b), speaker):
            return speaker, turn, a if speaker == "a" else b
        worlds = {w for w in worlds if not knows(w, speaker)}
        speaker = "a" if speaker == "b" else "b"
    return None, None, None


# -- command-line entry -----------------------------------------------------------

def _parse_name(name: str) -> tuple[str, list[int]]:
    m = re.fullmatch(r"([a-z-]+)(?::([0-9, ]+))?", name.strip())
    if not m:
        raise ValueError(f"bad puzzle name {name!r}")
    args = [int(x) for x in m.group(2).split(",")] if m.group(2) else []
    return m.group(1), args


PUZZLES = ("cicero", "census-taker", "oona", "three-wisemen",
           "cheating-husbands:<n>", "facing-logicians:<a>,<b>")


def run_case(name: str) -> tuple[Engine, list[Expectation], list[str]]:
    """Run puzzle ``name``; return its engine, expectations and narrative lines."""
    base, args = _parse_name(name)
    notes: list[str] = []
    if base == "cicero" and not args:
        session = cicero()
        fixture = "cicero"
    elif base in ("census-taker", "oona") and not args:
        session, reports = census_taker() if base == "census-taker" else oona()
        for r in reports:
            facts = " ".join(to_text(x) for x in r.assumptions)
            state = "coherent" if r.coherent else "incoherent"
            notes.append(f"{r.world.name.name}: {facts} {state}")
        fixture = base
    elif base == "three-wisemen" and not args:
        session, transcript = run_three_wisemen()
        notes += [f"{x}: {'yes' if k else 'no'}" for x, k in transcript]
        fixture = base
    elif base == "cheating-husbands" and len(args) == 1:
        session, log = run_cheating_husbands(args[0])
        for night in log:
            notes.append(f"night {night.night}: "
                         + (", ".join(night.shooters) + " shoot" if night.shooters else "silent"))
        fixture = f"{base}-{args[0]}"
    elif base == "facing-logicians" and len(args) == 2:
        session, result = run_facing_logicians(*args)
        for t in result.turns:
            said = "I know" if t.knows else "I don't know"
            learned = " ".join(to_text(x) for x in t.learned)
            notes.append(f"{t.speaker}: {said}" + (f"; common learns {learned}" if learned else ""))
        fixture = f"{base}-{args[0]}-{args[1]}"
        if not fixture_exists(fixture):
            knower, turn, number = dialogue_reference(*args)
            expected = [Expectation("answers", read_one(f"(knows {knower} {number})"),
                                    Verdict.YES, "derived: dialogue model")]
            return session.engine, expected, notes
    else:
        raise ValueError(f"unknown puzzle {name!r}; known: {', '.join(PUZZLES)}")
    return session.engine, load_fixture(fixture), notes


def run_puzzle(name: str, out: TextIO) -> int:
    engine, expected, notes = run_case(name)
    for line in notes:
        out.write(f"# {line}\n")
    results = check(engine, expected)
    for r in results:
        out.write(r.line() + "\n")
    passed = sum(r.passed for r in results)
    out.write(f"{name}: {passed}/{len(results)} passed\n")
    return 0 if passed == len(results) else 1
