import itertools

import pytest
from oracles import cheating_oracle, logicians_oracle, wisemen_oracle

from prosit import Engine, Verdict, read_one
from prosit.corpus import harness
from prosit.corpus.harness import (census_taker, check, coherence_rule, dialogue_reference,
                                   enumerate_hypotheses, load_fixture, oona, run_case,
                                   run_cheating_husbands, run_facing_logicians, run_three_wisemen,
                                   solve_knights_knaves, tell)
from prosit.reader import Param, to_text

FIXTURES = ["cicero", "census-taker", "oona", "three-wisemen", "cheating-husbands-1",
            "cheating-husbands-2", "cheating-husbands-3", "facing-logicians-4-3",
            "facing-logicians-1-2", "facing-logicians-2-1"]
PROVENANCE = ("published-answer", "published-transcript", "asserted", "derived:")


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_are_well_formed(name):
    rows = load_fixture(name)
    assert rows
    for row in rows:
        assert row.provenance.startswith(PROVENANCE), row
        assert isinstance(row.infon, tuple)


@pytest.mark.parametrize("name", ["cicero", "census-taker", "oona", "three-wisemen",
                                  "cheating-husbands:1", "cheating-husbands:2", "cheating-husbands:3",
                                  "facing-logicians:4,3", "facing-logicians:1,2", "facing-logicians:2,1",
                                  "facing-logicians:5,6"])
def test_puzzle_expectations_hold(name):
    engine, expected, _ = run_case(name)
    failed = [r.line() for r in check(engine, expected) if not r.passed]
    assert failed == []


@pytest.mark.parametrize("name", ["sphinx", "cicero:1", "cheating-husbands", "facing-logicians:3",
                                  "Census"])
def test_unknown_cases_rejected(name):
    with pytest.raises(ValueError):
        run_case(name)


def test_check_reports_missing_situation():
    row = harness.Expectation("nowhere", read_one("(p)"), Verdict.YES, "asserted")
    result = check(Engine(), [row])[0]
    assert not result.passed
    assert result.line() == "FAIL nowhere (p) expected=yes got=unknown"


# -- hypothetical worlds ------------------------------------------------------------

def island_engine():
    e = Engine()
    tell(e, "(!= island (native A))")
    return e, e.store.resolve(e.store.top, Param("island"))


def test_enumerate_hypotheses_cartesian_product():
    e, island = island_engine()
    worlds = enumerate_hypotheses(e, [("A", ["knight", "knave"]), ("B", ["x", "y", "z"])], island)
    assert [w.path for w in worlds] == [f"top/sit{i}" for i in range(1, 7)]
    assert worlds[0].infons == [read_one("(knight A)"), read_one("(x B)")]
    assert worlds[5].infons == [read_one("(knave A)"), read_one("(z B)")]
    for w in worlds:
        assert e.succeeds(read_one("(native A)"), w)
        assert e.store.has_link("@<", island, w)


def test_enumerate_hypotheses_rejects_empty_axis():
    e, island = island_engine()
    with pytest.raises(ValueError, match="no options"):
        enumerate_hypotheses(e, [("A", ["knight"]), ("B", [])], island)


def test_no_speakers_every_world_coherent():
    e, island = island_engine()
    reports = solve_knights_knaves(e, [("A", ["knight", "knave"])], [], island)
    assert [r.coherent for r in reports] == [True, True]


def test_coherence_rule_text():
    assert to_text(coherence_rule(["A", "B"])) == \
        "(<= (coherent) (means A *s1 *t1) (means B *s2 *t2) (and *t1 *t2))"


def test_census_taker_worlds():
    _, reports = census_taker()
    assert [r.coherent for r in reports] == [False, False, True, False]
    # sit1: a knight husband would be saying he is a knave
    assert reports[0].witness == read_one("(knight H)")
    assert reports[2].assumptions == [read_one("(knave H)"), read_one("(knight W)")]


def test_oona_single_world():
    _, reports = oona()
    good = [r for r in reports if r.coherent]
    assert len(reports) == 8 and len(good) == 1
    assert good[0].assumptions == [read_one("(knave A)"), read_one("(knave B)"),
                                   read_one("(not_on_island Oona)")]


# -- three wisemen -----------------------------------------------------------------------

HATS = [h for h in itertools.product(("red", "white"), repeat=3) if "white" in h]


@pytest.mark.parametrize("hats", HATS)
@pytest.mark.parametrize("order", list(itertools.permutations("abc")))
def test_wisemen_match_kripke_model(hats, order):
    _, transcript = run_three_wisemen(hats, order)
    assert transcript == wisemen_oracle(hats, order)


def test_wisemen_all_white():
    _, transcript = run_three_wisemen()
    assert transcript == [("a", False), ("b", False), ("c", True)]


@pytest.mark.parametrize("hats, order", [(("red", "red", "red"), "abc"), (("white", "blue", "red"), "abc"),
                                          (("white",) * 3, "aab")])
def test_wisemen_bad_input(hats, order):
    with pytest.raises(ValueError):
        run_three_wisemen(hats, order)


# -- cheating husbands -------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_cheating_husbands_match_model(n):
    session, log = run_cheating_husbands(n)
    night, shooters = cheating_oracle(tuple(i < n for i in range(3)))
    assert log[-1].night == night == n
    assert log[-1].shooters == ["abc"[i] for i in shooters]
    assert all(not entry.shooters for entry in log[:-1])
    e = session.engine
    for earlier in range(1, n):
        assert e.query_dual(read_one(f"(!= a (unfaithful a {earlier}))")).verdict is Verdict.UNKNOWN


@pytest.mark.parametrize("n", [0, 4])
def test_cheating_husbands_range(n):
    with pytest.raises(ValueError):
        run_cheating_husbands(n)


def test_cheating_husbands_night_limit():
    _, log = run_cheating_husbands(3, max_nights=2)
    assert [entry.shooters for entry in log] == [[], []]


# -- facing logicians --------------------------------------------------------------------

PAIRS = [(a, b) for a in range(1, 7) for b in (a - 1, a + 1) if 1 <= b <= 6]


@pytest.mark.parametrize("a, b", PAIRS)
def test_logicians_match_model(a, b):
    _, result = run_facing_logicians(a, b)
    assert (result.knower, result.turn, result.number) == logicians_oracle(a, b)
    assert dialogue_reference(a, b) == logicians_oracle(a, b)


@pytest.mark.parametrize("a, b", PAIRS)
def test_logicians_negative_facts_grow_monotonically(a, b):
    session, result = run_facing_logicians(a, b)
    common = session.engine.store.find_path("top/common")
    learned = [x for t in result.turns for x in t.learned]
    assert len(set(learned)) == len(learned)
    for fact in learned:
        assert fact in common.infons
        # the true numbers are never excluded
        assert fact[1] not in (read_one(f"(num a {a})"), read_one(f"(num b {b})"))


def test_logicians_four_three_transcript():
    _, result = run_facing_logicians(4, 3)
    assert [(t.speaker, t.knows, [to_text(x) for x in t.learned]) for t in result.turns] == [
        ("b", False, ["(no (num a 1))"]),
        ("a", False, ["(no (num b 1))", "(no (num b 2))"]),
        ("b", False, ["(no (num a 2))", "(no (num a 3))"]),
        ("a", True, []),
    ]


@pytest.mark.parametrize("a, b", [(1, 3), (2, 2), (0, 1)])
def test_logicians_need_consecutive_numbers(a, b):
    with pytest.raises(ValueError):
        run_facing_logicians(a, b)
