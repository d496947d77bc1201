from pathlib import Path

import pytest

from steerlab.classify import (MARGINAL, MARGINAL_IN_NORMAL, NON_MARGINAL,
                               OCCURRENCE_LEVEL, WORK, ActionModel,
                               Occurrence, classify_atom, classify_atoms,
                               classify_occurrences, detectability, load_model,
                               occurrence_states, parse_model)
from steerlab.errors import ParseError, UndeclaredAtom
from steerlab.pga import parse_iseq
from steerlab.valuation import ValuationClass as C, check_class, parse_machine

LADDER_FILE = Path(__file__).resolve().parents[1] / "demos" / "data" / "ladder.model"


@pytest.fixture
def ladder():
    return load_model(LADDER_FILE)


def test_ladder_file(ladder):
    assert ladder.classes == (frozenset({"s0", "s1"}), frozenset({"s2"}))
    assert ladder.normal is None
    assert ladder.equivalent("s1", "s0") and not ladder.equivalent("s0", "s2")


def test_ladder_rules(ladder):
    rep = classify_atoms(ladder)
    assert {a: str(v) for a, v in rep.per_atom.items()} == {
        "w": "work-atom(R1)", "p": "steering-atom(R2)",
        "m": "steering-atom(R3)", "o": "occurrence-level"}
    assert rep.steering_set == {"p", "m"}
    assert "R4 skipped" in rep.context


def test_constant_reply_wins_over_identity_effect():
    m = parse_machine("atoms a\nstates s0\ninit s0\nstep a s0 T s0\n")
    v = classify_atom(ActionModel.build(m), "a")
    assert (v.kind, v.rule) == (WORK, "R1")


def test_unreachable_states_are_ignored():
    # b would vary its reply only on the unreachable state s1
    m = parse_machine("""
atoms b
states s0 s1
init s0
step b s0 T s0
step b s1 F s0
""")
    assert classify_atom(ActionModel.build(m), "b").rule == "R1"


def test_normal_states_enable_r4(ladder):
    model = ActionModel.build(ladder.machine, [("s0", "s1")], normal={"s0", "s2"})
    assert str(classify_atom(model, "o")) == "steering-atom(R4)"
    assert "R4 skipped" not in classify_atoms(model).context


def test_undeclared_atom(ladder):
    with pytest.raises(UndeclaredAtom):
        classify_atom(ladder, "z")
    with pytest.raises(UndeclaredAtom):
        classify_occurrences(parse_iseq("+z;!"), ladder)
    with pytest.raises(UndeclaredAtom):
        detectability(ladder, "w", "z")


# --- occurrences ----------------------------------------------------------

def test_occurrence_numbering(ladder):
    occ = occurrence_states(parse_iseq("+(p && (o || p));w;-m;!"), ladder)
    assert sorted(occ) == [Occurrence(0, 0, "p"), Occurrence(0, 1, "o"),
                           Occurrence(0, 2, "p"), Occurrence(2, 0, "m")]


def test_occurrence_after_guard(ladder):
    # p answers T only in s0, so o runs only there and stays in class
    occ = classify_occurrences(parse_iseq("+(p && o);w;!"), ladder)
    v = occ[Occurrence(0, 1, "o")]
    assert v.verdict == MARGINAL and v.states == {"s0"}


def test_steering_atom_occurrences_are_marginal(ladder):
    occ = classify_occurrences(parse_iseq("w;+(m || p);-m;!;w;!"), ladder)
    for o, v in occ.items():
        assert v.verdict == MARGINAL, o


def test_never_executed_occurrence(ladder):
    occ = classify_occurrences(parse_iseq("!;+o;!"), ladder)
    v = occ[Occurrence(1, 0, "o")]
    assert v.verdict == MARGINAL and v.note == "never executed"
    assert v.states == frozenset()


def test_non_marginal_occurrence(ladder):
    occ = classify_occurrences(parse_iseq("w;+o;!"), ladder)
    v = occ[Occurrence(1, 0, "o")]
    assert v.verdict == NON_MARGINAL
    assert v.states == {"s1", "s2"}
    assert v.note == "leaves its class at s1"


def test_marginal_in_normal_occurrence(ladder):
    model = ActionModel.build(ladder.machine, [("s0", "s1")], normal={"s0", "s2"})
    v = classify_occurrences(parse_iseq("w;+o;!"), model)[Occurrence(1, 0, "o")]
    assert v.verdict == MARGINAL_IN_NORMAL


def test_occurrence_level_atoms_can_be_safe_everywhere_they_run(ladder):
    assert classify_atom(ladder, "o").kind == OCCURRENCE_LEVEL
    occ = classify_occurrences(parse_iseq("+o;!;!"), ladder)
    assert occ[Occurrence(0, 0, "o")].verdict == NON_MARGINAL  # started in s1
    occ = classify_occurrences(parse_iseq("+(p && o);!;!"), ladder)
    assert occ[Occurrence(0, 1, "o")].verdict == MARGINAL


# --- detectability --------------------------------------------------------

def test_detectable_side_effect(ladder):
    assert detectability(ladder, "w", "p") == (True, "s0")


def test_identity_effect_is_never_detectable(ladder):
    for b in ladder.machine.atoms:
        assert detectability(ladder, "p", b) == (False, None)


def test_contractive_self_detection():
    m = parse_machine("atoms a\nstates s0 s1\ninit s0\n"
                      "step a s0 T s1\nstep a s1 T s1\n")
    assert check_class(m, C.CONTRACTIVE) is None
    assert detectability(ActionModel.build(m), "a", "a") == (False, None)


# --- model files ----------------------------------------------------------

def test_model_parsing():
    text = LADDER_FILE.read_text() + "normal s0 s2\n"
    model = parse_model(text)
    assert model.normal == {"s0", "s2"}


@pytest.mark.parametrize("extra", ["equiv s0 s9\n", "normal s7\n"])
def test_model_errors(extra):
    with pytest.raises(ParseError):
        parse_model(LADDER_FILE.read_text() + extra)


def test_classes_must_partition(ladder):
    with pytest.raises(ValueError):
        ActionModel(ladder.machine, (frozenset({"s0", "s1"}), frozenset({"s1", "s2"})))
    with pytest.raises(ValueError):
        ActionModel(ladder.machine, (frozenset({"s0"}),))


def test_equiv_groups_are_transitive(ladder):
    model = ActionModel.build(ladder.machine, [("s0", "s1"), ("s1", "s2")])
    assert model.classes == (frozenset({"s0", "s1", "s2"}),)
    assert classify_atom(model, "o").rule == "R3"
