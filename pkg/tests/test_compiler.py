import itertools

import pytest
from hypothesis import given, settings

from steerlab.analysis import assignments
from steerlab.compiler import candidate_bodies, eliminate_nonatomic, minimize
from steerlab.errors import BudgetExceeded, NoneWithinBudget
from steerlab.pga import (Basic, Halt, InstrSeq, Jump, NegTest, PosTest,
                          equiv_iseq, exec_iseq, is_atomic_body, iseq_size, parse_iseq,
                          render_iseq, thread_extract)
from steerlab.prop import Atom, parse_prop, token_size
from steerlab.valuation import ValuationClass as C, ValuationMachine

from strategies import iseqs, props


def _atomic(s):
    return all(is_atomic_body(i.body) for i in s if isinstance(i, (PosTest, NegTest)))


# --- steering-point elimination -------------------------------------------

@pytest.mark.parametrize("text,expected", [
    ("+(a || b || c);u;!", "+a;#3;-b;+c;u;!"),
    ("-(a && b);c;!", "+a;-b;c;!"),
    ("+(~a);b;!", "-a;b;!"),
    ("+(a && a);b;!", "-a;#3;+a;b;!"),
])
def test_compile_examples(text, expected):
    s = parse_iseq(text)
    out = eliminate_nonatomic(s)
    assert render_iseq(out) == expected
    assert thread_extract(out) == thread_extract(s)


def test_atomic_input_is_returned_unchanged():
    s = parse_iseq("+a;#5;+b;#2;+c;u;!")
    assert eliminate_nonatomic(s) is s


@given(iseqs(atoms=("a", "b", "c"), max_len=5, bodies=props(max_leaves=6)))
@settings(max_examples=300)
def test_compilation_is_sound_atomic_and_idempotent(s):
    out = eliminate_nonatomic(s)
    assert _atomic(out)
    assert thread_extract(out) == thread_extract(s)
    assert eliminate_nonatomic(out) == out


@given(iseqs(atoms=("a", "b"), max_len=4, bodies=props(("a", "b"), 5)))
def test_compiled_jumps_stay_in_range(s):
    out = eliminate_nonatomic(s)
    if out is s:
        return
    for i, ins in enumerate(out):
        if isinstance(ins, Jump):
            assert 0 <= ins.k <= len(out) - i


def test_long_input():
    body = " && ".join("abcdefgh")
    s = parse_iseq(f"+({body});u;!")
    out = eliminate_nonatomic(s)
    assert _atomic(out) and thread_extract(out) == thread_extract(s)


# --- candidate bodies -----------------------------------------------------

def test_candidate_bodies_are_distinct_behaviours():
    bodies = candidate_bodies("ab", 4, False)
    assert Atom("a") in bodies
    assert all(token_size(p) <= 4 for p in bodies)
    assert len(bodies) == len({repr(p) for p in bodies})
    nonrep = candidate_bodies("ab", 4, True)
    assert set(nonrep) <= set(bodies)
    assert parse_prop("a && a") not in nonrep


# --- minimization ---------------------------------------------------------

def test_halt_is_already_minimal():
    assert render_iseq(minimize(parse_iseq("!"), C.FREE, "a", 1)) == "!"


def test_minimize_finds_smaller_static_sequence():
    s = parse_iseq("-a;!;-b;c;!")
    best = minimize(s, C.STATIC, "abc", 11)
    assert iseq_size(best) == 10
    assert equiv_iseq(best, s, C.STATIC).equivalent


def test_minimize_with_conditional_body():
    s = parse_iseq("+(b <| a |> c);!")
    stats = {}
    best = minimize(s, C.STATIC, "abc", 9, non_repetitive_only=True, stats=stats)
    assert render_iseq(best) == "+(b <| a |> c);!"
    assert stats["size"] == 9


def test_minimize_free_removes_dead_code():
    s = parse_iseq("a;#2;b;!")
    assert render_iseq(minimize(s, C.FREE, "ab", 5)) == "a;!"


def test_minimize_under_memorizing():
    # a second query of a is answered from memory, so the inner test folds
    s = parse_iseq("+a;+a;b;!")
    best = minimize(s, C.MEMORIZING, "ab", 9, max_states=2)
    assert iseq_size(best) < iseq_size(s)
    assert equiv_iseq(best, s, C.MEMORIZING, max_states=2).status.name \
        == "EQUIVALENT_UP_TO_BOUNDS"


def test_none_within_budget():
    with pytest.raises(NoneWithinBudget):
        minimize(parse_iseq("+(a && b);c;!"), C.STATIC, "abc", 9)


def test_budget_exceeded(monkeypatch):
    with pytest.raises(BudgetExceeded):
        minimize(parse_iseq("+(a && b);c;!"), C.STATIC, "abc", 10, cap=50)
    monkeypatch.setenv("STEERLAB_BUDGET", "50")
    with pytest.raises(BudgetExceeded):
        minimize(parse_iseq("+(a && b);c;!"), C.STATIC, "abc", 10)


# --- optimality against plain enumeration ---------------------------------

def _all_atomic_iseqs(alphabet, max_size):
    """Every sequence with atomic bodies and size <= max_size, unpruned."""
    for n in range(1, (max_size + 1) // 2 + 1):
        for pos_kinds in itertools.product("!jwpn", repeat=n):
            pools = []
            for i, kind in enumerate(pos_kinds):
                if kind == "!":
                    pools.append([Halt()])
                elif kind == "j":
                    pools.append([Jump(k) for k in range(n - i + 1)])
                elif kind == "w":
                    pools.append([Basic(a) for a in alphabet])
                elif kind == "p":
                    pools.append([PosTest(Atom(a)) for a in alphabet])
                else:
                    pools.append([NegTest(Atom(a)) for a in alphabet])
            for instrs in itertools.product(*pools):
                s = InstrSeq(instrs)
                if iseq_size(s) <= max_size:
                    yield s


def _brute_min_size(target, alphabet, max_size):
    t = thread_extract(target)
    sizes = [iseq_size(s) for s in _all_atomic_iseqs(alphabet, max_size)
             if thread_extract(s) == t]
    return min(sizes) if sizes else None


@pytest.mark.parametrize("text", [
    "+a;b;!", "-a;!;b;!", "a;+b;!;a;!", "+a;#2;b;!", "+a;!;#0", "a",
    "+a;+b;!;!", "b;-a;!;!",
])
def test_free_minimum_matches_brute_force(text):
    s = parse_iseq(text)
    expected = _brute_min_size(s, "ab", 7)
    if expected is None:
        with pytest.raises(NoneWithinBudget):
            minimize(s, C.FREE, "ab", 7, body_budget=1)
    else:
        assert iseq_size(minimize(s, C.FREE, "ab", 7, body_budget=1)) == expected


def _static_observations(s, alphabet):
    return [exec_iseq(s, ValuationMachine.constant(a)).observation
            for a in assignments(alphabet)]


@pytest.mark.parametrize("text", ["+a;b;!", "-a;+b;!;!", "a;+a;b;!;!", "+a;#3;+b;a;!"])
def test_static_minimum_matches_brute_force(text):
    s = parse_iseq(text)
    want = _static_observations(s, "ab")
    sizes = [iseq_size(c) for c in _all_atomic_iseqs("ab", 9)
             if _static_observations(c, "ab") == want]
    if not sizes:
        with pytest.raises(NoneWithinBudget):
            minimize(s, C.STATIC, "ab", 9, body_budget=1)
        return
    got = minimize(s, C.STATIC, "ab", 9, body_budget=1)
    assert iseq_size(got) == min(sizes)


def test_inverse_order_connective_compiles_by_its_own_semantics():
    left = parse_iseq("+(~a && (b || c));u;!")
    right = parse_iseq("+(~a && (b .|| c));u;!")
    for s in (left, right):
        assert thread_extract(eliminate_nonatomic(s)) == thread_extract(s)
    # the inverse-order disjunction asks c before b
    assert render_iseq(eliminate_nonatomic(right)).index("c") < \
        render_iseq(eliminate_nonatomic(right)).index("b")
    assert thread_extract(left) == thread_extract(parse_iseq("+a;#5;+b;#2;+c;u;!"))
    assert thread_extract(left) != thread_extract(right)
