import pytest
from hypothesis import given, settings

from steerlab.errors import ParseError
from steerlab.prop import (BINARY_CONNECTIVES, Atom, Cond, F, LeftAnd,
                           LeftBiimp, LeftImp, LeftOr, Leaf, Neg, Node,
                           RightAnd, RightImp, RightOr, T, atoms_of,
                           basic_form_to_prop, bf_depth, bf_paths, cp_rewrite,
                           depth, enumerate_props, expand, expansion_depth,
                           node_count, parse_prop, prop_to_basic_form,
                           render_basic_form, render_prop, rewrite_step_bound,
                           text_token_size, to_basic_form, token_size, tokenize)

from strategies import props


# --- parsing and rendering -------------------------------------------------

@pytest.mark.parametrize("text,expected", [
    ("a || b && c", LeftOr(Atom("a"), LeftAnd(Atom("b"), Atom("c")))),
    ("a && b && c", LeftAnd(LeftAnd(Atom("a"), Atom("b")), Atom("c"))),
    ("a => b => c", LeftImp(Atom("a"), LeftImp(Atom("b"), Atom("c")))),
    ("a .=> b", RightImp(Atom("a"), Atom("b"))),
    ("~a .&& b", RightAnd(Neg(Atom("a")), Atom("b"))),
    ("a <=> b <=> c", LeftBiimp(LeftBiimp(Atom("a"), Atom("b")), Atom("c"))),
    ("b <| a |> c", Cond(Atom("b"), Atom("a"), Atom("c"))),
    ("T <| a && b |> F", Cond(T, LeftAnd(Atom("a"), Atom("b")), F)),
    ("~~a", Neg(Neg(Atom("a")))),
    ("(a)", Atom("a")),
    ("x_1 .|| b", RightOr(Atom("x_1"), Atom("b"))),
])
def test_parse_examples(text, expected):
    assert parse_prop(text) == expected


def test_constants_need_a_word_boundary():
    assert parse_prop("T") == T
    with pytest.raises(ParseError):
        parse_prop("Tx")


@pytest.mark.parametrize("text", [
    "a &&", "(a", "a b", "a <| b", "a <| b |> c <| d |> e", "~", "&& a", "A",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_prop(text)


def test_parse_error_reports_position_and_expectation():
    with pytest.raises(ParseError) as info:
        parse_prop("a && (b")
    assert info.value.pos == 7
    assert ")" in info.value.expected


def test_nested_conditionals_need_parentheses():
    p = parse_prop("(a <| b |> c) <| d |> e")
    assert p == Cond(Cond(Atom("a"), Atom("b"), Atom("c")), Atom("d"), Atom("e"))
    assert render_prop(p) == "(a <| b |> c) <| d |> e"


@given(props())
def test_render_parse_round_trip(p):
    assert parse_prop(render_prop(p)) == p
    assert parse_prop(render_prop(p, full_parens=True)) == p


@given(props())
def test_render_is_a_fixpoint(p):
    text = render_prop(p)
    assert render_prop(parse_prop(text)) == text


def test_tokenizer_kinds():
    kinds = [k for k, _, _ in tokenize("~a .<=> (T <| b |> F)")]
    assert kinds == ["op", "name", "op", "op", "const", "op", "name", "op",
                     "const", "op"]


@pytest.mark.parametrize("text,size", [
    ("a", 1), ("a && b", 3), ("~a && b", 4), ("b <| a |> c", 4),
    ("~(a .=> b)", 6),
])
def test_token_size(text, size):
    assert token_size(parse_prop(text)) == size
    assert text_token_size(text) == size


def test_token_size_counts_the_minimal_rendering():
    assert text_token_size("(a && b) || c") == 7
    assert token_size(parse_prop("(a && b) || c")) == 5


# --- derived connectives --------------------------------------------------

def test_expansion_definitions():
    a, b = Atom("a"), Atom("b")
    assert expand(LeftAnd(a, b)) == Cond(b, a, F)
    assert expand(LeftOr(a, b)) == Cond(T, a, b)
    assert expand(RightAnd(a, b)) == Cond(a, b, F)
    assert expand(RightOr(a, b)) == Cond(T, b, a)
    assert expand(Neg(a)) == Cond(F, a, T)
    assert expand(LeftImp(a, b)) == Cond(T, Cond(F, a, T), b)


def test_expanded_terms_use_only_conditionals():
    for p in enumerate_props("ab", 4):
        stack = [expand(p)]
        while stack:
            q = stack.pop()
            assert not isinstance(q, Neg) and type(q) not in BINARY_CONNECTIVES
            if isinstance(q, Cond):
                stack.extend((q.then, q.cond, q.else_))


@given(props(max_leaves=6))
def test_expansion_growth_without_biimplication(p):
    if "<=>" in render_prop(p):
        return
    assert node_count(expand(p)) <= 4 * node_count(p)


def test_biimplication_chains_grow_faster():
    p = parse_prop("x <=> (y <=> (z <=> w))")
    assert node_count(expand(p)) > 4 * node_count(p)


def test_depth_helpers():
    p = parse_prop("~a && b")
    assert depth(p) == 2
    assert expansion_depth(p) == 2
    assert expansion_depth(Atom("a")) == 0


# --- basic forms ----------------------------------------------------------

def test_basic_form_of_conjunction():
    bf = to_basic_form(parse_prop("a && b"))
    assert bf == Node("a", Node("b", Leaf(True), Leaf(False)), Leaf(False))
    assert render_basic_form(bf) == "(T <| b |> F) <| a |> F"


def test_basic_form_of_conditional_identity_sides():
    left = to_basic_form(parse_prop("(a && b) || (~a && c)"))
    right = to_basic_form(parse_prop("b <| a |> c"))
    assert left != right
    # a is queried again on the paths where the first conjunct fails
    assert bf_depth(left) == 4
    assert bf_depth(right) == 2


def test_basic_form_prop_round_trip():
    for p in enumerate_props("ab", 4):
        bf = to_basic_form(p)
        assert prop_to_basic_form(basic_form_to_prop(bf)) == bf


def test_prop_to_basic_form_rejects_other_shapes():
    with pytest.raises(ValueError):
        prop_to_basic_form(parse_prop("a && b"))


def test_paths_are_then_first():
    bf = to_basic_form(parse_prop("a || b"))
    assert list(bf_paths(bf)) == [
        ((("a", True),), True),
        ((("a", False), ("b", True)), True),
        ((("a", False), ("b", False)), False),
    ]


@given(props(max_leaves=6))
@settings(max_examples=200)
def test_rewriting_agrees_with_substitution(p):
    bf, steps = cp_rewrite(p)
    assert bf == to_basic_form(p)
    assert steps <= rewrite_step_bound(expand(p))[0]


def test_rewrite_step_count_example():
    bf, steps = cp_rewrite(parse_prop("(a && b) || (~a && c)"))
    assert bf == to_basic_form(parse_prop("(a && b) || (~a && c)"))
    assert steps == 10


def test_rewriting_atom_in_branch_takes_one_step():
    assert cp_rewrite(Atom("a")) == (Node("a", Leaf(True), Leaf(False)), 1)
    assert cp_rewrite(T) == (Leaf(True), 0)


# --- enumeration ----------------------------------------------------------

def _count(n_leaves, max_size, n_binary=8):
    c = [0, n_leaves]
    for k in range(2, max_size + 1):
        total = c[k - 1]
        total += n_binary * sum(c[i] * c[k - 1 - i] for i in range(1, k - 1))
        total += sum(c[i] * c[j] * c[k - 1 - i - j]
                     for i in range(1, k) for j in range(1, k - i)
                     if k - 1 - i - j >= 1)
        c.append(total)
    return sum(c)


@pytest.mark.parametrize("atoms,size,expected", [
    ("ab", 5, 9812), ("abc", 5, 18650), ("a", 3, 81),
])
def test_enumeration_counts(atoms, size, expected):
    assert _count(len(atoms) + 2, size) == expected
    assert sum(1 for _ in enumerate_props(atoms, size)) == expected


def test_enumeration_is_duplicate_free_and_bounded():
    seen = set()
    for p in enumerate_props("ab", 4):
        assert node_count(p) <= 4
        assert atoms_of(p) <= {"a", "b"}
        seen.add(p)
    assert len(seen) == _count(4, 4)


def test_enumeration_restricted_connectives():
    out = list(enumerate_props("a", 3, constants=False, connectives=(Neg,)))
    assert out == [Atom("a"), Neg(Atom("a")), Neg(Neg(Atom("a")))]
