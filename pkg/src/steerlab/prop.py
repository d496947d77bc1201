"""Propositional statements with sequential connectives.

Terms are immutable dataclasses.  The ternary conditional ``Cond(x, y, z)``
is written ``x <| y |> z`` and evaluates its *middle* argument ``y`` first.
All other connectives are derived from it (see :func:`expand`).

Basic forms are conditional-only trees with an atom at every decision point
and booleans at the leaves; :func:`to_basic_form` computes them and
:func:`cp_rewrite` reaches the same result by stepwise leftmost-innermost
rewriting with the four conditional axioms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import ClassVar, Iterator, Optional, Sequence

from .errors import ParseError

ATOM_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")


# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------

class Prop:
    """Base class of propositional statements."""

    __slots__ = ()

    def __str__(self):
        return render_prop(self)


@dataclass(frozen=True, repr=False)
class Truth(Prop):
    def __repr__(self):
        return "T"


@dataclass(frozen=True, repr=False)
class Falsity(Prop):
    def __repr__(self):
        return "F"


@dataclass(frozen=True)
class Atom(Prop):
    name: str

    def __post_init__(self):
        if not ATOM_RE.match(self.name):
            raise ValueError(f"invalid atom name {self.name!r}")


@dataclass(frozen=True)
class Cond(Prop):
    """``then <| cond |> else_``"""

    then: Prop
    cond: Prop
    else_: Prop


@dataclass(frozen=True)
class Neg(Prop):
    arg: Prop


@dataclass(frozen=True)
class Binary(Prop):
    left: Prop
    right: Prop
    symbol: ClassVar[str] = "?"


class LeftAnd(Binary):
    symbol = "&&"


class LeftOr(Binary):
    symbol = "||"


class LeftImp(Binary):
    symbol = "=>"


class LeftBiimp(Binary):
    symbol = "<=>"


class RightAnd(Binary):
    symbol = ".&&"


class RightOr(Binary):
    symbol = ".||"


class RightImp(Binary):
    symbol = ".=>"


class RightBiimp(Binary):
    symbol = ".<=>"


T = Truth()
F = Falsity()

BINARY_CONNECTIVES = (LeftAnd, LeftOr, LeftImp, LeftBiimp,
                      RightAnd, RightOr, RightImp, RightBiimp)
_BY_SYMBOL = {c.symbol: c for c in BINARY_CONNECTIVES}


def atoms_of(p: Prop) -> frozenset:
    out = set()
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, Atom):
            out.add(q.name)
        elif isinstance(q, Cond):
            stack.extend((q.then, q.cond, q.else_))
        elif isinstance(q, Neg):
            stack.append(q.arg)
        elif isinstance(q, Binary):
            stack.extend((q.left, q.right))
    return frozenset(out)


def node_count(p: Prop) -> int:
    if isinstance(p, Cond):
        return 1 + node_count(p.then) + node_count(p.cond) + node_count(p.else_)
    if isinstance(p, Neg):
        return 1 + node_count(p.arg)
    if isinstance(p, Binary):
        return 1 + node_count(p.left) + node_count(p.right)
    return 1


def depth(p: Prop) -> int:
    """Syntactic nesting depth; constants and atoms have depth 0."""
    if isinstance(p, Cond):
        return 1 + max(depth(p.then), depth(p.cond), depth(p.else_))
    if isinstance(p, Neg):
        return 1 + depth(p.arg)
    if isinstance(p, Binary):
        return 1 + max(depth(p.left), depth(p.right))
    return 0


def expansion_depth(p: Prop) -> int:
    return depth(expand(p))


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op>\.<=>|<=>|\.&&|\.\|\||\.=>|&&|\|\||=>|<\||\|>|~|\(|\))
  | (?P<const>[TF](?![a-zA-Z0-9_]))
  | (?P<name>[a-z][a-zA-Z0-9_]*)
""", re.VERBOSE)


def tokenize(text: str) -> list:
    """Split ``text`` into ``(kind, value, pos)`` triples."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos,
                             text=text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(kind), pos))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        if self.i < len(self.tokens):
            return self.tokens[self.i][1]
        return None

    def pos(self):
        if self.i < len(self.tokens):
            return self.tokens[self.i][2]
        return len(self.text)

    def fail(self, expected):
        got = self.peek()
        what = "end of input" if got is None else repr(got)
        raise ParseError(f"unexpected {what}", self.pos(), expected, self.text)

    def expect(self, value):
        if self.peek() != value:
            self.fail({value})
        self.i += 1

    def parse(self) -> Prop:
        p = self.cond()
        if self.i != len(self.tokens):
            self.fail({"<|", "end of input"} | set(_BY_SYMBOL))
        return p

    def cond(self) -> Prop:
        then = self.biimp()
        if self.peek() != "<|":
            return then
        self.i += 1
        c = self.biimp()
        self.expect("|>")
        else_ = self.biimp()
        if self.peek() == "<|":
            # non-associative: nested conditionals need parentheses
            self.fail({")", "end of input"})
        return Cond(then, c, else_)

    def biimp(self) -> Prop:
        p = self.imp()
        while self.peek() in ("<=>", ".<=>"):
            op = _BY_SYMBOL[self.tokens[self.i][1]]
            self.i += 1
            p = op(p, self.imp())
        return p

    def imp(self) -> Prop:
        p = self.disj()
        if self.peek() in ("=>", ".=>"):
            op = _BY_SYMBOL[self.tokens[self.i][1]]
            self.i += 1
            return op(p, self.imp())
        return p

    def disj(self) -> Prop:
        p = self.conj()
        while self.peek() in ("||", ".||"):
            op = _BY_SYMBOL[self.tokens[self.i][1]]
            self.i += 1
            p = op(p, self.conj())
        return p

    def conj(self) -> Prop:
        p = self.unary()
        while self.peek() in ("&&", ".&&"):
            op = _BY_SYMBOL[self.tokens[self.i][1]]
            self.i += 1
            p = op(p, self.unary())
        return p

    def unary(self) -> Prop:
        if self.peek() == "~":
            self.i += 1
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> Prop:
        if self.i >= len(self.tokens):
            self.fail({"T", "F", "atom", "~", "("})
        kind, value, _ = self.tokens[self.i]
        if kind == "const":
            self.i += 1
            return T if value == "T" else F
        if kind == "name":
            self.i += 1
            return Atom(value)
        if value == "(":
            self.i += 1
            p = self.cond()
            self.expect(")")
            return p
        self.fail({"T", "F", "atom", "~", "("})


def parse_prop(text: str) -> Prop:
    """Parse the ASCII syntax, e.g. ``"~a && (b .|| c)"``."""
    return _Parser(text).parse()


# precedence levels, loosest first
_COND, _BIIMP, _IMP, _OR, _AND, _UNARY, _ATOM = range(7)
_LEVEL = {LeftBiimp: _BIIMP, RightBiimp: _BIIMP, LeftImp: _IMP, RightImp: _IMP,
          LeftOr: _OR, RightOr: _OR, LeftAnd: _AND, RightAnd: _AND}


def _level(p: Prop) -> int:
    if isinstance(p, Cond):
        return _COND
    if isinstance(p, Neg):
        return _UNARY
    if isinstance(p, Binary):
        return _LEVEL[type(p)]
    return _ATOM


def _wrap(p: Prop, needs: bool, full: bool) -> str:
    s = _render(p, full)
    if needs or (full and _level(p) != _ATOM):
        return "(" + s + ")"
    return s


def _render(p: Prop, full: bool) -> str:
    if isinstance(p, Truth):
        return "T"
    if isinstance(p, Falsity):
        return "F"
    if isinstance(p, Atom):
        return p.name
    if isinstance(p, Neg):
        return "~" + _wrap(p.arg, _level(p.arg) < _UNARY, full)
    if isinstance(p, Cond):
        parts = [_wrap(q, _level(q) == _COND, full)
                 for q in (p.then, p.cond, p.else_)]
        return f"{parts[0]} <| {parts[1]} |> {parts[2]}"
    lvl = _LEVEL[type(p)]
    if lvl == _IMP:
        left = _wrap(p.left, _level(p.left) <= lvl, full)
        right = _wrap(p.right, _level(p.right) < lvl, full)
    else:
        left = _wrap(p.left, _level(p.left) < lvl, full)
        right = _wrap(p.right, _level(p.right) <= lvl, full)
    return f"{left} {p.symbol} {right}"


def render_prop(p: Prop, full_parens: bool = False) -> str:
    """Render ``p`` with minimal parentheses (or fully parenthesized)."""
    return _render(p, full_parens)


def token_size(p: Prop) -> int:
    """Unit-cost size of the rendered form of ``p``.

    Every atom, constant, connective and parenthesis counts one; a
    conditional counts one for its pair of brackets ``<| |>``.
    """
    return text_token_size(render_prop(p))


def text_token_size(text: str) -> int:
    return sum(1 for _, v, _ in tokenize(text) if v != "|>")


# ---------------------------------------------------------------------------
# Derived connectives
# ---------------------------------------------------------------------------

def _neg(x: Prop) -> Prop:
    return Cond(F, x, T)


def expand(p: Prop) -> Prop:
    """Replace every derived connective by its conditional definition."""
    if isinstance(p, (Truth, Falsity, Atom)):
        return p
    if isinstance(p, Cond):
        return Cond(expand(p.then), expand(p.cond), expand(p.else_))
    if isinstance(p, Neg):
        return _neg(expand(p.arg))
    x, y = expand(p.left), expand(p.right)
    if isinstance(p, LeftAnd):
        return Cond(y, x, F)
    if isinstance(p, LeftOr):
        return Cond(T, x, y)
    if isinstance(p, LeftImp):
        return Cond(T, _neg(x), y)
    if isinstance(p, LeftBiimp):
        return Cond(y, x, _neg(y))
    if isinstance(p, RightAnd):
        return Cond(x, y, F)
    if isinstance(p, RightOr):
        return Cond(T, y, x)
    if isinstance(p, RightImp):
        return Cond(T, y, _neg(x))
    if isinstance(p, RightBiimp):
        return Cond(x, y, _neg(x))
    raise TypeError(f"not a Prop: {p!r}")


# ---------------------------------------------------------------------------
# Basic forms
# ---------------------------------------------------------------------------

class BasicForm:
    __slots__ = ()

    def __str__(self):
        return render_basic_form(self)


@dataclass(frozen=True)
class Leaf(BasicForm):
    value: bool

    def __repr__(self):
        return "Leaf(T)" if self.value else "Leaf(F)"


@dataclass(frozen=True)
class Node(BasicForm):
    atom: str
    then: BasicForm
    else_: BasicForm


TRUE_LEAF = Leaf(True)
FALSE_LEAF = Leaf(False)


def _substitute(c: BasicForm, x: BasicForm, z: BasicForm, memo: dict) -> BasicForm:
    """Plug ``x`` into the T-leaves and ``z`` into the F-leaves of ``c``."""
    if isinstance(c, Leaf):
        return x if c.value else z
    key = id(c)
    hit = memo.get(key)
    if hit is None:
        hit = Node(c.atom, _substitute(c.then, x, z, memo),
                   _substitute(c.else_, x, z, memo))
        memo[key] = hit
    return hit


def to_basic_form(p: Prop) -> BasicForm:
    """Normalize ``p`` to its basic form.

    Conditions are flattened by the distribution axiom
    ``x <| (y <| z |> u) |> v = (x <| y |> v) <| z |> (x <| u |> v)``,
    constant conditions are folded and branch atoms are lifted to
    ``T <| a |> F``.  The result equals the normal form of :func:`cp_rewrite`.
    """
    if isinstance(p, Truth):
        return TRUE_LEAF
    if isinstance(p, Falsity):
        return FALSE_LEAF
    if isinstance(p, Atom):
        return Node(p.name, TRUE_LEAF, FALSE_LEAF)
    if isinstance(p, Cond):
        return _substitute(to_basic_form(p.cond), to_basic_form(p.then),
                           to_basic_form(p.else_), {})
    return to_basic_form(_expand_top(p))


def _expand_top(p: Prop) -> Prop:
    if isinstance(p, Neg):
        return _neg(p.arg)
    x, y = p.left, p.right
    if isinstance(p, LeftAnd):
        return Cond(y, x, F)
    if isinstance(p, LeftOr):
        return Cond(T, x, y)
    if isinstance(p, LeftImp):
        return Cond(T, _neg(x), y)
    if isinstance(p, LeftBiimp):
        return Cond(y, x, _neg(y))
    if isinstance(p, RightAnd):
        return Cond(x, y, F)
    if isinstance(p, RightOr):
        return Cond(T, y, x)
    if isinstance(p, RightImp):
        return Cond(T, y, _neg(x))
    if isinstance(p, RightBiimp):
        return Cond(x, y, _neg(x))
    raise TypeError(f"not a Prop: {p!r}")


def basic_form_to_prop(bf: BasicForm) -> Prop:
    if isinstance(bf, Leaf):
        return T if bf.value else F
    return Cond(basic_form_to_prop(bf.then), Atom(bf.atom),
                basic_form_to_prop(bf.else_))


def prop_to_basic_form(p: Prop) -> BasicForm:
    """Inverse of :func:`basic_form_to_prop`; rejects non-basic shapes."""
    if isinstance(p, Truth):
        return TRUE_LEAF
    if isinstance(p, Falsity):
        return FALSE_LEAF
    if isinstance(p, Cond) and isinstance(p.cond, Atom):
        return Node(p.cond.name, prop_to_basic_form(p.then),
                    prop_to_basic_form(p.else_))
    raise ValueError(f"not a basic form: {render_prop(p)}")


def render_basic_form(bf: BasicForm) -> str:
    return render_prop(basic_form_to_prop(bf))


def bf_depth(bf: BasicForm) -> int:
    """Largest number of decision nodes on a root-to-leaf path."""
    if isinstance(bf, Leaf):
        return 0
    return 1 + max(bf_depth(bf.then), bf_depth(bf.else_))


def bf_paths(bf: BasicForm, prefix: tuple = ()) -> Iterator[tuple]:
    """Yield ``(path, leaf_value)`` for every root-to-leaf path, then-branch
    first; a path is a tuple of ``(atom, reply)`` pairs."""
    if isinstance(bf, Leaf):
        yield prefix, bf.value
        return
    yield from bf_paths(bf.then, prefix + ((bf.atom, True),))
    yield from bf_paths(bf.else_, prefix + ((bf.atom, False),))


def bf_atoms(bf: BasicForm) -> frozenset:
    if isinstance(bf, Leaf):
        return frozenset()
    return frozenset({bf.atom}) | bf_atoms(bf.then) | bf_atoms(bf.else_)


# ---------------------------------------------------------------------------
# Stepwise rewriting with the conditional axioms
# ---------------------------------------------------------------------------

def _step(t: Prop, in_cond: bool) -> Optional[Prop]:
    if isinstance(t, Atom):
        return None if in_cond else Cond(T, t, F)
    if not isinstance(t, Cond):
        return None
    r = _step(t.then, False)
    if r is not None:
        return Cond(r, t.cond, t.else_)
    r = _step(t.cond, True)
    if r is not None:
        return Cond(t.then, r, t.else_)
    r = _step(t.else_, False)
    if r is not None:
        return Cond(t.then, t.cond, r)
    c = t.cond
    if isinstance(c, Truth):
        return t.then
    if isinstance(c, Falsity):
        return t.else_
    if isinstance(c, Cond):
        return Cond(Cond(t.then, c.then, t.else_), c.cond,
                    Cond(t.then, c.else_, t.else_))
    return None


def rewrite_step_bound(t: Prop, in_cond: bool = False) -> tuple:
    """Upper bounds ``(steps, leaves)`` for :func:`cp_rewrite` on the
    conditional-only term ``t``."""
    if isinstance(t, (Truth, Falsity)):
        return 0, 1
    if isinstance(t, Atom):
        return (0 if in_cond else 1), 2
    if not isinstance(t, Cond):
        raise TypeError("bound is defined on conditional-only terms")
    sx, lx = rewrite_step_bound(t.then)
    sy, ly = rewrite_step_bound(t.cond, True)
    sz, lz = rewrite_step_bound(t.else_)
    return sx + sy + sz + 2 * ly, ly * max(lx, lz)


def cp_rewrite(p: Prop) -> tuple:
    """Rewrite ``expand(p)`` leftmost-innermost to normal form.

    Returns ``(basic_form, steps)``.  Raises ``RuntimeError`` if the step
    count exceeds :func:`rewrite_step_bound`.
    """
    t = expand(p)
    bound, _ = rewrite_step_bound(t)
    steps = 0
    while True:
        nxt = _step(t, False)
        if nxt is None:
            break
        t = nxt
        steps += 1
        if steps > bound:
            raise RuntimeError(f"rewriting exceeded its bound of {bound} steps")
    return prop_to_basic_form(t), steps


# ---------------------------------------------------------------------------
# Exhaustive enumeration
# ---------------------------------------------------------------------------

def enumerate_props(atoms: Sequence[str], max_size: int,
                    constants: bool = True,
                    connectives: Optional[Sequence[type]] = None) -> Iterator[Prop]:
    """Yield every Prop over ``atoms`` with at most ``max_size`` nodes.

    Order is deterministic: by node count, then by construction order
    (negation, binary connectives in declaration order, conditional).
    ``connectives`` restricts the constructors used; it may contain
    ``Neg``, ``Cond`` and any binary connective class.
    """
    if connectives is None:
        connectives = (Neg,) + BINARY_CONNECTIVES + (Cond,)
    leaves = ([T, F] if constants else []) + [Atom(a) for a in sorted(atoms)]
    binaries = [c for c in connectives if c in BINARY_CONNECTIVES]
    by_size: list = [[], leaves]
    yield from leaves
    for k in range(2, max_size + 1):
        level = []
        if Neg in connectives:
            level.extend(Neg(q) for q in by_size[k - 1])
        for op in binaries:
            for i in range(1, k - 1):
                for x in by_size[i]:
                    for y in by_size[k - 1 - i]:
                        level.append(op(x, y))
        if Cond in connectives:
            for i in range(1, k - 2):
                for j in range(1, k - 1 - i):
                    l = k - 1 - i - j
                    for x in by_size[i]:
                        for y in by_size[j]:
                            for z in by_size[l]:
                                level.append(Cond(x, y, z))
        by_size.append(level)
        yield from level
