"""Single-pass instruction sequences with forward jumps.

Instructions: basic (work) actions ``a``, positive and negative tests
``+a``/``-a`` or ``+(φ)``/``-(φ)``, forward jumps ``#k`` and termination
``!``.  A positive test continues with the next instruction on T and skips
it on F; a negative test does the opposite.  ``#0`` and running past the
last instruction both mean deadlock.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import ParseError, UndeclaredAtom
from .prop import (ATOM_RE, Atom, BasicForm, Falsity, Leaf, Prop, Truth,
                   atoms_of, parse_prop, render_prop, to_basic_form, token_size)
from .analysis import Counterexample, EquivVerdict, Status, assignments
from .valuation import (ValuationClass, ValuationMachine, _Run,
                        generate_machines, path_machine)


class Instruction:
    __slots__ = ()

    def __str__(self):
        return render_instruction(self)


@dataclass(frozen=True)
class Basic(Instruction):
    atom: str


@dataclass(frozen=True)
class PosTest(Instruction):
    body: Prop


@dataclass(frozen=True)
class NegTest(Instruction):
    body: Prop


@dataclass(frozen=True)
class Jump(Instruction):
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("only forward jumps are supported")


@dataclass(frozen=True)
class Halt(Instruction):
    pass


@dataclass(frozen=True)
class InstrSeq:
    instructions: tuple

    def __post_init__(self):
        if not self.instructions:
            raise ValueError("an instruction sequence is nonempty")

    def __len__(self):
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def __getitem__(self, i):
        return self.instructions[i]

    def __str__(self):
        return render_iseq(self)


def is_atomic_body(p: Prop) -> bool:
    return isinstance(p, (Atom, Truth, Falsity))


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------

_JUMP_RE = re.compile(r"#(\d+)\Z")


def _split(text: str) -> list:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == ";" and depth == 0:
            parts.append((start, text[start:i]))
            start = i + 1
    parts.append((start, text[start:]))
    return parts


def _wrapped(text: str) -> bool:
    if not (text.startswith("(") and text.endswith(")")):
        return False
    depth = 0
    for i, ch in enumerate(text):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0 and i < len(text) - 1:
            return False
    return True


def parse_instruction(text: str, offset: int = 0) -> Instruction:
    raw = text
    text = text.strip()
    pos = offset + (len(raw) - len(raw.lstrip()))
    if not text:
        raise ParseError("empty instruction", pos,
                         {"!", "#k", "+atom", "-atom", "+(prop)", "-(prop)", "atom"})
    if text == "!":
        return Halt()
    m = _JUMP_RE.match(text)
    if m:
        return Jump(int(m.group(1)))
    if text[0] in "+-":
        body_text = text[1:].strip()
        try:
            body = parse_prop(body_text)
        except ParseError as exc:
            raise ParseError(f"bad test body: {exc}", pos + 1) from None
        if not is_atomic_body(body) and not _wrapped(body_text):
            raise ParseError("non-atomic test bodies must be parenthesized",
                             pos + 1, {"("})
        return PosTest(body) if text[0] == "+" else NegTest(body)
    if ATOM_RE.match(text):
        return Basic(text)
    raise ParseError(f"cannot read instruction {text!r}", pos,
                     {"!", "#k", "+", "-", "atom"})


def parse_iseq(text: str) -> InstrSeq:
    """Parse e.g. ``"+a;#5;+b;#2;+c;u;!"``."""
    return InstrSeq(tuple(parse_instruction(part, start)
                          for start, part in _split(text)))


def render_instruction(ins: Instruction) -> str:
    if isinstance(ins, Halt):
        return "!"
    if isinstance(ins, Jump):
        return f"#{ins.k}"
    if isinstance(ins, Basic):
        return ins.atom
    sign = "+" if isinstance(ins, PosTest) else "-"
    if is_atomic_body(ins.body):
        return sign + render_prop(ins.body)
    return f"{sign}({render_prop(ins.body)})"


def render_iseq(s: InstrSeq) -> str:
    return ";".join(render_instruction(i) for i in s)


def instruction_size(ins: Instruction) -> int:
    if isinstance(ins, (PosTest, NegTest)):
        extra = 0 if is_atomic_body(ins.body) else 2
        return 1 + token_size(ins.body) + extra
    return 1


def iseq_size(s: InstrSeq) -> int:
    """Unit-cost size: every atom, constant, connective, sign, ``;``,
    ``!``, parenthesis and jump counts one; a conditional counts one."""
    return sum(instruction_size(i) for i in s) + len(s) - 1


def iseq_atoms(s: InstrSeq) -> frozenset:
    out = set()
    for ins in s:
        if isinstance(ins, Basic):
            out.add(ins.atom)
        elif isinstance(ins, (PosTest, NegTest)):
            out |= atoms_of(ins.body)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Threads
# ---------------------------------------------------------------------------

class Thread:
    __slots__ = ()


class _Terminal(Thread):
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name

    def __hash__(self):
        return hash(self.name)


STOP = _Terminal("S")
DEAD = _Terminal("D")


class Branch(Thread):
    """Postconditional composition: perform ``action``, continue with
    ``pos`` on reply T and with ``neg`` on reply F."""

    __slots__ = ("action", "pos", "neg", "_hash")

    def __init__(self, action: str, pos: Thread, neg: Thread):
        self.action = action
        self.pos = pos
        self.neg = neg
        self._hash = hash((action, hash(pos), hash(neg)))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return threads_equal(self, other)

    def __repr__(self):
        return render_thread(self)


def Act(action: str, then: Thread) -> Branch:
    return Branch(action, then, then)


def threads_equal(x: Thread, y: Thread) -> bool:
    """Structural equality, linear in the size of the shared graphs."""
    done = set()
    stack = [(x, y)]
    while stack:
        a, b = stack.pop()
        if a is b or (id(a), id(b)) in done:
            continue
        if not (isinstance(a, Branch) and isinstance(b, Branch)):
            return False
        if a._hash != b._hash or a.action != b.action:
            return False
        done.add((id(a), id(b)))
        stack.append((a.pos, b.pos))
        stack.append((a.neg, b.neg))
    return True


def render_thread(t: Thread) -> str:
    if not isinstance(t, Branch):
        return t.name
    if t.pos is t.neg or threads_equal(t.pos, t.neg):
        return f"{t.action} o {_paren(t.pos)}"
    return f"{_paren(t.pos)} <| {t.action} |> {_paren(t.neg)}"


def _paren(t: Thread) -> str:
    s = render_thread(t)
    return f"({s})" if isinstance(t, Branch) else s


def thread_extract(s: InstrSeq) -> Thread:
    """Behaviour of ``s`` started at its first instruction."""
    instrs = s.instructions
    n = len(instrs)
    memo = {}

    def at(i: int) -> Thread:
        if i >= n:
            return DEAD
        hit = memo.get(i)
        if hit is not None:
            return hit
        ins = instrs[i]
        if isinstance(ins, Halt):
            t = STOP
        elif isinstance(ins, Jump):
            t = DEAD if ins.k == 0 else at(i + ins.k)
        elif isinstance(ins, Basic):
            t = Act(ins.atom, at(i + 1))
        else:
            on_true, on_false = at(i + 1), at(i + 2)
            if isinstance(ins, NegTest):
                on_true, on_false = on_false, on_true
            t = _graft(to_basic_form(ins.body), on_true, on_false, {})
        memo[i] = t
        return t

    # fill the memo back to front so recursion depth stays bounded
    for i in range(n - 1, -1, -1):
        at(i)
    return at(0)


def _graft(bf: BasicForm, on_true: Thread, on_false: Thread, memo: dict) -> Thread:
    if isinstance(bf, Leaf):
        return on_true if bf.value else on_false
    key = id(bf)
    hit = memo.get(key)
    if hit is None:
        hit = Branch(bf.atom, _graft(bf.then, on_true, on_false, memo),
                     _graft(bf.else_, on_true, on_false, memo))
        memo[key] = hit
    return hit


def thread_atoms(t: Thread) -> frozenset:
    out, seen, stack = set(), set(), [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Branch) and id(u) not in seen:
            seen.add(id(u))
            out.add(u.action)
            stack.extend((u.pos, u.neg))
    return frozenset(out)


# ---------------------------------------------------------------------------
# Running against a machine
# ---------------------------------------------------------------------------

TERMINATED = "terminated"
DEADLOCKED = "deadlocked"


@dataclass(frozen=True)
class RunRecord:
    trace: tuple  # of (atom, reply, is_work)
    outcome: str
    final_state: str

    @property
    def atom_sequence(self) -> tuple:
        return tuple(a for a, _, _ in self.trace)

    @property
    def observation(self) -> tuple:
        """Outcome and (atom, reply) sequence: what equivalence compares."""
        return self.outcome, tuple((a, r) for a, r, _ in self.trace)


def _declared(names: Iterable[str], m: ValuationMachine):
    for name in sorted(names):
        if name not in m.atoms:
            raise UndeclaredAtom(name)


def exec_iseq(s: InstrSeq, m: ValuationMachine, state: Optional[str] = None,
              max_steps: int = 1_000_000) -> RunRecord:
    """Run ``s`` instruction by instruction against ``m``.

    Work actions change the state and are marked ``is_work``; test bodies
    are evaluated with short-circuit semantics.
    """
    _declared(iseq_atoms(s), m)
    instrs = s.instructions
    st = m.init if state is None else state
    trace = []
    pc = 0
    for _ in range(max_steps):
        if pc >= len(instrs):
            return RunRecord(tuple(trace), DEADLOCKED, st)
        ins = instrs[pc]
        if isinstance(ins, Halt):
            return RunRecord(tuple(trace), TERMINATED, st)
        if isinstance(ins, Jump):
            if ins.k == 0:
                return RunRecord(tuple(trace), DEADLOCKED, st)
            pc += ins.k
        elif isinstance(ins, Basic):
            reply, st = m.step(ins.atom, st)
            trace.append((ins.atom, reply, True))
            pc += 1
        else:
            run = _Run(m, st)
            value = run.eval(ins.body)
            trace.extend((a, r, False) for a, _, r in run.steps)
            st = run.state
            if isinstance(ins, NegTest):
                value = not value
            pc += 1 if value else 2
    raise RuntimeError("step limit exceeded")  # unreachable for forward jumps


def walk_thread(t: Thread, m: ValuationMachine, state: Optional[str] = None) -> RunRecord:
    """Interpret a thread against ``m``; every action is recorded with its
    reply (threads do not distinguish work from tests)."""
    st = m.init if state is None else state
    trace = []
    while isinstance(t, Branch):
        reply, st = m.step(t.action, st)
        trace.append((t.action, reply, t.pos is t.neg))
        t = t.pos if reply else t.neg
    return RunRecord(tuple(trace), TERMINATED if t is STOP else DEADLOCKED, st)


# ---------------------------------------------------------------------------
# Equivalence of instruction sequences
# ---------------------------------------------------------------------------

def thread_divergence(x: Thread, y: Thread) -> Optional[tuple]:
    """Shortest reply path ``((atom, reply), ...)`` after which ``x`` and
    ``y`` differ, or None when they are equal."""
    frontier = [((), x, y)]
    seen = set()
    while frontier:
        nxt = []
        for path, a, b in frontier:
            if a is b or (id(a), id(b)) in seen:
                continue
            seen.add((id(a), id(b)))
            if not (isinstance(a, Branch) and isinstance(b, Branch)) \
                    or a.action != b.action:
                return path
            nxt.append((path + ((a.action, True),), a.pos, b.pos))
            nxt.append((path + ((a.action, False),), a.neg, b.neg))
        frontier = nxt
    return None


def equiv_iseq(x: InstrSeq, y: InstrSeq, cls: ValuationClass,
               max_states: int = 3, fuel: int = 12,
               cap: Optional[int] = None) -> EquivVerdict:
    """Compare two instruction sequences under valuation class ``cls``.

    Free: structural equality of the extracted threads (exact).  Static:
    runs on every truth assignment (exact).  Other classes: runs on every
    generated machine within the bounds, with work instructions resetting
    memorization.  Runs are equal when outcome and (atom, reply) sequence
    agree.
    """
    atoms = tuple(sorted(iseq_atoms(x) | iseq_atoms(y)))
    if cls is ValuationClass.FREE:
        tx, ty = thread_extract(x), thread_extract(y)
        path = thread_divergence(tx, ty)
        if path is None:
            return EquivVerdict(Status.EQUIVALENT, structurally_equal=True)
        m = path_machine(path, atoms)
        return EquivVerdict(Status.INEQUIVALENT, {"exact": True},
                            Counterexample(m, exec_iseq(x, m), exec_iseq(y, m)),
                            structurally_equal=False)
    if cls is ValuationClass.STATIC:
        machines = (ValuationMachine.constant(a) for a in assignments(atoms))
        bounds = {"exact": True}
    else:
        machines = generate_machines(atoms, max_states, cls, fuel,
                                     work_reset=True, cap=cap)
        bounds = {"max_states": max_states, "fuel": fuel}
    count = 0
    for m in machines:
        count += 1
        rx, ry = exec_iseq(x, m), exec_iseq(y, m)
        if rx.observation != ry.observation:
            return EquivVerdict(Status.INEQUIVALENT, {**bounds, "machines": count},
                                Counterexample(m, rx, ry))
    status = Status.EQUIVALENT if cls is ValuationClass.STATIC \
        else Status.EQUIVALENT_UP_TO_BOUNDS
    return EquivVerdict(status, {**bounds, "machines": count})
