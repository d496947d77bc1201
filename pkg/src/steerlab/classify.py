"""Which basic actions can serve as steering atoms.

An :class:`ActionModel` is a machine together with an equivalence on its
states (side effects inside one class are harmless) and optionally a set
of normal states.  Atoms are classified by a ladder of rules, first match
wins:

R1  constant reply on every reachable state: a work atom
R2  the atom never changes the state: steering
R3  the atom always stays inside the equivalence class: steering
R4  R3 holds on the reachable normal states: steering
otherwise the decision has to be made per occurrence in a program.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import ParseError, UndeclaredAtom
from .pga import Basic, Halt, InstrSeq, Jump, NegTest, PosTest, iseq_atoms
from .prop import Atom, Binary, Cond, Falsity, Neg, Truth
from .prop import (LeftAnd, LeftBiimp, LeftImp, LeftOr, RightAnd, RightBiimp,
                   RightImp, RightOr)
from .valuation import ValuationMachine, parse_machine


@dataclass(frozen=True)
class ActionModel:
    machine: ValuationMachine
    classes: tuple  # partition of the states into frozensets
    normal: Optional[frozenset] = None

    def __post_init__(self):
        seen = set()
        for cls in self.classes:
            if seen & cls:
                raise ValueError("equivalence classes overlap")
            seen |= cls
        if seen != set(self.machine.states):
            raise ValueError("equivalence classes must cover all states")
        if self.normal is not None and not self.normal <= set(self.machine.states):
            raise ValueError("normal states must be machine states")

    def class_of(self, state: str) -> frozenset:
        for cls in self.classes:
            if state in cls:
                return cls
        raise KeyError(state)

    def equivalent(self, s: str, t: str) -> bool:
        return t in self.class_of(s)

    @classmethod
    def build(cls, machine, equiv_pairs=(), normal=None) -> "ActionModel":
        """Model whose classes are generated by ``equiv_pairs`` groups."""
        parent = {s: s for s in machine.states}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for group in equiv_pairs:
            group = list(group)
            for s in group:
                if s not in parent:
                    raise ValueError(f"unknown state {s!r}")
            for s in group[1:]:
                parent[find(s)] = find(group[0])
        classes = {}
        for s in machine.states:
            classes.setdefault(find(s), set()).add(s)
        ordered = tuple(frozenset(c) for c in sorted(
            classes.values(), key=lambda c: machine.states.index(
                min(c, key=machine.states.index))))
        return cls(machine, ordered,
                   None if normal is None else frozenset(normal))


def parse_model(text: str) -> ActionModel:
    """Machine file plus ``equiv s t ...`` and ``normal s ...`` lines."""
    extra = {"equiv": [], "normal": []}
    m = parse_machine(text, extra)
    normal = None
    if extra["normal"]:
        normal = {s for args in extra["normal"] for s in args}
    try:
        return ActionModel.build(m, extra["equiv"], normal)
    except ValueError as exc:
        raise ParseError(str(exc), 0) from None


def load_model(path) -> ActionModel:
    with open(path) as fh:
        return parse_model(fh.read())


# ---------------------------------------------------------------------------
# Atom-level classification
# ---------------------------------------------------------------------------

WORK = "work-atom"
STEERING = "steering-atom"
OCCURRENCE_LEVEL = "occurrence-level"


@dataclass(frozen=True)
class AtomVerdict:
    kind: str
    rule: Optional[str] = None

    def __str__(self):
        return f"{self.kind}({self.rule})" if self.rule else self.kind


@dataclass(frozen=True)
class ClassificationReport:
    per_atom: dict
    steering_set: frozenset
    context: str = ""


def _preserves(model, a, states) -> bool:
    m = model.machine
    return all(model.equivalent(s, m.next(a, s)) for s in states)


def classify_atom(model: ActionModel, a: str) -> AtomVerdict:
    m = model.machine
    if a not in m.atoms:
        raise UndeclaredAtom(a)
    reach = m.reachable_states()
    if len({m.reply(a, s) for s in reach}) == 1:
        return AtomVerdict(WORK, "R1")
    if all(m.next(a, s) == s for s in reach):
        return AtomVerdict(STEERING, "R2")
    if _preserves(model, a, reach):
        return AtomVerdict(STEERING, "R3")
    if model.normal is not None and \
            _preserves(model, a, [s for s in reach if s in model.normal]):
        return AtomVerdict(STEERING, "R4")
    return AtomVerdict(OCCURRENCE_LEVEL)


def classify_atoms(model: ActionModel) -> ClassificationReport:
    per_atom = {a: classify_atom(model, a) for a in model.machine.atoms}
    steering = frozenset(a for a, v in per_atom.items() if v.kind == STEERING)
    context = "rules quantify over the states reachable from the initial state"
    if model.normal is None:
        context += "; no normal states given, R4 skipped"
    return ClassificationReport(per_atom, steering, context)


# ---------------------------------------------------------------------------
# Occurrence-level classification
# ---------------------------------------------------------------------------

MARGINAL = "marginal"
MARGINAL_IN_NORMAL = "marginal-in-normal"
NON_MARGINAL = "non-marginal"


@dataclass(frozen=True, order=True)
class Occurrence:
    instruction: int  # index in the instruction sequence
    index: int        # atom occurrence within the test body, left to right
    atom: str


@dataclass(frozen=True)
class OccurrenceVerdict:
    verdict: str
    states: frozenset
    note: str = ""


def _occurrence_count(p) -> int:
    if isinstance(p, Atom):
        return 1
    if isinstance(p, Cond):
        return sum(_occurrence_count(q) for q in (p.then, p.cond, p.else_))
    if isinstance(p, Neg):
        return _occurrence_count(p.arg)
    if isinstance(p, Binary):
        return _occurrence_count(p.left) + _occurrence_count(p.right)
    return 0


def _occurrences(p, out, base=0):
    if isinstance(p, Atom):
        out.append((base, p.name))
    elif isinstance(p, Cond):
        for q in (p.then, p.cond, p.else_):
            _occurrences(q, out, base)
            base += _occurrence_count(q)
    elif isinstance(p, Neg):
        _occurrences(p.arg, out, base)
    elif isinstance(p, Binary):
        _occurrences(p.left, out, base)
        _occurrences(p.right, out, base + _occurrence_count(p.left))
    return out


class _TaggedRun:
    """Direct evaluation that reports which occurrence runs in which state."""

    def __init__(self, m, state, instr, seen):
        self.m, self.state, self.instr, self.seen = m, state, instr, seen

    def atom(self, name, k):
        self.seen.setdefault((self.instr, k), set()).add(self.state)
        reply, self.state = self.m.step(name, self.state)
        return reply

    def eval(self, p, base=0) -> bool:
        if isinstance(p, Truth):
            return True
        if isinstance(p, Falsity):
            return False
        if isinstance(p, Atom):
            return self.atom(p.name, base)
        if isinstance(p, Cond):
            nt, nc = _occurrence_count(p.then), _occurrence_count(p.cond)
            if self.eval(p.cond, base + nt):
                return self.eval(p.then, base)
            return self.eval(p.else_, base + nt + nc)
        if isinstance(p, Neg):
            return not self.eval(p.arg, base)
        nl = _occurrence_count(p.left)
        x = lambda: self.eval(p.left, base)
        y = lambda: self.eval(p.right, base + nl)
        if isinstance(p, LeftAnd):
            return x() and y()
        if isinstance(p, LeftOr):
            return x() or y()
        if isinstance(p, LeftImp):
            return (not x()) or y()
        if isinstance(p, LeftBiimp):
            return x() == y()
        if isinstance(p, RightAnd):
            return y() and x()
        if isinstance(p, RightOr):
            return y() or x()
        if isinstance(p, RightImp):
            return y() or not x()
        if isinstance(p, RightBiimp):
            yv = y()
            return x() == yv
        raise TypeError(f"not a Prop: {p!r}")


def _visit_states(s: InstrSeq, m: ValuationMachine, start: str, seen: dict):
    st, pc, n = start, 0, len(s)
    while pc < n:
        ins = s[pc]
        if isinstance(ins, Halt) or (isinstance(ins, Jump) and ins.k == 0):
            return
        if isinstance(ins, Jump):
            pc += ins.k
        elif isinstance(ins, Basic):
            st = m.next(ins.atom, st)
            pc += 1
        else:
            run = _TaggedRun(m, st, pc, seen)
            value = run.eval(ins.body)
            st = run.state
            if isinstance(ins, NegTest):
                value = not value
            pc += 1 if value else 2


def occurrence_states(s: InstrSeq, model: ActionModel) -> dict:
    """Map every test-body occurrence to the states at which it executes,
    over runs started in each reachable state."""
    m = model.machine
    for a in sorted(iseq_atoms(s)):
        if a not in m.atoms:
            raise UndeclaredAtom(a)
    seen = {}
    for start in m.reachable_states():
        _visit_states(s, m, start, seen)
    out = {}
    for i, ins in enumerate(s):
        if isinstance(ins, (PosTest, NegTest)):
            for k, name in _occurrences(ins.body, []):
                out[Occurrence(i, k, name)] = frozenset(seen.get((i, k), ()))
    return out


def classify_occurrences(s: InstrSeq, model: ActionModel) -> dict:
    """Classify each atom occurrence in the tests of ``s``.

    Marginal: every state at which the occurrence executes is mapped into
    its own equivalence class.  MarginalInNormal: this holds at the normal
    states among them.  NonMarginal otherwise.
    """
    m = model.machine
    out = {}
    for occ, states in occurrence_states(s, model).items():
        if not states:
            out[occ] = OccurrenceVerdict(MARGINAL, states, "never executed")
            continue
        if _preserves(model, occ.atom, states):
            out[occ] = OccurrenceVerdict(MARGINAL, states)
        elif model.normal is not None and \
                _preserves(model, occ.atom, states & model.normal):
            out[occ] = OccurrenceVerdict(MARGINAL_IN_NORMAL, states)
        else:
            bad = sorted((t for t in states
                          if not model.equivalent(t, m.next(occ.atom, t))),
                         key=m.states.index)
            out[occ] = OccurrenceVerdict(NON_MARGINAL, states,
                                         f"leaves its class at {', '.join(bad)}")
    return out


def detectability(model: ActionModel, a: str, b: str) -> tuple:
    """Whether ``b`` can observe the side effect of ``a``.

    Returns ``(True, s)`` for the first reachable state ``s`` (in state
    order) where ``b`` answers differently after ``a``, else ``(False, None)``.
    """
    m = model.machine
    for name in (a, b):
        if name not in m.atoms:
            raise UndeclaredAtom(name)
    reach = set(m.reachable_states())
    for s in m.states:
        if s in reach and m.reply(b, m.next(a, s)) != m.reply(b, s):
            return True, s
    return False, None
