"""Finite-state reactive valuations.

A :class:`ValuationMachine` answers each atom evaluation with a boolean
reply and moves to a successor state.  Evaluating a statement walks its
basic form against the machine and records an :class:`EvalTrace`.
"""

from __future__ import annotations

import enum
import functools
import itertools
import os
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import BudgetExceeded, ParseError, RetriesExhausted, UndeclaredAtom
from .prop import (ATOM_RE, Atom, BasicForm, Cond, Falsity, LeftAnd,
                   LeftBiimp, LeftImp, LeftOr, Neg, Node, Prop, RightAnd,
                   RightBiimp, RightImp, RightOr, Truth, atoms_of,
                   to_basic_form)

DEFAULT_BUDGET = 2_000_000


def default_budget() -> int:
    """Global candidate cap, overridable with ``STEERLAB_BUDGET``."""
    raw = os.environ.get("STEERLAB_BUDGET")
    if raw:
        value = int(raw)
        if value <= 0:
            raise ValueError("STEERLAB_BUDGET must be positive")
        return value
    return DEFAULT_BUDGET


class ValuationClass(enum.Enum):
    FREE = "free"
    REPETITION_PROOF = "repetition-proof"
    CONTRACTIVE = "contractive"
    WEAK_POS_MEMORIZING = "weak-pos-memorizing"
    WEAK_NEG_MEMORIZING = "weak-neg-memorizing"
    MEMORIZING = "memorizing"
    STATIC = "static"

    @classmethod
    def parse(cls, name: str) -> "ValuationClass":
        key = name.strip().lower().replace("_", "").replace("-", "")
        for c in cls:
            if c.value.replace("-", "") == key or _ALIASES.get(key) is c:
                return c
        raise ValueError(f"unknown valuation class {name!r}")


_ALIASES = {"rp": ValuationClass.REPETITION_PROOF,
            "weakpos": ValuationClass.WEAK_POS_MEMORIZING,
            "weakneg": ValuationClass.WEAK_NEG_MEMORIZING}


@dataclass(frozen=True)
class ValuationMachine:
    atoms: tuple
    states: tuple
    init: str
    table: Mapping  # (atom, state) -> (reply, next_state)

    def __post_init__(self):
        if not self.states:
            raise ValueError("a machine needs at least one state")
        if len(set(self.states)) != len(self.states):
            raise ValueError("duplicate state names")
        if len(set(self.atoms)) != len(self.atoms):
            raise ValueError("duplicate atom names")
        for a in self.atoms:
            if not ATOM_RE.match(a):
                raise ValueError(f"invalid atom name {a!r}")
        if self.init not in self.states:
            raise ValueError(f"init state {self.init!r} is not declared")
        states = set(self.states)
        for a in self.atoms:
            for s in self.states:
                if (a, s) not in self.table:
                    raise ValueError(f"missing step for atom {a} in state {s}")
                reply, nxt = self.table[(a, s)]
                if not isinstance(reply, bool):
                    raise ValueError("replies must be booleans")
                if nxt not in states:
                    raise ValueError(f"step {a} {s} leads to unknown state {nxt!r}")
        if len(self.table) != len(self.atoms) * len(self.states):
            raise ValueError("step table mentions undeclared atoms or states")

    def __hash__(self):
        return hash((self.atoms, self.states, self.init,
                     tuple(sorted(self.table.items()))))

    def step(self, atom: str, state: str) -> tuple:
        try:
            return self.table[(atom, state)]
        except KeyError:
            if atom not in self.atoms:
                raise UndeclaredAtom(atom) from None
            raise

    def reply(self, atom: str, state: str) -> bool:
        return self.step(atom, state)[0]

    def next(self, atom: str, state: str) -> str:
        return self.step(atom, state)[1]

    def reachable_states(self) -> tuple:
        """States reachable from ``init``, in breadth-first discovery order."""
        return tuple(_bfs_paths(self, [self.init]))

    @classmethod
    def constant(cls, assignment: Mapping[str, bool]) -> "ValuationMachine":
        """One-state (static) machine that answers ``assignment``."""
        atoms = tuple(sorted(assignment))
        table = {(a, "s0"): (bool(assignment[a]), "s0") for a in atoms}
        return cls(atoms, ("s0",), "s0", table)


def _bfs_paths(m: ValuationMachine, starts: Sequence[str]) -> dict:
    """Map each reachable state to a shortest step path from ``starts``."""
    paths = {s: () for s in starts}
    queue = deque(starts)
    while queue:
        s = queue.popleft()
        for a in m.atoms:
            reply, t = m.table[(a, s)]
            if t not in paths:
                paths[t] = paths[s] + ((a, s, reply),)
                queue.append(t)
    return paths


# ---------------------------------------------------------------------------
# Machine file format
# ---------------------------------------------------------------------------

def parse_machine(text: str, extra: Optional[dict] = None) -> ValuationMachine:
    """Parse the line-oriented machine format.

    Unknown directives are an error unless ``extra`` maps the directive name
    to a list that collects their argument lists (used for model files).
    """
    atoms = states = init = None
    table = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, *args = line.split()
        if word == "atoms":
            atoms = tuple(args)
        elif word == "states":
            states = tuple(args)
        elif word == "init":
            if len(args) != 1:
                raise ParseError("init takes exactly one state", lineno)
            init = args[0]
        elif word == "step":
            if len(args) != 4 or args[2] not in ("T", "F"):
                raise ParseError("expected: step ATOM STATE T|F NEXT", lineno)
            key = (args[0], args[1])
            if key in table:
                raise ParseError(f"duplicate step for {key[0]} {key[1]}", lineno)
            table[key] = (args[2] == "T", args[3])
        elif extra is not None and word in extra:
            extra[word].append(args)
        else:
            raise ParseError(f"unknown directive {word!r}", lineno,
                             {"atoms", "states", "init", "step"})
    if atoms is None or states is None or init is None:
        raise ParseError("machine needs atoms, states and init lines", 0)
    try:
        return ValuationMachine(atoms, states, init, table)
    except ValueError as exc:
        raise ParseError(str(exc), 0) from None


def render_machine(m: ValuationMachine) -> str:
    lines = ["atoms " + " ".join(m.atoms), "states " + " ".join(m.states),
             f"init {m.init}"]
    for a in m.atoms:
        for s in m.states:
            reply, nxt = m.table[(a, s)]
            lines.append(f"step {a} {s} {'T' if reply else 'F'} {nxt}")
    return "\n".join(lines) + "\n"


def load_machine(path) -> ValuationMachine:
    with open(path) as fh:
        return parse_machine(fh.read())


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalTrace:
    steps: tuple  # of (atom, state_before, reply)
    result: bool
    reply_stable: bool
    final_state: str

    @property
    def atom_sequence(self) -> tuple:
        return tuple(a for a, _, _ in self.steps)

    @property
    def observation(self) -> tuple:
        """What an observer of the run sees: atoms with replies, and result."""
        return tuple((a, r) for a, _, r in self.steps), self.result


def is_reply_stable(steps: Iterable[tuple]) -> bool:
    seen = {}
    for atom, _, reply in steps:
        if seen.setdefault(atom, reply) != reply:
            return False
    return True


def _check_declared(names: Iterable[str], m: ValuationMachine):
    declared = set(m.atoms)
    for name in sorted(names):
        if name not in declared:
            raise UndeclaredAtom(name)


def evaluate_basic_form(bf: BasicForm, m: ValuationMachine,
                        state: Optional[str] = None) -> EvalTrace:
    s = m.init if state is None else state
    steps = []
    while isinstance(bf, Node):
        reply, nxt = m.step(bf.atom, s)
        steps.append((bf.atom, s, reply))
        s = nxt
        bf = bf.then if reply else bf.else_
    return EvalTrace(tuple(steps), bf.value, is_reply_stable(steps), s)


def evaluate(p: Prop, m: ValuationMachine, state: Optional[str] = None) -> EvalTrace:
    """Short-circuit evaluation of ``p`` by walking its basic form."""
    _check_declared(atoms_of(p), m)
    return evaluate_basic_form(to_basic_form(p), m, state)


class _Run:
    __slots__ = ("m", "state", "steps")

    def __init__(self, m, state):
        self.m = m
        self.state = state
        self.steps = []

    def atom(self, name):
        reply, nxt = self.m.step(name, self.state)
        self.steps.append((name, self.state, reply))
        self.state = nxt
        return reply

    def eval(self, p) -> bool:
        if isinstance(p, Truth):
            return True
        if isinstance(p, Falsity):
            return False
        if isinstance(p, Atom):
            return self.atom(p.name)
        if isinstance(p, Cond):
            return self.eval(p.then) if self.eval(p.cond) else self.eval(p.else_)
        if isinstance(p, Neg):
            return not self.eval(p.arg)
        x, y = p.left, p.right
        if isinstance(p, LeftAnd):
            return self.eval(x) and self.eval(y)
        if isinstance(p, LeftOr):
            return self.eval(x) or self.eval(y)
        if isinstance(p, LeftImp):
            return (not self.eval(x)) or self.eval(y)
        if isinstance(p, LeftBiimp):
            return self.eval(x) == self.eval(y)
        if isinstance(p, RightAnd):
            return self.eval(y) and self.eval(x)
        if isinstance(p, RightOr):
            return self.eval(y) or self.eval(x)
        if isinstance(p, RightImp):
            return self.eval(y) or not self.eval(x)
        if isinstance(p, RightBiimp):
            return self.eval(y) == self.eval(x)
        raise TypeError(f"not a Prop: {p!r}")


def interpret(p: Prop, m: ValuationMachine, state: Optional[str] = None) -> EvalTrace:
    """Evaluate ``p`` directly on its syntax tree, without normalizing.

    This is the reference semantics of the sequential connectives and is
    kept independent of :func:`evaluate`.
    """
    _check_declared(atoms_of(p), m)
    run = _Run(m, m.init if state is None else state)
    result = run.eval(p)
    return EvalTrace(tuple(run.steps), result, is_reply_stable(run.steps),
                     run.state)


@dataclass(frozen=True)
class RetryOutcome:
    result: bool
    attempts: int
    traces: tuple


def evaluate_with_retry(p: Prop, m: ValuationMachine, max_retries: int) -> RetryOutcome:
    """Re-evaluate ``p`` from the current state until a reply-stable run.

    Raises :class:`RetriesExhausted` after ``max_retries`` re-evaluations.
    """
    if max_retries < 0:
        raise ValueError("max_retries must be nonnegative")
    _check_declared(atoms_of(p), m)
    bf = to_basic_form(p)
    traces = []
    state = m.init
    for attempt in range(max_retries + 1):
        trace = evaluate_basic_form(bf, m, state)
        traces.append(trace)
        if trace.reply_stable:
            return RetryOutcome(trace.result, attempt + 1, tuple(traces))
        state = trace.final_state
    raise RetriesExhausted(traces)


def path_machine(path: Sequence[tuple], atoms: Iterable[str] = ()) -> ValuationMachine:
    """Free machine that drives evaluation along ``path``.

    ``path`` is a sequence of ``(atom, reply)`` pairs; a final pair may
    carry ``None`` as reply (the atom is evaluated but its branch is
    irrelevant).  State ``s{i}`` answers the i-th path atom with the path's
    reply and moves on; every other query is answered F without moving.
    """
    names = sorted(set(atoms) | {a for a, _ in path})
    k = len(path)
    states = tuple(f"s{i}" for i in range(k + 1))
    table = {}
    for i, s in enumerate(states):
        for a in names:
            table[(a, s)] = (False, s)
        if i < k:
            atom, reply = path[i]
            table[(atom, s)] = (bool(reply), states[i + 1])
    return ValuationMachine(tuple(names), states, "s0", table)


# ---------------------------------------------------------------------------
# Valuation classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassViolation:
    cls: ValuationClass
    steps: tuple  # witness: (atom, state_before, reply) from init
    reason: str

    @property
    def atom_sequence(self) -> tuple:
        return tuple(a for a, _, _ in self.steps)


def check_class(m: ValuationMachine, cls: ValuationClass, fuel: int = 12,
                work_reset: bool = False) -> Optional[ClassViolation]:
    """Return ``None`` if ``m`` belongs to ``cls``, else a witness.

    Static, contractive and repetition-proof constraints are checked exactly
    over all reachable states.  The memorizing classes are trace properties
    and are checked over all atom sequences of length at most ``fuel``.
    With ``work_reset`` the memory of earlier replies is also cleared by work
    actions, so the trace check starts afresh from every reachable state.
    """
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    if cls is ValuationClass.FREE:
        return None
    paths = _bfs_paths(m, [m.init])
    if cls is ValuationClass.STATIC:
        for s, path in paths.items():
            for a in m.atoms:
                reply, t = m.table[(a, s)]
                if t != s:
                    return ClassViolation(cls, path + ((a, s, reply),),
                                          f"{a} changes state {s} to {t}")
        return None
    if cls in (ValuationClass.REPETITION_PROOF, ValuationClass.CONTRACTIVE):
        for s, path in paths.items():
            for a in m.atoms:
                r1, t1 = m.table[(a, s)]
                r2, t2 = m.table[(a, t1)]
                witness = path + ((a, s, r1), (a, t1, r2))
                if r1 != r2:
                    return ClassViolation(cls, witness,
                                          f"repeated {a} replies differently")
                if cls is ValuationClass.CONTRACTIVE and t2 != t1:
                    return ClassViolation(cls, witness,
                                          f"repeated {a} changes the state")
        return None
    starts = list(paths) if work_reset else [m.init]
    for s in starts:
        found = _trace_check(m, cls, fuel, s)
        if found is not None:
            steps, reason = found
            return ClassViolation(cls, paths[s] + steps, reason)
    return None


def _trace_check(m, cls, fuel, start):
    memorizing = cls is ValuationClass.MEMORIZING
    if cls is ValuationClass.WEAK_POS_MEMORIZING:
        keep = True
    elif cls is ValuationClass.WEAK_NEG_MEMORIZING:
        keep = False
    elif not memorizing:
        raise ValueError(f"unsupported class {cls}")
    root = (start, frozenset())
    parent = {root: None}
    frontier = [root]
    for _ in range(fuel):
        nxt_frontier = []
        for config in frontier:
            s, memo = config
            known = dict(memo)
            for a in m.atoms:
                reply, t = m.table[(a, s)]
                if a in known:
                    bad = None
                    if memorizing:
                        if known[a] != reply:
                            bad = f"{a} changed its memorized reply"
                        elif t != s:
                            bad = f"repeated {a} changed the state"
                    elif reply != keep:
                        bad = f"{a} lost its {'positive' if keep else 'negative'} reply"
                    if bad is not None:
                        return _unwind(parent, config) + ((a, s, reply),), bad
                    if memorizing:
                        child = config
                    else:
                        child = (t, memo)
                elif memorizing:
                    child = (t, memo | {(a, reply)})
                elif reply == keep:
                    child = (t, memo | {(a, reply)})
                else:
                    child = (t, frozenset())
                if child not in parent:
                    parent[child] = (config, (a, s, reply))
                    nxt_frontier.append(child)
        frontier = nxt_frontier
        if not frontier:
            break
    return None


def _unwind(parent, config):
    steps = []
    while parent[config] is not None:
        config, step = parent[config]
        steps.append(step)
    return tuple(reversed(steps))


# ---------------------------------------------------------------------------
# Machine enumeration
# ---------------------------------------------------------------------------

def _canonical_next_tables(n_atoms: int, n: int, static: bool) -> Iterator[tuple]:
    """Accessible next tables in breadth-first canonical numbering.

    A table is a tuple indexed ``[atom][state]``.  State 0 is initial and
    states are numbered in order of first discovery, so every accessible
    machine has exactly one representative up to renaming.
    """
    cells = [(s, a) for s in range(n) for a in range(n_atoms)]
    table = [[0] * n for _ in range(n_atoms)]

    def fill(k, discovered):
        if k == len(cells):
            if discovered == n:
                yield tuple(tuple(row) for row in table)
            return
        s, a = cells[k]
        if s >= discovered:
            return
        if static:
            options = (s,)
        else:
            options = range(min(discovered + 1, n))
        for t in options:
            table[a][s] = t
            yield from fill(k + 1, discovered + (t == discovered))

    yield from fill(0, 1)


def _components(row: Sequence[int]) -> list:
    """Classes of states joined by ``s -- row[s]`` edges."""
    parent = list(range(len(row)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s, t in enumerate(row):
        parent[find(s)] = find(t)
    groups = {}
    for s in range(len(row)):
        groups.setdefault(find(s), []).append(s)
    return list(groups.values())


def _reply_tables(nxt: tuple, n: int, tied: bool) -> Iterator[tuple]:
    if not tied:
        for bits in itertools.product((False, True), repeat=len(nxt) * n):
            yield tuple(tuple(bits[a * n:(a + 1) * n]) for a in range(len(nxt)))
        return
    per_atom = []
    for row in nxt:
        comps = _components(row)
        options = []
        for bits in itertools.product((False, True), repeat=len(comps)):
            reply = [False] * n
            for comp, b in zip(comps, bits):
                for s in comp:
                    reply[s] = b
            options.append(tuple(reply))
        per_atom.append(options)
    yield from itertools.product(*per_atom)


def _idempotent(nxt: tuple) -> bool:
    return all(row[row[s]] == row[s] for row in nxt for s in range(len(row)))


def machine_from_tables(atoms: Sequence[str], nxt: tuple, reply: tuple) -> ValuationMachine:
    n = len(nxt[0]) if nxt else 1
    states = tuple(f"s{i}" for i in range(n))
    table = {(a, states[s]): (reply[i][s], states[nxt[i][s]])
             for i, a in enumerate(atoms) for s in range(n)}
    return ValuationMachine(tuple(atoms), states, "s0", table)


def generate_machines(atoms: Iterable[str], max_states: int, cls: ValuationClass,
                      fuel: int = 12, *, work_reset: bool = False,
                      cap: Optional[int] = None) -> Iterator[ValuationMachine]:
    """Yield every accessible machine with at most ``max_states`` states
    (one per renaming class) that passes :func:`check_class`.

    Machines come in order of state count, then next table, then replies.
    ``cap`` bounds the number of candidates examined; exceeding it raises
    :class:`BudgetExceeded` (default: :func:`default_budget`).
    """
    names = tuple(sorted(set(atoms)))
    if max_states <= 0:
        raise ValueError("max_states must be positive")
    cap = default_budget() if cap is None else cap
    seen = 0
    for n in range(1, max_states + 1):
        # local necessary conditions, valid once every state is reachable
        # well within the fuel
        tied = cls in (ValuationClass.REPETITION_PROOF, ValuationClass.CONTRACTIVE,
                       ValuationClass.STATIC) or (
            cls is ValuationClass.MEMORIZING and fuel >= n + 1)
        idem = cls is ValuationClass.CONTRACTIVE or (
            cls is ValuationClass.MEMORIZING and fuel >= n + 1)
        static = cls is ValuationClass.STATIC
        if not names:
            tables = [()] if n == 1 else []
        else:
            tables = _canonical_next_tables(len(names), n, static)
        for nxt in tables:
            if idem and not _idempotent(nxt):
                continue
            replies = _reply_tables(nxt, n, tied) if names else [()]
            for reply in replies:
                seen += 1
                if seen > cap:
                    raise BudgetExceeded(cap, "candidate machines")
                if names:
                    m = machine_from_tables(names, nxt, reply)
                else:
                    m = ValuationMachine((), ("s0",), "s0", {})
                if check_class(m, cls, fuel, work_reset) is None:
                    yield m


@functools.lru_cache(maxsize=64)
def machine_list(atoms: tuple, max_states: int, cls: ValuationClass,
                 fuel: int = 12, work_reset: bool = False,
                 cap: Optional[int] = None) -> tuple:
    """Cached tuple form of :func:`generate_machines`."""
    return tuple(generate_machines(atoms, max_states, cls, fuel,
                                   work_reset=work_reset, cap=cap))
