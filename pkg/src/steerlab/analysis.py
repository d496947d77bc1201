"""Repetitiveness, memorizing normalization, satisfiability and equivalence."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .batch import MachineBatch, batch_interpret, run_keys
from .errors import BudgetExceeded, RepetitiveInput
from .prop import (BasicForm, Leaf, Node, Prop, atoms_of, bf_paths,
                   to_basic_form)
from .valuation import (ValuationClass, ValuationMachine, evaluate,
                        evaluate_basic_form, generate_machines, path_machine)


@dataclass(frozen=True)
class RepetitivenessReport:
    repetitive: bool
    witness_path: Optional[tuple] = None  # ((atom, reply or None), ...)
    witness_machine: Optional[ValuationMachine] = None


def repeating_path(bf: BasicForm) -> Optional[tuple]:
    """First path (then-branch first) that reaches an atom a second time.

    The path ends with ``(atom, None)`` at the repeated occurrence.
    """
    def walk(node, prefix, seen):
        if isinstance(node, Leaf):
            return None
        if node.atom in seen:
            return prefix + ((node.atom, None),)
        seen = seen | {node.atom}
        return (walk(node.then, prefix + ((node.atom, True),), seen)
                or walk(node.else_, prefix + ((node.atom, False),), seen))
    return walk(bf, (), frozenset())


def is_repetitive(p: Prop) -> RepetitivenessReport:
    path = repeating_path(to_basic_form(p))
    if path is None:
        return RepetitivenessReport(False)
    return RepetitivenessReport(True, path, path_machine(path, atoms_of(p)))


def mem_normalize(p: Prop) -> BasicForm:
    """Non-repeating basic form that agrees with ``p`` under memorizing
    valuations.

    An atom already decided on the current path is replaced by the branch
    it took.  Nodes with equal branches are kept.
    """
    def walk(node, memo):
        if isinstance(node, Leaf):
            return node
        if node.atom in memo:
            return walk(node.then if memo[node.atom] else node.else_, memo)
        return Node(node.atom,
                    walk(node.then, {**memo, node.atom: True}),
                    walk(node.else_, {**memo, node.atom: False}))
    return walk(to_basic_form(p), {})


def mem_sat(bf: BasicForm) -> bool:
    """Satisfiability of a non-repetitive basic form: it contains a T leaf."""
    if repeating_path(bf) is not None:
        raise RepetitiveInput("mem_sat needs a non-repetitive basic form")
    return any(value for _, value in bf_paths(bf))


def assignment_walk(bf: BasicForm, assignment) -> bool:
    """Follow ``bf`` under a fixed truth assignment."""
    while isinstance(bf, Node):
        bf = bf.then if assignment[bf.atom] else bf.else_
    return bf.value


# ---------------------------------------------------------------------------
# Equivalence
# ---------------------------------------------------------------------------

class Status(enum.Enum):
    EQUIVALENT = "equivalent"
    EQUIVALENT_UP_TO_BOUNDS = "equivalent-up-to-bounds"
    INEQUIVALENT = "inequivalent"


@dataclass(frozen=True)
class Counterexample:
    machine: ValuationMachine
    left: object   # EvalTrace, or RunRecord for instruction sequences
    right: object


@dataclass(frozen=True)
class EquivVerdict:
    status: Status
    bounds: Optional[dict] = None
    counterexample: Optional[Counterexample] = None
    structurally_equal: Optional[bool] = None
    notes: tuple = field(default=())

    @property
    def equivalent(self) -> bool:
        return self.status is not Status.INEQUIVALENT


def _union_atoms(*props: Prop) -> tuple:
    out = set()
    for p in props:
        out |= atoms_of(p)
    return tuple(sorted(out))


def _free_search(p, q, atoms, max_states, cap):
    """Least-index Free machine on which ``p`` and ``q`` are observably
    different, searching in increasing state count."""
    chunk = []
    machines = generate_machines(atoms, max_states, ValuationClass.FREE, cap=cap)

    def scan(chunk):
        batch = MachineBatch.from_machines(chunk, atoms)
        diff = run_keys(batch_interpret(p, batch)) != run_keys(batch_interpret(q, batch))
        hits = diff.nonzero()[0]
        return chunk[int(hits[0])] if len(hits) else None

    for m in machines:
        chunk.append(m)
        # small first chunks keep minimal witnesses cheap to find
        if len(chunk) >= 2048 or (len(chunk) >= 64 and len(m.states) == 1):
            hit = scan(chunk)
            if hit is not None:
                return hit
            chunk = []
    if chunk:
        return scan(chunk)
    return None


def equiv_free(p: Prop, q: Prop, max_states: int = 3,
               cap: Optional[int] = None) -> EquivVerdict:
    """Free-valuation equivalence: identity of basic forms.

    When the basic forms differ a distinguishing machine (different atom
    sequence or result) is searched with up to ``max_states`` states.
    """
    bp, bq = to_basic_form(p), to_basic_form(q)
    if bp == bq:
        return EquivVerdict(Status.EQUIVALENT, structurally_equal=True)
    atoms = _union_atoms(p, q)
    bounds = {"max_states": max_states}
    try:
        hit = _free_search(p, q, atoms, max_states, cap)
    except BudgetExceeded:
        hit = None
        bounds["budget_exhausted"] = True
    if hit is None:
        return EquivVerdict(Status.EQUIVALENT_UP_TO_BOUNDS, bounds,
                            structurally_equal=False,
                            notes=("basic forms differ but no machine within "
                                   "the bounds separates them",))
    return EquivVerdict(Status.INEQUIVALENT, bounds,
                        Counterexample(hit, evaluate(p, hit), evaluate(q, hit)),
                        structurally_equal=False)


def assignments(atoms: Iterable[str]):
    """All total assignments, T before F, first atom varying slowest."""
    atoms = tuple(atoms)
    for bits in itertools.product((True, False), repeat=len(atoms)):
        yield dict(zip(atoms, bits))


def equiv_static(p: Prop, q: Prop) -> EquivVerdict:
    """Exact comparison of results over all assignments."""
    atoms = _union_atoms(p, q)
    bp, bq = to_basic_form(p), to_basic_form(q)
    count = 0
    for assignment in assignments(atoms):
        count += 1
        m = ValuationMachine.constant(assignment)
        tp, tq = evaluate_basic_form(bp, m), evaluate_basic_form(bq, m)
        if tp.result != tq.result:
            return EquivVerdict(Status.INEQUIVALENT, {"assignments": count},
                                Counterexample(m, tp, tq), bp == bq)
    return EquivVerdict(Status.EQUIVALENT, {"assignments": count},
                        structurally_equal=bp == bq)


def equiv_class(p: Prop, q: Prop, cls: ValuationClass, max_states: int = 3,
                fuel: int = 12, cap: Optional[int] = None) -> EquivVerdict:
    """Compare results of ``p`` and ``q`` on every machine of ``cls``.

    Static and free semantics are decided exactly; the other classes are
    checked on all generated machines within the bounds.
    """
    if cls is ValuationClass.STATIC:
        return equiv_static(p, q)
    if cls is ValuationClass.FREE:
        return equiv_free(p, q, max_states, cap)
    atoms = _union_atoms(p, q)
    bp, bq = to_basic_form(p), to_basic_form(q)
    count = 0
    trace_diffs = 0
    for m in generate_machines(atoms, max_states, cls, fuel, cap=cap):
        count += 1
        tp, tq = evaluate_basic_form(bp, m), evaluate_basic_form(bq, m)
        if tp.result != tq.result:
            return EquivVerdict(Status.INEQUIVALENT,
                                {"max_states": max_states, "fuel": fuel,
                                 "machines": count},
                                Counterexample(m, tp, tq), bp == bq)
        trace_diffs += tp.atom_sequence != tq.atom_sequence
    notes = ()
    if trace_diffs:
        notes = (f"results agree but atom sequences differ on {trace_diffs} "
                 "machine(s)",)
    return EquivVerdict(Status.EQUIVALENT_UP_TO_BOUNDS,
                        {"max_states": max_states, "fuel": fuel, "machines": count},
                        structurally_equal=bp == bq, notes=notes)
