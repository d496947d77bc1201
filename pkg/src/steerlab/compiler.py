"""Steering-point elimination and exhaustive size minimization."""

from __future__ import annotations

import logging
from typing import Iterable, Iterator, Optional

from .analysis import assignments, is_repetitive
from .errors import BudgetExceeded, NoneWithinBudget
from .pga import (DEAD, Basic, Branch, Halt, InstrSeq, Jump, NegTest, PosTest,
                  Thread, equiv_iseq, is_atomic_body, iseq_atoms, render_iseq,
                  thread_extract)
from .prop import Atom, Leaf, Node, enumerate_props, to_basic_form, token_size
from .valuation import (ValuationClass, ValuationMachine, default_budget,
                        generate_machines)

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Elimination of non-atomic steering points
# ---------------------------------------------------------------------------

class _Item:
    """One instruction of the intermediate program.  Jumps point at other
    items (or at ``END``); tests keep their positional exits."""

    __slots__ = ("kind", "atom", "target")

    def __init__(self, kind, atom=None, target=None):
        self.kind = kind      # "+", "-", "work", "halt", "jump"
        self.atom = atom
        self.target = target

    def __repr__(self):
        return f"_Item({self.kind}, {self.atom})"


END = _Item("end")


def _is_test(item) -> bool:
    return item is not None and item.kind in "+-"


def _emit_body(bf, on_true, on_false) -> list:
    """Two-exit code for a basic form: ``+a; jump then; jump else`` per
    decision node, nodes in reverse postorder so every jump is forward."""
    if isinstance(bf, Leaf):
        return [_Item("jump", target=on_true if bf.value else on_false)]
    order, seen = [], set()

    def visit(node):
        if isinstance(node, Leaf) or node in seen:
            return
        seen.add(node)
        visit(node.else_)
        visit(node.then)
        order.append(node)
    visit(bf)
    order.reverse()

    heads = {node: _Item("+", node.atom) for node in order}

    def exit_of(node):
        if isinstance(node, Leaf):
            return on_true if node.value else on_false
        return heads[node]

    items = []
    for node in order:
        items.append(heads[node])
        items.append(_Item("jump", target=exit_of(node.then)))
        items.append(_Item("jump", target=exit_of(node.else_)))
    return items


def _lower(s: InstrSeq) -> list:
    n = len(s)
    starts = [_Item("pending") for _ in range(n)]

    def label(i):
        return starts[i] if i < n else END

    blocks = []
    for i, ins in enumerate(s):
        if isinstance(ins, Halt):
            block = [_Item("halt")]
        elif isinstance(ins, Basic):
            block = [_Item("work", ins.atom)]
        elif isinstance(ins, Jump):
            block = [_Item("jump", target=label(i + ins.k) if ins.k else None)]
            if ins.k == 0:
                block[0].target = block[0]
        else:
            on_true, on_false = label(i + 1), label(i + 2)
            if isinstance(ins, NegTest):
                on_true, on_false = on_false, on_true
            block = _emit_body(to_basic_form(ins.body), on_true, on_false)
        blocks.append(block)

    # block starts were placeholders; swap in the real first items
    real = {id(starts[i]): blocks[i][0] for i in range(n)}
    items = [item for block in blocks for item in block]
    for item in items:
        if item.kind == "jump" and id(item.target) in real:
            item.target = real[id(item.target)]
    return items


def _retarget(items, old, new):
    for item in items:
        if item.kind == "jump" and item.target is old:
            item.target = new


def _peephole(items: list) -> bool:
    """Apply one rewrite; return whether anything changed."""
    changed = False
    # jump chaining
    for item in items:
        if item.kind == "jump":
            t = item.target
            while t is not END and t.kind == "jump" and t.target is not t \
                    and t is not item:
                t = t.target
            if t is not item.target:
                item.target = t
                changed = True
    n = len(items)
    for i, item in enumerate(items):
        prev = items[i - 1] if i > 0 else None
        nxt = items[i + 1] if i + 1 < n else END
        after = items[i + 2] if i + 2 < n else END
        # test; jump A; jump B; A; B  ->  test; A; B
        if _is_test(item) and i + 2 < n and items[i + 1].kind == "jump" \
                and items[i + 2].kind == "jump":
            a, b = items[i + 1], items[i + 2]
            rest = items[i + 3:]
            if len(rest) >= 1 and rest[0] is a.target and \
                    (rest[1] if len(rest) > 1 else END) is b.target:
                _retarget(items, a, a.target)
                _retarget(items, b, b.target)
                del items[i + 1:i + 3]
                return True
        if item.kind != "jump":
            continue
        # jump to the next instruction
        if item.target is nxt and not _is_test(prev):
            _retarget(items, item, nxt)
            del items[i]
            return True
        # +x; jump A; Y; A  ->  -x; Y; A
        if _is_test(prev) and item.target is not item and i + 1 < n \
                and after is item.target \
                and not (i >= 2 and _is_test(items[i - 2])):
            prev.kind = "-" if prev.kind == "+" else "+"
            _retarget(items, item, item.target)
            del items[i]
            return True
    return changed


def _raise(items: list) -> InstrSeq:
    if not items:
        # every path fell through to the end: an explicit deadlock
        return InstrSeq((Jump(0),))
    pos = {id(item): i for i, item in enumerate(items)}
    out = []
    for i, item in enumerate(items):
        if item.kind == "halt":
            out.append(Halt())
        elif item.kind == "work":
            out.append(Basic(item.atom))
        elif item.kind == "+":
            out.append(PosTest(Atom(item.atom)))
        elif item.kind == "-":
            out.append(NegTest(Atom(item.atom)))
        else:
            target = len(items) if item.target is END else pos[id(item.target)]
            out.append(Jump(target - i))
    return InstrSeq(tuple(out))


def eliminate_nonatomic(s: InstrSeq) -> InstrSeq:
    """Rewrite ``s`` so that every test has an atomic body, keeping its
    thread.

    Each instruction becomes a block; a test becomes decision code for
    the basic form of its body with exits to the blocks of its two
    successors.  Jumps are retargeted to block starts, then jump chaining,
    jump-to-next removal and test/jump folding clean up the layout.
    """
    if all(is_atomic_body(ins.body) for ins in s
           if isinstance(ins, (PosTest, NegTest))):
        return s
    items = _lower(s)
    while _peephole(items):
        pass
    return _raise(items)


# ---------------------------------------------------------------------------
# Minimization
# ---------------------------------------------------------------------------

def _has_dead(t: Thread) -> bool:
    seen, stack = set(), [t]
    while stack:
        u = stack.pop()
        if u is DEAD:
            return True
        if isinstance(u, Branch) and id(u) not in seen:
            seen.add(id(u))
            stack.extend((u.pos, u.neg))
    return False


_LEAVES: dict = {}


def _leaf_values(p) -> frozenset:
    hit = _LEAVES.get(p)
    if hit is None:
        hit = _LEAVES[p] = frozenset(_leaves(to_basic_form(p)))
    return hit


def _leaves(bf) -> set:
    if isinstance(bf, Leaf):
        return {bf.value}
    return _leaves(bf.then) | _leaves(bf.else_)


def _reachable(instrs) -> list:
    """Instructions reachable from the first one by control flow."""
    n = len(instrs)
    live = [False] * n
    live[0] = True
    for i, ins in enumerate(instrs):
        if not live[i]:
            continue
        if isinstance(ins, Halt):
            succ = ()
        elif isinstance(ins, Jump):
            succ = (i + ins.k,)
        elif isinstance(ins, Basic):
            succ = (i + 1,)
        else:
            leaves = _leaf_values(ins.body)
            pos = isinstance(ins, PosTest)
            succ = tuple(i + (1 if v == pos else 2) for v in leaves)
        for j in succ:
            if j < n:
                live[j] = True
    return live


def candidate_bodies(alphabet: Iterable[str], budget: int,
                     non_repetitive_only: bool = False) -> list:
    """Test bodies over ``alphabet`` with at most ``budget`` tokens, sorted
    by token size then rendering."""
    out = {}
    for p in enumerate_props(tuple(sorted(alphabet)), max(budget, 1)):
        k = token_size(p)
        if k > budget:
            continue
        if non_repetitive_only and is_repetitive(p).repetitive:
            continue
        out.setdefault(str(p), p)
    return sorted(out.values(), key=lambda p: (token_size(p), str(p)))


class _Runner:
    """Runs candidates on a fixed machine list, comparing with the
    target's observations; bodies are walked as basic forms."""

    def __init__(self, machines, target: InstrSeq):
        self.machines = machines
        self.bf = {}
        self.expected = [self.observe(target.instructions, m) for m in machines]
        self.order = list(range(len(machines)))

    def body(self, p):
        bf = self.bf.get(p)
        if bf is None:
            bf = self.bf[p] = to_basic_form(p)
        return bf

    def observe(self, instrs, m):
        table = m.table
        st = m.init
        trace = []
        pc, n = 0, len(instrs)
        while pc < n:
            ins = instrs[pc]
            cls = type(ins)
            if cls is Halt:
                return True, tuple(trace)
            if cls is Jump:
                if ins.k == 0:
                    break
                pc += ins.k
            elif cls is Basic:
                r, st = table[(ins.atom, st)]
                trace.append((ins.atom, r))
                pc += 1
            else:
                node = self.body(ins.body)
                while type(node) is Node:
                    r, st = table[(node.atom, st)]
                    trace.append((node.atom, r))
                    node = node.then if r else node.else_
                value = node.value if cls is PosTest else not node.value
                pc += 1 if value else 2
        return False, tuple(trace)

    def matches(self, instrs) -> bool:
        for k, idx in enumerate(self.order):
            if self.observe(instrs, self.machines[idx]) != self.expected[idx]:
                # try the most discriminating machine first next time
                if k:
                    self.order.insert(0, self.order.pop(k))
                return False
        return True


def _instructions_of_size(size, pos, n, alphabet, bodies_by_size):
    if size == 1:
        yield Halt()
        for a in alphabet:
            yield Basic(a)
        for k in range(1, n - pos + 1):
            yield Jump(k)
        return
    for p in bodies_by_size.get(size, ()):
        yield PosTest(p)
        yield NegTest(p)


def _candidates(total: int, alphabet, bodies_by_size, must_halt: bool) -> Iterator[tuple]:
    """All instruction tuples of exact ``iseq_size`` total."""
    sizes = sorted(bodies_by_size) + [1]
    sizes = sorted(set(sizes))
    for n in range(1, (total + 1) // 2 + 1):
        budget = total - (n - 1)
        if budget < n:
            break

        def fill(pos, left):
            if pos == n - 1:
                if must_halt:
                    if left == 1:
                        yield (Halt(),)
                    return
                for ins in _instructions_of_size(left, pos, n, alphabet, bodies_by_size):
                    yield (ins,)
                return
            slots_after = n - pos - 1
            for k in sizes:
                if left - k < slots_after:
                    break
                for ins in _instructions_of_size(k, pos, n, alphabet, bodies_by_size):
                    for rest in fill(pos + 1, left - k):
                        yield (ins,) + rest

        yield from fill(0, budget)


def minimize(s: InstrSeq, cls: ValuationClass, alphabet: Iterable[str],
             max_size: int, non_repetitive_only: bool = False,
             body_budget: int = 7, max_states: int = 3, fuel: int = 12,
             cap: Optional[int] = None, stats: Optional[dict] = None) -> InstrSeq:
    """Shortest instruction sequence equivalent to ``s`` under ``cls``.

    Candidates are enumerated by increasing size; among equivalent
    candidates of the least size the one with the smallest rendering is
    returned.  Sequences with ``#0`` or with an unreachable instruction
    other than ``!`` are skipped, and when ``s`` cannot deadlock only
    candidates ending in ``!`` are considered.
    """
    cap = default_budget() if cap is None else cap
    alphabet = tuple(sorted(set(alphabet)))
    atoms = tuple(sorted(set(alphabet) | iseq_atoms(s)))
    if cls is ValuationClass.FREE:
        machines = None
        target_thread = thread_extract(s)
    elif cls is ValuationClass.STATIC:
        machines = [ValuationMachine.constant(a) for a in assignments(atoms)]
    else:
        machines = list(generate_machines(atoms, max_states, cls, fuel,
                                          work_reset=True))
    runner = _Runner(machines, s) if machines is not None else None
    must_halt = not _has_dead(thread_extract(s))

    # a non-atomic test costs 3 + tokens; leave room for ";!" when needed
    limit = min(body_budget, max_size - (5 if must_halt else 3))
    bodies = candidate_bodies(alphabet, max(limit, 1), non_repetitive_only)
    bodies_by_size = {}
    for p in bodies:
        k = token_size(p)
        size = k + 1 if is_atomic_body(p) else k + 3
        bodies_by_size.setdefault(size, []).append(p)

    examined = 0
    for total in range(1, max_size + 1):
        hits = []
        for instrs in _candidates(total, alphabet, bodies_by_size, must_halt):
            examined += 1
            if examined > cap:
                raise BudgetExceeded(cap)
            live = _reachable(instrs)
            if not all(live[i] or isinstance(ins, Halt)
                       for i, ins in enumerate(instrs)):
                continue
            if runner is not None:
                if runner.matches(instrs):
                    hits.append(InstrSeq(instrs))
            elif thread_extract(InstrSeq(instrs)) == target_thread:
                hits.append(InstrSeq(instrs))
        log.info("size %d: %d candidates examined, %d hits", total, examined, len(hits))
        for cand in sorted(hits, key=render_iseq):
            if equiv_iseq(cand, s, cls, max_states, fuel).equivalent:
                if stats is not None:
                    stats.update(examined=examined, size=total)
                return cand
    if stats is not None:
        stats.update(examined=examined, size=None)
    raise NoneWithinBudget(f"no equivalent sequence of size <= {max_size}")
