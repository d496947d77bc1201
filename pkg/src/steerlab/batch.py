"""Vectorized short-circuit evaluation over many machines at once.

A :class:`MachineBatch` stacks the reply and successor tables of ``M``
machines into ``(M, atoms, states)`` arrays.  :func:`batch_interpret` then
runs a statement on every machine simultaneously, using boolean masks for
the rows that take each branch.  Traces are encoded exactly as integers in
base ``atoms + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import UndeclaredAtom
from .prop import (Atom, Cond, Falsity, LeftAnd, LeftBiimp, LeftImp, LeftOr,
                   Neg, Prop, RightAnd, RightBiimp, RightImp, RightOr, Truth,
                   atoms_of)
from .valuation import ValuationMachine


class MachineBatch:
    def __init__(self, atoms: Sequence[str], reply: np.ndarray, nxt: np.ndarray,
                 init: np.ndarray, machines: Optional[Sequence[ValuationMachine]] = None):
        self.atoms = tuple(atoms)
        self.index = {a: i for i, a in enumerate(self.atoms)}
        self.reply = reply
        self.nxt = nxt
        self.init = init
        self.machines = machines

    def __len__(self):
        return self.reply.shape[0]

    @classmethod
    def from_machines(cls, machines: Sequence[ValuationMachine],
                      atoms: Optional[Sequence[str]] = None) -> "MachineBatch":
        machines = list(machines)
        if atoms is None:
            atoms = sorted({a for m in machines for a in m.atoms})
        atoms = tuple(atoms)
        n_states = max((len(m.states) for m in machines), default=1)
        M, A = len(machines), len(atoms)
        reply = np.zeros((M, A, n_states), dtype=bool)
        nxt = np.zeros((M, A, n_states), dtype=np.int16)
        init = np.zeros(M, dtype=np.int16)
        for k, m in enumerate(machines):
            pos = {s: i for i, s in enumerate(m.states)}
            init[k] = pos[m.init]
            for i, a in enumerate(atoms):
                if a not in m.atoms:
                    raise UndeclaredAtom(a)
                for s, j in pos.items():
                    r, t = m.table[(a, s)]
                    reply[k, i, j] = r
                    nxt[k, i, j] = pos[t]
        return cls(atoms, reply, nxt, init, machines)


@dataclass
class BatchRun:
    result: np.ndarray       # (M,) bool
    trace_code: np.ndarray   # (M,) int64, exact encoding of the atom sequence
    length: np.ndarray       # (M,) number of atom evaluations
    reply_stable: np.ndarray  # (M,) bool
    final_state: np.ndarray  # (M,) state index


class _BatchEval:
    def __init__(self, batch: MachineBatch):
        self.b = batch
        M = len(batch)
        self.rows = np.arange(M)
        self.state = batch.init.astype(np.int64).copy()
        self.code = np.zeros(M, dtype=np.int64)
        self.length = np.zeros(M, dtype=np.int64)
        self.first = np.full((M, len(batch.atoms)), -1, dtype=np.int8)
        self.stable = np.ones(M, dtype=bool)
        self.base = len(batch.atoms) + 1
        # largest exactly representable trace length
        self.max_len = (int(np.floor(62 / np.log2(self.base)))
                        if self.base > 1 else 62)

    def atom(self, i: int, active: np.ndarray) -> np.ndarray:
        r = self.b.reply[self.rows, i, self.state]
        t = self.b.nxt[self.rows, i, self.state]
        self.state = np.where(active, t, self.state)
        self.code = np.where(active, self.code * self.base + (i + 1), self.code)
        self.length += active
        f = self.first[:, i]
        seen = f >= 0
        self.stable &= ~(active & seen & (f != r))
        self.first[:, i] = np.where(active & ~seen, r, f)
        return r

    def eval(self, p: Prop, active: np.ndarray) -> np.ndarray:
        if isinstance(p, Truth):
            return np.ones(len(active), dtype=bool)
        if isinstance(p, Falsity):
            return np.zeros(len(active), dtype=bool)
        if isinstance(p, Atom):
            return self.atom(self.b.index[p.name], active)
        if isinstance(p, Cond):
            c = self.eval(p.cond, active)
            x = self.eval(p.then, active & c)
            z = self.eval(p.else_, active & ~c)
            return np.where(c, x, z)
        if isinstance(p, Neg):
            return ~self.eval(p.arg, active)
        if isinstance(p, LeftAnd):
            x = self.eval(p.left, active)
            return x & self.eval(p.right, active & x)
        if isinstance(p, LeftOr):
            x = self.eval(p.left, active)
            return x | self.eval(p.right, active & ~x)
        if isinstance(p, LeftImp):
            x = self.eval(p.left, active)
            return ~x | self.eval(p.right, active & x)
        if isinstance(p, LeftBiimp):
            x = self.eval(p.left, active)
            return x == self.eval(p.right, active)
        if isinstance(p, RightAnd):
            y = self.eval(p.right, active)
            return y & self.eval(p.left, active & y)
        if isinstance(p, RightOr):
            y = self.eval(p.right, active)
            return y | self.eval(p.left, active & ~y)
        if isinstance(p, RightImp):
            y = self.eval(p.right, active)
            return y | ~self.eval(p.left, active & ~y)
        if isinstance(p, RightBiimp):
            y = self.eval(p.right, active)
            return self.eval(p.left, active) == y
        raise TypeError(f"not a Prop: {p!r}")


def batch_interpret(p: Prop, batch: MachineBatch) -> BatchRun:
    """Evaluate ``p`` on every machine of ``batch`` (direct semantics)."""
    for a in atoms_of(p):
        if a not in batch.index:
            raise UndeclaredAtom(a)
    ev = _BatchEval(batch)
    result = ev.eval(p, np.ones(len(batch), dtype=bool))
    if len(batch) and int(ev.length.max()) > ev.max_len:
        raise OverflowError("trace too long for exact integer encoding")
    return BatchRun(result, ev.code, ev.length, ev.stable, ev.state)


def run_keys(run: BatchRun) -> np.ndarray:
    """One int64 per machine identifying (atom sequence, result)."""
    return run.trace_code * 2 + run.result
