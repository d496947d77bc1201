"""Hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from steerlab.prop import (BINARY_CONNECTIVES, Atom, Cond, F, Neg, T)
from steerlab.pga import Basic, Halt, InstrSeq, Jump, NegTest, PosTest
from steerlab.valuation import ValuationMachine


def props(atoms=("a", "b", "c"), max_leaves=8):
    leaves = st.sampled_from([T, F] + [Atom(a) for a in atoms])

    def extend(children):
        return st.one_of(
            st.builds(Neg, children),
            st.builds(lambda op, x, y: op(x, y),
                      st.sampled_from(BINARY_CONNECTIVES), children, children),
            st.builds(Cond, children, children, children),
        )
    return st.recursive(leaves, extend, max_leaves=max_leaves)


@st.composite
def machines(draw, atoms=("a", "b", "c"), max_states=3):
    n = draw(st.integers(1, max_states))
    states = tuple(f"s{i}" for i in range(n))
    table = {}
    for a in atoms:
        for s in states:
            table[(a, s)] = (draw(st.booleans()), draw(st.sampled_from(states)))
    return ValuationMachine(tuple(atoms), states, "s0", table)


@st.composite
def iseqs(draw, atoms=("a", "b"), max_len=6, bodies=None):
    n = draw(st.integers(1, max_len))
    out = []
    for i in range(n):
        kind = draw(st.sampled_from("!wpnj"))
        if kind == "!":
            out.append(Halt())
        elif kind == "w":
            out.append(Basic(draw(st.sampled_from(atoms))))
        elif kind == "j":
            out.append(Jump(draw(st.integers(0, n - i + 1))))
        else:
            body = draw(bodies if bodies is not None
                        else st.sampled_from([Atom(a) for a in atoms]))
            out.append(PosTest(body) if kind == "p" else NegTest(body))
    return InstrSeq(tuple(out))
