"""Instruction sequences: threads, compilation of complex tests, minimization."""

import logging
import sys

from steerlab.compiler import eliminate_nonatomic, minimize
from steerlab.pga import (equiv_iseq, exec_iseq, iseq_size, parse_iseq,
                          render_iseq, render_thread, thread_extract)
from steerlab.valuation import ValuationClass, ValuationMachine


def show_threads():
    for text in ["+f;#3;a;!;b;!", "+(a && b);c;!", "-a;!;-b;c;!", "#0"]:
        s = parse_iseq(text)
        print(f"{text:16} size {iseq_size(s):2}  thread {render_thread(thread_extract(s))}")


def show_execution():
    m = ValuationMachine.constant({"a": True, "b": False, "c": True})
    r = exec_iseq(parse_iseq("+(a && b);c;!"), m)
    print("a=T b=F c=T:", r.outcome, " ".join(f"{a}={'T' if x else 'F'}" for a, x, _ in r.trace))


def show_compilation():
    for text in ["+(~a && (b || c));u;!", "+(~a && (b .|| c));u;!", "-(a <=> b);u;!"]:
        s = parse_iseq(text)
        out = eliminate_nonatomic(s)
        same = thread_extract(out) == thread_extract(s)
        print(f"{text:24} -> {render_iseq(out):28} thread-equal: {same}")


def show_minimization():
    s = parse_iseq("-a;!;-b;c;!")
    stats = {}
    best = minimize(s, ValuationClass.STATIC, "abc", iseq_size(s), stats=stats)
    print(f"{render_iseq(s)} (size {iseq_size(s)}) -> {render_iseq(best)} "
          f"(size {iseq_size(best)}, {stats['examined']} candidates)")
    # the shorter form keeps the thread, so free semantics accepts it too
    for cls in (ValuationClass.FREE, ValuationClass.STATIC):
        print(f"  under {cls.value}: {equiv_iseq(best, s, cls).status.value}")
    # the converse implication is a different test
    swapped = parse_iseq("-(b => a);c;!")
    print(f"{render_iseq(swapped)} under static: "
          f"{equiv_iseq(swapped, s, ValuationClass.STATIC).status.value}")


if __name__ == "__main__":
    if "-v" in sys.argv:
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    show_threads()
    print()
    show_execution()
    print()
    show_compilation()
    print()
    show_minimization()
