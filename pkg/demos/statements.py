"""Sequential statements: basic forms, repetitiveness and reactive evaluation."""

from steerlab.analysis import equiv_class, is_repetitive, mem_normalize
from steerlab.prop import parse_prop, render_basic_form, to_basic_form
from steerlab.valuation import (ValuationClass, evaluate, evaluate_with_retry,
                                parse_machine, render_machine)
from steerlab.errors import RetriesExhausted

FLIP = parse_machine("""
atoms a b
states s0 s1
init s0
step a s0 T s1
step a s1 F s0
step b s0 F s0
step b s1 T s1
""")


def show_basic_forms():
    for text in ["a && b", "a .&& b", "b <| a |> c", "(a && b) || (~a && c)"]:
        p = parse_prop(text)
        print(f"{text:24} -> {render_basic_form(to_basic_form(p))}")


def show_repetitiveness():
    for text in ["a && (b || T)", "a && (b || a)"]:
        rep = is_repetitive(parse_prop(text))
        print(f"{text:16} repetitive={rep.repetitive}")
        if rep.repetitive:
            trace = evaluate(parse_prop(text), rep.witness_machine)
            print("  witness trace:", " ".join(trace.atom_sequence))


def show_reactive_evaluation():
    p = parse_prop("a && a")
    print(render_machine(FLIP).rstrip())
    t = evaluate(p, FLIP)
    print("a && a ->", "T" if t.result else "F", "stable" if t.reply_stable else "unstable")
    try:
        evaluate_with_retry(p, FLIP, 3)
    except RetriesExhausted as exc:
        print(f"no stable evaluation in {len(exc.traces)} attempts")


def show_semantics():
    p, q = parse_prop("(a && b) || (~a && c)"), parse_prop("b <| a |> c")
    print("normal form of the left side:", render_basic_form(mem_normalize(p)))
    for cls in ValuationClass:
        print(f"  {cls.value:22} {equiv_class(p, q, cls).status.value}")


if __name__ == "__main__":
    show_basic_forms()
    print()
    show_repetitiveness()
    print()
    show_reactive_evaluation()
    print()
    show_semantics()
