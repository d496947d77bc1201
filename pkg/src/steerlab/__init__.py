"""Proposition algebra with sequential connectives, reactive valuations and
single-pass instruction sequences."""

from .errors import (BudgetExceeded, NoneWithinBudget, ParseError,
                     RepetitiveInput, RetriesExhausted, UndeclaredAtom)
from .prop import (Atom, BasicForm, Cond, F, Leaf, Neg, Node, Prop, T,
                   cp_rewrite, enumerate_props, expand, parse_prop,
                   render_basic_form, render_prop, to_basic_form)
from .valuation import (ValuationClass, ValuationMachine, check_class,
                        evaluate, evaluate_with_retry, generate_machines,
                        interpret, load_machine, parse_machine)
from .analysis import (EquivVerdict, Status, equiv_class, equiv_free,
                       equiv_static, is_repetitive, mem_normalize, mem_sat)
from .pga import (InstrSeq, equiv_iseq, exec_iseq, iseq_size, parse_iseq,
                  render_iseq, thread_extract)
from .compiler import eliminate_nonatomic, minimize
from .classify import (ActionModel, classify_atoms, classify_occurrences,
                       detectability, load_model, parse_model)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "NoneWithinBudget",
    "ParseError",
    "RepetitiveInput",
    "RetriesExhausted",
    "UndeclaredAtom",
    "Atom",
    "BasicForm",
    "Cond",
    "F",
    "Leaf",
    "Neg",
    "Node",
    "Prop",
    "T",
    "cp_rewrite",
    "enumerate_props",
    "expand",
    "parse_prop",
    "render_basic_form",
    "render_prop",
    "to_basic_form",
    "ValuationClass",
    "ValuationMachine",
    "check_class",
    "evaluate",
    "evaluate_with_retry",
    "generate_machines",
    "interpret",
    "load_machine",
    "parse_machine",
    "EquivVerdict",
    "Status",
    "equiv_class",
    "equiv_free",
    "equiv_static",
    "is_repetitive",
    "mem_normalize",
    "mem_sat",
    "InstrSeq",
    "equiv_iseq",
    "exec_iseq",
    "iseq_size",
    "parse_iseq",
    "render_iseq",
    "thread_extract",
    "eliminate_nonatomic",
    "minimize",
    "ActionModel",
    "classify_atoms",
    "classify_occurrences",
    "detectability",
    "load_model",
    "parse_model",
]
