"""Command-line front end: ``steerlab <command> ...``.

Exit codes: 0 success, 1 negative verdict, 2 usage or parse error,
3 search budget exhausted.  ``--json`` prints one JSON object with a
``schema_version`` field.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import analysis, classify, compiler, pga, prop, valuation
from .errors import (BudgetExceeded, NoneWithinBudget, ParseError,
                     RepetitiveInput, RetriesExhausted, UndeclaredAtom)
from .valuation import ValuationClass

SCHEMA_VERSION = 1

GRAMMAR = {
    "prop": (
        "prop  ::= bi '<|' bi '|>' bi | bi\n"
        "bi    ::= imp (('<=>' | '.<=>') imp)*\n"
        "imp   ::= or (('=>' | '.=>') imp)?\n"
        "or    ::= and (('||' | '.||') and)*\n"
        "and   ::= unary (('&&' | '.&&') unary)*\n"
        "unary ::= '~' unary | 'T' | 'F' | atom | '(' prop ')'\n"
        "atom  ::= [a-z][a-zA-Z0-9_]*"),
    "iseq": (
        "iseq  ::= instr (';' instr)*\n"
        "instr ::= atom | '+' atom | '-' atom | '+(' prop ')' | '-(' prop ')'"
        " | '#' digits | '!'"),
    "machine": (
        "atoms NAME...\nstates NAME...\ninit STATE\n"
        "step ATOM STATE T|F NEXT      (one per atom and state)\n"
        "equiv STATE STATE...          (model files only)\n"
        "normal STATE...               (model files only)"),
}


class UsageError(Exception):
    def __init__(self, message, grammar=None):
        super().__init__(message)
        self.grammar = grammar


def _prop(text):
    try:
        return prop.parse_prop(text)
    except ParseError as exc:
        raise UsageError(f"cannot parse statement {text!r}: {exc}", "prop") from None


def _iseq(text):
    try:
        return pga.parse_iseq(text)
    except (ParseError, ValueError) as exc:
        raise UsageError(f"cannot parse instruction sequence {text!r}: {exc}",
                         "iseq") from None


def _machine(path):
    if path is None:
        raise UsageError("this command needs --machine FILE", "machine")
    try:
        with open(path) as fh:
            # model files are accepted too; their extra lines are ignored
            return valuation.parse_machine(fh.read(), {"equiv": [], "normal": []})
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except ParseError as exc:
        raise UsageError(f"bad machine file {path}: {exc}", "machine") from None


def _model(path):
    if path is None:
        raise UsageError("this command needs --model FILE", "machine")
    try:
        return classify.load_model(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except ParseError as exc:
        raise UsageError(f"bad model file {path}: {exc}", "machine") from None


def _semantics(name):
    try:
        return ValuationClass.parse(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _tv(b):
    return "T" if b else "F"


def _steps(steps):
    return [[a, s, _tv(r)] for a, s, r in steps]


def _machine_json(m):
    return {"atoms": list(m.atoms), "states": list(m.states), "init": m.init,
            "steps": [[a, s, _tv(r), t] for (a, s), (r, t) in sorted(m.table.items())]}


def _assignment_of(m):
    if len(m.states) == 1:
        return {a: m.reply(a, m.init) for a in m.atoms}
    return None


# ---------------------------------------------------------------------------
# Commands: each returns (exit code, human text, json payload)
# ---------------------------------------------------------------------------

def cmd_fmt(args):
    p = _prop(args.prop)
    text = prop.render_prop(p, args.full_parens)
    return 0, text, {"prop": text}


def cmd_basic_form(args):
    p = _prop(args.prop)
    bf = prop.to_basic_form(p)
    text = prop.render_basic_form(bf)
    payload = {"basic_form": text, "depth": prop.bf_depth(bf)}
    lines = [text]
    if args.rewrite:
        rewritten, steps = prop.cp_rewrite(p)
        payload["rewrite_steps"] = steps
        payload["agrees"] = rewritten == bf
        lines.append(f"rewrite steps: {steps}")
    return 0, "\n".join(lines), payload


def _trace_text(trace):
    steps = " ".join(f"{a}@{s}={_tv(r)}" for a, s, r in trace.steps) or "(none)"
    return (f"result: {_tv(trace.result)}\ntrace: {steps}\n"
            f"reply-stable: {'yes' if trace.reply_stable else 'no'}\n"
            f"final state: {trace.final_state}")


def _trace_json(trace):
    return {"result": trace.result, "steps": _steps(trace.steps),
            "reply_stable": trace.reply_stable, "final_state": trace.final_state}


def cmd_eval(args):
    p = _prop(args.prop)
    m = _machine(args.machine)
    trace = valuation.evaluate(p, m, args.state)
    return 0, _trace_text(trace), _trace_json(trace)


def cmd_retry_eval(args):
    p = _prop(args.prop)
    m = _machine(args.machine)
    try:
        out = valuation.evaluate_with_retry(p, m, args.retries)
    except RetriesExhausted as exc:
        return 1, f"no reply-stable evaluation in {len(exc.traces)} attempt(s)", \
            {"exhausted": True, "attempts": [_trace_json(t) for t in exc.traces]}
    text = f"result: {_tv(out.result)} after {out.attempts} attempt(s)"
    return 0, text, {"exhausted": False, "result": out.result,
                     "attempts": [_trace_json(t) for t in out.traces]}


def cmd_check_class(args):
    m = _machine(args.machine)
    cls = _semantics(args.semantics)
    v = valuation.check_class(m, cls, args.fuel, args.work_reset)
    if v is None:
        return 0, f"machine belongs to {cls.value}", {"member": True, "class": cls.value}
    path = " ".join(f"{a}@{s}={_tv(r)}" for a, s, r in v.steps)
    return 1, f"not {cls.value}: {v.reason}\nwitness: {path}", \
        {"member": False, "class": cls.value, "reason": v.reason,
         "witness": _steps(v.steps)}


def _path_text(path):
    return " ".join(a if r is None else f"{a}={_tv(r)}" for a, r in path)


def cmd_analyze(args):
    p = _prop(args.prop)
    rep = analysis.is_repetitive(p)
    if not rep.repetitive:
        return 0, "non-repetitive", {"repetitive": False}
    trace = valuation.evaluate(p, rep.witness_machine)
    text = (f"repetitive\nwitness path: {_path_text(rep.witness_path)}\n"
            f"witness trace: {' '.join(trace.atom_sequence)}")
    return 0, text, {"repetitive": True,
                     "witness_path": [[a, None if r is None else _tv(r)]
                                      for a, r in rep.witness_path],
                     "witness_machine": _machine_json(rep.witness_machine),
                     "witness_trace": list(trace.atom_sequence)}


def cmd_normalize(args):
    p = _prop(args.prop)
    bf = analysis.mem_normalize(p)
    text = prop.render_basic_form(bf)
    return 0, text, {"normal_form": text}


def cmd_sat(args):
    p = _prop(args.prop)
    bf = analysis.mem_normalize(p)
    sat = analysis.mem_sat(bf)
    return (0 if sat else 1), ("satisfiable" if sat else "unsatisfiable"), \
        {"satisfiable": sat, "normal_form": prop.render_basic_form(bf)}


def _verdict(v, trace_json, trace_text):
    payload = {"status": v.status.value, "bounds": v.bounds,
               "structurally_equal": v.structurally_equal, "notes": list(v.notes)}
    lines = [v.status.value]
    if v.bounds:
        lines.append("bounds: " + ", ".join(f"{k}={v.bounds[k]}" for k in sorted(v.bounds)))
    if v.counterexample is not None:
        cx = v.counterexample
        assignment = _assignment_of(cx.machine)
        payload["counterexample"] = {
            "machine": _machine_json(cx.machine),
            "assignment": assignment,
            "left": trace_json(cx.left), "right": trace_json(cx.right)}
        if assignment is not None:
            lines.append("counterexample assignment: " + ", ".join(
                f"{a}={_tv(r)}" for a, r in sorted(assignment.items())))
        else:
            lines.append("counterexample machine:")
            lines.append(valuation.render_machine(cx.machine).rstrip())
        lines.append("left:  " + trace_text(cx.left))
        lines.append("right: " + trace_text(cx.right))
    lines.extend(f"note: {n}" for n in v.notes)
    return (0 if v.equivalent else 1), "\n".join(lines), payload


def cmd_equiv(args):
    p, q = _prop(args.left), _prop(args.right)
    cls = _semantics(args.semantics)
    v = analysis.equiv_class(p, q, cls, args.max_states, args.fuel)

    def text(t):
        return f"{' '.join(f'{a}={_tv(r)}' for a, _, r in t.steps)} -> {_tv(t.result)}"
    return _verdict(v, _trace_json, text)


def cmd_iseq_fmt(args):
    s = _iseq(args.iseq)
    text = pga.render_iseq(s)
    return 0, text, {"iseq": text, "instructions": len(s)}


def cmd_thread(args):
    t = pga.thread_extract(_iseq(args.iseq))
    text = pga.render_thread(t)
    return 0, text, {"thread": text}


def cmd_size(args):
    n = pga.iseq_size(_iseq(args.iseq))
    return 0, str(n), {"size": n}


def _run_json(r):
    return {"outcome": r.outcome, "final_state": r.final_state,
            "trace": [[a, _tv(rep), "work" if w else "test"] for a, rep, w in r.trace]}


def _run_text(r):
    steps = " ".join(f"{a}={_tv(rep)}{'*' if w else ''}" for a, rep, w in r.trace)
    return f"{r.outcome}: {steps or '(no actions)'}"


def cmd_exec(args):
    r = pga.exec_iseq(_iseq(args.iseq), _machine(args.machine), args.state)
    text = _run_text(r) + f"\nfinal state: {r.final_state}"
    return 0, text, _run_json(r)


def cmd_iseq_equiv(args):
    x, y = _iseq(args.left), _iseq(args.right)
    cls = _semantics(args.semantics)
    v = pga.equiv_iseq(x, y, cls, args.max_states, args.fuel)
    return _verdict(v, _run_json, _run_text)


def cmd_compile(args):
    s = _iseq(args.iseq)
    out = compiler.eliminate_nonatomic(s)
    text = pga.render_iseq(out)
    return 0, text, {"iseq": text, "size": pga.iseq_size(out),
                     "input_size": pga.iseq_size(s)}


def cmd_minimize(args):
    s = _iseq(args.iseq)
    cls = _semantics(args.semantics)
    alphabet = set(args.alphabet.split(",")) if args.alphabet else set(pga.iseq_atoms(s))
    alphabet.discard("")
    max_size = args.max_size or pga.iseq_size(s)
    stats = {}
    try:
        out = compiler.minimize(s, cls, alphabet, max_size, args.non_repetitive,
                                args.body_budget, args.max_states, args.fuel,
                                stats=stats)
    except NoneWithinBudget:
        return 1, f"no equivalent sequence of size <= {max_size}", \
            {"found": False, "max_size": max_size, "examined": stats.get("examined")}
    text = pga.render_iseq(out)
    return 0, f"{text}\nsize: {pga.iseq_size(out)}", \
        {"found": True, "iseq": text, "size": pga.iseq_size(out),
         "examined": stats.get("examined")}


def cmd_classify(args):
    model = _model(args.model)
    report = classify.classify_atoms(model)
    lines = [f"{a}: {v}" for a, v in report.per_atom.items()]
    lines.append("steering atoms: " + (", ".join(sorted(report.steering_set)) or "(none)"))
    lines.append(f"context: {report.context}")
    payload = {"atoms": {a: {"kind": v.kind, "rule": v.rule}
                         for a, v in report.per_atom.items()},
               "steering_set": sorted(report.steering_set),
               "context": report.context}
    code = 0
    if args.iseq:
        occ = classify.classify_occurrences(_iseq(args.iseq), model)
        payload["occurrences"] = []
        for o, v in occ.items():
            states = sorted(v.states, key=model.machine.states.index)
            payload["occurrences"].append({
                "instruction": o.instruction, "index": o.index, "atom": o.atom,
                "verdict": v.verdict, "states": states, "note": v.note})
            note = f" ({v.note})" if v.note else ""
            lines.append(f"instruction {o.instruction} occurrence {o.index} "
                         f"[{o.atom}]: {v.verdict} at {{{', '.join(states)}}}{note}")
            if v.verdict == classify.NON_MARGINAL:
                code = 1
    return code, "\n".join(lines), payload


def cmd_detect(args):
    model = _model(args.model)
    found, witness = classify.detectability(model, args.a, args.b)
    if found:
        text = f"detectable: {args.b} observes {args.a} at {witness}"
    else:
        text = f"not detectable: {args.b} never observes {args.a}"
    return 0, text, {"detectable": found, "witness": witness}


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="steerlab", description=__doc__.split("\n")[0])
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    ap.add_argument("-v", "--verbose", action="store_true",
                    help="progress counters on stderr")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    def bounds(p):
        p.add_argument("--max-states", type=int, default=3)
        p.add_argument("--fuel", type=int, default=12)

    p = add("fmt", cmd_fmt, "normalize the rendering of a statement")
    p.add_argument("prop")
    p.add_argument("--full-parens", action="store_true")
    p = add("basic-form", cmd_basic_form, "basic form of a statement")
    p.add_argument("prop")
    p.add_argument("--rewrite", action="store_true",
                   help="also rewrite stepwise and report the step count")
    p = add("eval", cmd_eval, "evaluate against a machine")
    p.add_argument("prop")
    p.add_argument("--machine")
    p.add_argument("--state")
    p = add("retry-eval", cmd_retry_eval, "re-evaluate until reply-stable")
    p.add_argument("prop")
    p.add_argument("--machine")
    p.add_argument("--retries", type=int, default=3)
    p = add("check-class", cmd_check_class, "check a machine's valuation class")
    p.add_argument("--machine")
    p.add_argument("--semantics", "--class", dest="semantics", required=True)
    p.add_argument("--fuel", type=int, default=12)
    p.add_argument("--work-reset", action="store_true")
    p = add("analyze", cmd_analyze, "repetitiveness with a witness")
    p.add_argument("prop")
    p = add("normalize", cmd_normalize, "memorizing normal form")
    p.add_argument("prop")
    p = add("sat", cmd_sat, "satisfiability under memorizing semantics")
    p.add_argument("prop")
    p = add("equiv", cmd_equiv, "equivalence of two statements")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--semantics", default="free")
    bounds(p)
    p = add("iseq-fmt", cmd_iseq_fmt, "normalize an instruction sequence")
    p.add_argument("iseq")
    p = add("thread", cmd_thread, "extract the thread")
    p.add_argument("iseq")
    p = add("size", cmd_size, "token size of an instruction sequence")
    p.add_argument("iseq")
    p = add("exec", cmd_exec, "run an instruction sequence on a machine")
    p.add_argument("iseq")
    p.add_argument("--machine")
    p.add_argument("--state")
    p = add("iseq-equiv", cmd_iseq_equiv, "equivalence of instruction sequences")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--semantics", default="free")
    bounds(p)
    p = add("compile", cmd_compile, "eliminate non-atomic steering points")
    p.add_argument("iseq")
    p = add("minimize", cmd_minimize, "shortest equivalent instruction sequence")
    p.add_argument("iseq")
    p.add_argument("--semantics", default="static")
    p.add_argument("--alphabet", help="comma-separated atoms (default: those of ISEQ)")
    p.add_argument("--max-size", type=int)
    p.add_argument("--body-budget", type=int, default=7)
    p.add_argument("--non-repetitive", action="store_true")
    bounds(p)
    p = add("classify", cmd_classify, "steering-atom classification")
    p.add_argument("iseq", nargs="?", help="also classify occurrences in ISEQ")
    p.add_argument("--model")
    p = add("detect", cmd_detect, "can B observe the side effect of A")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--model")
    return ap


def _positive(args):
    for name in ("max_states", "fuel", "max_size", "body_budget"):
        value = getattr(args, name, None)
        if value is not None and value <= 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    if getattr(args, "retries", 0) < 0:
        raise UsageError("--retries must be nonnegative")


def _shield(argv):
    """Keep arguments such as ``-a;!`` from being read as options; a
    leading space is ignored by the parsers but not treated as a flag."""
    out = []
    for arg in argv:
        if arg.startswith("-") and not arg.startswith("--") \
                and arg not in ("-h", "-v"):
            arg = " " + arg
        out.append(arg)
    return out


def main(argv=None) -> int:
    ap = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = ap.parse_args(_shield(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                            format="%(name)s: %(message)s")
    try:
        _positive(args)
        code, text, payload = args.func(args)
    except UsageError as exc:
        print(f"steerlab: {exc}", file=sys.stderr)
        if exc.grammar:
            print("grammar:\n" + GRAMMAR[exc.grammar], file=sys.stderr)
        return 2
    except (UndeclaredAtom, RepetitiveInput, ValueError) as exc:
        print(f"steerlab: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"steerlab: {exc}", file=sys.stderr)
        if args.json:
            print(json.dumps({"schema_version": SCHEMA_VERSION,
                              "command": args.command, "budget_exhausted": True,
                              "cap": exc.cap}, sort_keys=True))
        return 3
    if args.json:
        out = {"schema_version": SCHEMA_VERSION, "command": args.command}
        out.update(payload)
        print(json.dumps(out, sort_keys=True))
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
