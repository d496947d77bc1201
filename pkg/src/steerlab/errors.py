"""Exception types shared across the package."""

from __future__ import annotations


class ParseError(ValueError):
    """Raised when a propositional statement, instruction sequence or
    machine/model file does not match its grammar."""

    def __init__(self, message: str, pos: int = 0, expected=(), text: str = ""):
        self.pos = pos
        self.expected = frozenset(expected)
        self.text = text
        detail = message
        if self.expected:
            detail += " (expected one of: " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(f"{detail} at position {pos}")


class UndeclaredAtom(KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(name)

    def __str__(self):
        return f"atom {self.name!r} is not declared in the machine"


class BudgetExceeded(RuntimeError):
    """A bounded search hit its candidate cap."""

    def __init__(self, cap: int, what: str = "candidates"):
        self.cap = cap
        super().__init__(f"search budget of {cap} {what} exhausted")


class RetriesExhausted(RuntimeError):
    def __init__(self, traces):
        self.traces = list(traces)
        super().__init__(
            f"no reply-stable evaluation after {len(self.traces)} attempt(s)")


class RepetitiveInput(ValueError):
    pass


class NoneWithinBudget(LookupError):
    pass
