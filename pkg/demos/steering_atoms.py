"""Which actions of a small device model may be used as steering atoms."""

from pathlib import Path

from steerlab.classify import (classify_atoms, classify_occurrences,
                               detectability, load_model)
from steerlab.pga import parse_iseq

MODEL = Path(__file__).parent / "data" / "ladder.model"


def main():
    model = load_model(MODEL)
    report = classify_atoms(model)
    for atom, verdict in report.per_atom.items():
        print(f"{atom}: {verdict}")
    print("steering atoms:", ", ".join(sorted(report.steering_set)))
    print()
    for text in ["+(p && o);w;!", "w;+o;!", "!;+o;!"]:
        print(text)
        for occ, v in sorted(classify_occurrences(parse_iseq(text), model).items()):
            note = f" ({v.note})" if v.note else ""
            print(f"  {occ.atom} in instruction {occ.instruction}: {v.verdict}"
                  f" at {sorted(v.states)}{note}")
    print()
    for a, b in [("w", "p"), ("p", "w"), ("m", "o")]:
        seen, state = detectability(model, a, b)
        print(f"can {b} observe {a}? {seen}" + (f" (from {state})" if seen else ""))


if __name__ == "__main__":
    main()
