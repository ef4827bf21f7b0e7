"""Compute least ordered model sizes (up to 4) for a corpus and write them as JSON.

Small vocabularies are enumerated with the tree-walking evaluator in tests/naive.py;
larger ones are grounded to SAT with the order fixed. The method used is recorded
next to each answer.

    python3 scripts/freeze_oracle.py tests/data/corpus50.u1 tests/data/corpus50_oracle.json
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from naive import all_structures, holds  # noqa: E402

from uone.formula import Vocabulary, infer_vocabulary, parse_formula  # noqa: E402
from uone.grounding import find_model  # noqa: E402
from uone.structures import canonical_order  # noqa: E402

ENUMERATION_BITS = 16


def least_size(f, max_size):
    vocab = infer_vocabulary(f).union(Vocabulary.of({"<": 2}))
    methods = set()
    for n in range(1, max_size + 1):
        order = {"<": canonical_order(n)}
        bits = sum(n ** vocab.arity(r) for r in vocab.names if r != "<")
        if bits <= ENUMERATION_BITS:
            methods.add("enumeration")
            found = any(holds(A, f) for A in all_structures(vocab, n, order))
        else:
            methods.add("grounding")
            found = find_model(vocab, n, [f], fixed=order) is not None
        if found:
            return n, sorted(methods)
    return None, sorted(methods)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("corpus")
    ap.add_argument("out")
    ap.add_argument("--max-size", type=int, default=4)
    args = ap.parse_args(argv)
    rows = []
    for line in Path(args.corpus).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        size, methods = least_size(parse_formula(line), args.max_size)
        rows.append({"formula": line.strip(), "least_ordered_model": size, "method": methods})
        print(size, line.strip())
    Path(args.out).write_text(json.dumps({"max_size": args.max_size, "entries": rows}, indent=1) + "\n")


if __name__ == "__main__":
    main()
