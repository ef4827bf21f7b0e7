import itertools
import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from uone.formula import FragmentProfile, ParseError, check_fragment, parse_formula  # noqa: E402
from uone.structures import FiniteStructure, canonical_order, model_check  # noqa: E402

DATA = Path(__file__).parent / "data"


def random_ordered_structure(vocab, size, rng):
    rels = {"<": canonical_order(size)}
    for name in vocab.names:
        if name == "<":
            continue
        p = rng.random()
        rels[name] = {t for t in itertools.product(range(size), repeat=vocab.arity(name)) if rng.random() < p}
    return FiniteStructure(vocab, size, rels)


def random_models(nf, count, seed, max_size=6, tries=50_000):
    """Ordered models of nf found by random sampling with a fixed seed."""
    rng = random.Random(seed)
    out = []
    for _ in range(tries):
        A = random_ordered_structure(nf.vocab, rng.randint(1, max_size), rng)
        if model_check(A, nf.formula()):
            out.append(A)
            if len(out) == count:
                break
    return out


def read_corpus(name):
    lines = (DATA / name).read_text().splitlines()
    return [l for l in lines if l.strip() and not l.startswith("#")]


def read_fragment_corpus():
    rows = []
    for line in (DATA / "fragment_corpus.tsv").read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        mode, expected, text = line.split("\t")
        rows.append((mode, expected, text))
    return rows


def classify(mode, text):
    try:
        f = parse_formula(text)
    except ParseError:
        return "parse"
    report = check_fragment(f, FragmentProfile.from_name(mode))
    return "accept" if report.accepted else min(report.kinds())


@pytest.fixture
def rng():
    return random.Random(20260101)


@pytest.fixture
def acceptance_line(request):
    """Record one criterion result for the summary printed at the end of the run."""
    lines = request.config.__dict__.setdefault("uone_acceptance", {})

    def record(label, ok, detail):
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines[str(label)] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get("uone_acceptance")
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for label in sorted(lines):
            terminalreporter.write_line(lines[label])
