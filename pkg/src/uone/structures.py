"""Finite relational structures: model checking, order classes, enumeration, text format."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .formula import (
    And,
    Atom,
    Eq,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Vocabulary,
    free_vars,
    infer_vocabulary,
)

ORDER_CLASSES = ("O", "WO", "Ofin")


class StructureError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteStructure:
    """Domain {0..size-1}; ``relations`` maps every vocabulary symbol to a set of tuples."""

    vocab: Vocabulary
    size: int
    relations: Mapping[str, frozenset]

    def __post_init__(self):
        if self.size < 0:
            raise StructureError("negative domain size")
        rels = {}
        for name in self.vocab.names:
            arity = self.vocab.arity(name)
            tuples = frozenset(tuple(t) for t in self.relations.get(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise StructureError(f"{name}: tuple {t} does not have arity {arity}")
                if any(not (0 <= e < self.size) for e in t):
                    raise StructureError(f"{name}: tuple {t} out of range for domain {self.size}")
            rels[name] = tuples
        extra = set(self.relations) - set(self.vocab.names)
        if extra:
            raise StructureError(f"relations outside the vocabulary: {sorted(extra)}")
        object.__setattr__(self, "relations", MappingProxyType(rels))

    def __eq__(self, other):
        return (
            isinstance(other, FiniteStructure)
            and self.vocab.symbols == other.vocab.symbols
            and self.size == other.size
            and dict(self.relations) == dict(other.relations)
        )

    def __hash__(self):
        return hash((self.vocab.symbols, self.size, tuple(sorted((k, len(v)) for k, v in self.relations.items()))))

    @property
    def domain(self) -> range:
        return range(self.size)

    def holds(self, rel: str, *args: int) -> bool:
        return tuple(args) in self.relations[rel]

    def restrict(self, elements: Iterable[int]) -> "FiniteStructure":
        """Induced substructure, relabelled 0..k-1 in the order given."""
        elements = list(elements)
        if len(set(elements)) != len(elements):
            raise StructureError("restrict needs distinct elements")
        index = {e: i for i, e in enumerate(elements)}
        rels = {
            name: {tuple(index[e] for e in t) for t in tuples if all(e in index for e in t)}
            for name, tuples in self.relations.items()
        }
        return FiniteStructure(self.vocab, len(elements), rels)

    def relabel(self, perm: list[int]) -> "FiniteStructure":
        """Rename element i to perm[i]."""
        rels = {name: {tuple(perm[e] for e in t) for t in tuples} for name, tuples in self.relations.items()}
        return FiniteStructure(self.vocab, self.size, rels)

    def expand(self, extra_vocab: Mapping[str, int], extra: Mapping[str, Iterable]) -> "FiniteStructure":
        vocab = self.vocab.with_symbols(extra_vocab)
        rels = dict(self.relations)
        rels.update({k: frozenset(tuple(t) for t in v) for k, v in extra.items()})
        return FiniteStructure(vocab, self.size, rels)

    def reduct(self, names: Iterable[str]) -> "FiniteStructure":
        vocab = self.vocab.restrict(names)
        return FiniteStructure(vocab, self.size, {k: v for k, v in self.relations.items() if k in vocab})

    def with_vocab(self, vocab: Vocabulary) -> "FiniteStructure":
        """Same interpretations over a larger vocabulary; new symbols are empty."""
        vocab = self.vocab.union(vocab)
        return FiniteStructure(vocab, self.size, dict(self.relations))

    def order_list(self, sym: str = "<") -> list[int]:
        """Elements sorted by a strict linear order ``sym``."""
        if not class_membership(self, sym, "Ofin"):
            raise StructureError(f"{sym} is not a strict linear order")
        below = {e: 0 for e in self.domain}
        for a, b in self.relations[sym]:
            below[b] += 1
        return sorted(self.domain, key=below.__getitem__)

    def __repr__(self):
        return f"FiniteStructure(size={self.size}, vocab={self.vocab.render()!r})"


# --------------------------------------------------------------------------
# Model checking by compilation to Python closures


class _Compiler:
    def __init__(self, rel_index: dict[str, int], unary: set[str]):
        self.rel_index = rel_index
        self.unary = unary
        self.counter = 0

    def var(self, scope: dict[str, str], name: str) -> str:
        if name not in scope:
            raise StructureError(f"variable {name} is not assigned")
        return scope[name]

    def emit(self, f: Formula, scope: dict[str, str]) -> str:
        if isinstance(f, Atom):
            idx = self.rel_index.get(f.rel)
            if idx is None:
                raise StructureError(f"relation {f.rel} not in the structure's vocabulary")
            args = [self.var(scope, v) for v in f.args]
            if f.rel in self.unary:
                return f"({args[0]} in R[{idx}])"
            return f"(({','.join(args)},) in R[{idx}])"
        if isinstance(f, Eq):
            return f"({self.var(scope, f.left)} == {self.var(scope, f.right)})"
        if isinstance(f, Not):
            return f"(not {self.emit(f.body, scope)})"
        if isinstance(f, And):
            return "(" + " and ".join(self.emit(p, scope) for p in f.parts) + ")"
        if isinstance(f, Or):
            return "(" + " or ".join(self.emit(p, scope) for p in f.parts) + ")"
        if isinstance(f, Implies):
            return f"((not {self.emit(f.left, scope)}) or {self.emit(f.right, scope)})"
        if isinstance(f, Iff):
            return f"({self.emit(f.left, scope)} == {self.emit(f.right, scope)})"
        inner = dict(scope)
        names = []
        for v in f.vars:
            self.counter += 1
            inner[v] = f"v{self.counter}"
            names.append(inner[v])
        body = self.emit(f.body, inner)
        loops = " ".join(f"for {n} in D" for n in names)
        fn = "any" if f.kind == "exists" else "all"
        return f"{fn}({body} {loops})"


@lru_cache(maxsize=4096)
def _compile(f: Formula, free: tuple[str, ...], rels: tuple[tuple[str, int], ...]):
    rel_index = {name: i for i, (name, _) in enumerate(rels)}
    unary = {name for name, arity in rels if arity == 1}
    comp = _Compiler(rel_index, unary)
    scope = {v: f"a{i}" for i, v in enumerate(free)}
    body = comp.emit(f, scope)
    params = "".join(f", a{i}" for i in range(len(free)))
    src = f"lambda R, D{params}: {body}"
    return eval(src, {"any": any, "all": all})  # noqa: S307 - generated from a typed AST


def relation_data(A: FiniteStructure) -> tuple:
    """Relation sets in vocabulary order; unary relations flattened to element sets."""
    cached = A.__dict__.get("_rel_data")
    if cached is None:
        data = []
        for name, arity in A.vocab.symbols:
            tuples = A.relations[name]
            data.append(frozenset(t[0] for t in tuples) if arity == 1 else tuples)
        cached = tuple(data)
        object.__setattr__(A, "_rel_data", cached)
    return cached


def compile_formula(A: FiniteStructure, f: Formula, free: tuple[str, ...]):
    """Return a predicate ``g(*elements)`` evaluating ``f`` in ``A`` with ``free`` bound positionally."""
    fn = _compile(f, tuple(free), A.vocab.symbols)
    R, D = relation_data(A), range(A.size)
    return lambda *args: fn(R, D, *args)


def model_check(A: FiniteStructure, f: Formula, assignment: Mapping[str, int] | None = None) -> bool:
    """Tarskian truth of ``f`` in ``A``. Quantified tuples may repeat elements."""
    assignment = dict(assignment or {})
    missing = free_vars(f) - set(assignment)
    if missing:
        raise StructureError(f"free variables without a value: {sorted(missing)}")
    vocab = infer_vocabulary(f)
    for name, arity in vocab.symbols:
        if name not in A.vocab or A.vocab.arity(name) != arity:
            raise StructureError(f"vocabulary mismatch on {name}/{arity}")
    for v, e in assignment.items():
        if not (0 <= e < A.size):
            raise StructureError(f"{v} assigned {e}, outside the domain")
    free = tuple(sorted(assignment))
    fn = compile_formula(A, f, free)
    return bool(fn(*(assignment[v] for v in free)))


def class_membership(A: FiniteStructure, sym: str = "<", K: str = "Ofin") -> bool:
    """Whether ``sym`` is a strict linear order on A. On finite domains the classes O, WO
    and Ofin coincide, so ``K`` only gets validated."""
    if K not in ORDER_CLASSES:
        raise ValueError(f"unknown class {K}")
    if sym not in A.vocab or A.vocab.arity(sym) != 2:
        raise StructureError(f"{sym} is not a binary symbol of the structure")
    rel = A.relations[sym]
    n = A.size
    for a in range(n):
        if (a, a) in rel:
            return False
        for b in range(a + 1, n):
            if ((a, b) in rel) == ((b, a) in rel):
                return False
    for a, b in rel:
        for c in range(n):
            if (b, c) in rel and (a, c) not in rel:
                return False
    return True


def canonical_order(size: int) -> frozenset:
    return frozenset((i, j) for i in range(size) for j in range(i + 1, size))


def enumerate_ordered_structures(
    vocab: Vocabulary, size: int, fix_order: bool = True, budget_bits: int = 22, order_symbol: str = "<"
) -> Iterator[FiniteStructure]:
    """All vocab-structures on {0..size-1}; with ``fix_order`` the order symbol is pinned to
    0 < 1 < ... < size-1."""
    slots = []
    for name, arity in vocab.symbols:
        if fix_order and name == order_symbol:
            continue
        slots.append((name, list(itertools.product(range(size), repeat=arity))))
    bits = sum(len(tuples) for _, tuples in slots)
    if bits > budget_bits:
        raise BudgetExceeded(f"{bits} free bits exceed the enumeration budget of {budget_bits}")
    fixed = {order_symbol: canonical_order(size)} if fix_order and order_symbol in vocab else {}
    choices = [
        [frozenset(t for t, keep in zip(tuples, mask) if keep) for mask in itertools.product((False, True), repeat=len(tuples))]
        for _, tuples in slots
    ]
    for combo in itertools.product(*choices):
        rels = dict(fixed)
        rels.update({name: ext for (name, _), ext in zip(slots, combo)})
        yield FiniteStructure(vocab, size, rels)


def count_ordered_structures(vocab: Vocabulary, size: int, fix_order: bool = True, order_symbol: str = "<") -> int:
    return 2 ** sum(size**a for name, a in vocab.symbols if not (fix_order and name == order_symbol))


# --------------------------------------------------------------------------
# Text format

_REL_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*|<1|<2|<)\s*=\s*\{(.*)\}\s*$")
_TUPLE = re.compile(r"\(([^()]*)\)")


def write_structure(A: FiniteStructure) -> str:
    lines = [f"domain={A.size}", f"# vocabulary: {A.vocab.render()}"]
    for name in A.vocab.names:
        tuples = sorted(A.relations[name])
        body = ",".join("(" + ",".join(map(str, t)) + ")" for t in tuples)
        lines.append(f"{name} = {{{body}}}")
    return "\n".join(lines) + "\n"


def read_structure(text: str, vocab: Vocabulary | None = None) -> FiniteStructure:
    """Parse the structure text format. Without ``vocab`` arities are read off the
    tuples, so an empty relation then needs a vocabulary to fix its arity."""
    size = None
    rels: dict[str, set] = {}
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        hint = re.fullmatch(r"\s*#\s*vocabulary:(.*)", raw)
        if hint and declared is None:
            declared = Vocabulary.parse(hint.group(1).strip())
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if size is None:
            m = re.fullmatch(r"domain\s*=\s*(\d+)", line)
            if not m:
                raise StructureError(f"line {lineno}: expected 'domain=N'")
            size = int(m.group(1))
            continue
        m = _REL_LINE.match(line)
        if not m:
            raise StructureError(f"line {lineno}: malformed relation line {raw!r}")
        name, body = m.group(1), m.group(2)
        if name in rels:
            raise StructureError(f"line {lineno}: relation {name} given twice")
        tuples = set()
        rest = _TUPLE.sub("", body).replace(",", "").strip()
        if rest:
            raise StructureError(f"line {lineno}: unexpected text {rest!r} inside braces")
        for tm in _TUPLE.finditer(body):
            parts = [p.strip() for p in tm.group(1).split(",")]
            if not all(p.isdigit() for p in parts):
                raise StructureError(f"line {lineno}: bad tuple ({tm.group(1)})")
            tuples.add(tuple(int(p) for p in parts))
        rels[name] = tuples
    if size is None:
        raise StructureError("missing 'domain=N' line")
    if vocab is None and declared is not None:
        vocab = declared
    if vocab is None:
        arities = {}
        for name, tuples in rels.items():
            lengths = {len(t) for t in tuples}
            if len(lengths) > 1:
                raise StructureError(f"{name}: tuples of different lengths")
            if not lengths:
                raise StructureError(f"{name}: empty relation needs a vocabulary to fix its arity")
            arities[name] = lengths.pop()
        vocab = Vocabulary.of(arities)
    else:
        unknown = set(rels) - set(vocab.names)
        if unknown:
            raise StructureError(f"relations outside the vocabulary: {sorted(unknown)}")
    for name, tuples in rels.items():
        for t in tuples:
            if any(e >= size for e in t):
                raise StructureError(f"{name}: tuple {t} out of range for domain {size}")
    return FiniteStructure(vocab, size, rels)


def structure_from_order(vocab: Vocabulary, size: int, rels: Mapping[str, Iterable] | None = None, order_symbol="<"):
    """Convenience: a structure whose order symbol is 0 < 1 < ... < size-1."""
    data = {k: set(map(tuple, v)) for k, v in (rels or {}).items()}
    data[order_symbol] = set(canonical_order(size))
    return FiniteStructure(vocab, size, data)
