"""1-types, k-tables, extremal realizations and royalty."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .formula import (
    And,
    Atom,
    Eq,
    Formula,
    Not,
    Vocabulary,
    conj,
    parse_formula,
    render_formula,
)
from .structures import BudgetExceeded, FiniteStructure, StructureError

TYPE_VAR = "v1"


class TypeBudgetExceeded(BudgetExceeded):
    pass


@dataclass(frozen=True, order=True)
class OneType:
    """A 1-type over ``universe`` (relation names, sorted). ``bits[i]`` says whether
    R_i(v1,...,v1) holds. Equality v1 = v1 is implicit and always positive."""

    universe: tuple[str, ...]
    bits: tuple[bool, ...]

    def __post_init__(self):
        if len(self.universe) != len(self.bits):
            raise ValueError("universe and bits differ in length")

    @classmethod
    def from_positive(cls, universe: Iterable[str], positive: Iterable[str]) -> "OneType":
        universe = tuple(sorted(universe))
        pos = set(positive)
        return cls(universe, tuple(name in pos for name in universe))

    @property
    def positive(self) -> frozenset[str]:
        return frozenset(n for n, b in zip(self.universe, self.bits) if b)

    def holds(self, rel: str) -> bool:
        return self.bits[self.universe.index(rel)]

    def literals(self, var: str, vocab: Vocabulary) -> list[Formula]:
        out = []
        for name, bit in zip(self.universe, self.bits):
            atom = Atom(name, (var,) * vocab.arity(name))
            out.append(atom if bit else Not(atom))
        return out

    def formula(self, var: str, vocab: Vocabulary) -> Formula:
        return conj(self.literals(var, vocab), var)

    def render(self, vocab: Vocabulary) -> str:
        return render_formula(self.formula(TYPE_VAR, vocab))

    def key(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def __repr__(self):
        pos = ",".join(sorted(self.positive)) or "-"
        return f"OneType[{pos}]"


def parse_one_type(text: str, vocab: Vocabulary) -> OneType:
    f = parse_formula(text)
    literals = f.parts if isinstance(f, And) else (f,)
    seen: dict[str, bool] = {}
    for lit in literals:
        if isinstance(lit, Eq):
            continue
        neg = isinstance(lit, Not)
        atom = lit.body if neg else lit
        if not isinstance(atom, Atom) or set(atom.args) != {TYPE_VAR}:
            raise ValueError(f"not a 1-type literal: {render_formula(lit)}")
        seen[atom.rel] = not neg
    if set(seen) != set(vocab.names):
        raise ValueError(f"1-type text does not cover the vocabulary: {text!r}")
    return OneType.from_positive(vocab.names, [r for r, b in seen.items() if b])


def enumerate_one_types(vocab: Vocabulary, budget: int = 1 << 16) -> Iterator[OneType]:
    """All 1-types over ``vocab`` in canonical order (all-negative first)."""
    count = 1 << len(vocab)
    if count > budget:
        raise TypeBudgetExceeded(f"{count} one-types exceed the budget of {budget}")
    for bits in itertools.product((False, True), repeat=len(vocab)):
        yield OneType(vocab.names, bits)


def irreflexive_types(vocab: Vocabulary, order_symbol: str = "<", budget: int = 1 << 16) -> list[OneType]:
    """1-types containing ~(v1 < v1)."""
    return [t for t in enumerate_one_types(vocab, budget) if order_symbol not in t.positive]


def type_of(A: FiniteStructure, a: int, vocab: Vocabulary | None = None) -> OneType:
    vocab = vocab or A.vocab
    if not (0 <= a < A.size):
        raise StructureError(f"element {a} outside domain of size {A.size}")
    return OneType(vocab.names, tuple((a,) * vocab.arity(n) in A.relations[n] for n in vocab.names))


def types_of(A: FiniteStructure, vocab: Vocabulary | None = None) -> list[OneType]:
    vocab = vocab or A.vocab
    names = vocab.names
    rels = [(A.relations[n], vocab.arity(n)) for n in names]
    return [OneType(names, tuple((a,) * ar in rel for rel, ar in rels)) for a in range(A.size)]


# --------------------------------------------------------------------------
# Tables


@lru_cache(maxsize=None)
def table_atoms(vocab: Vocabulary, k: int, budget: int = 1 << 14) -> tuple[tuple[str, tuple[int, ...]], ...]:
    """Atoms R(v_p1..v_pr) whose variable set is exactly {v1..vk}, as (name, positions)."""
    out = []
    for name, arity in vocab.symbols:
        if arity < k:
            continue
        for pattern in itertools.product(range(k), repeat=arity):
            if len(set(pattern)) == k:
                out.append((name, pattern))
                if len(out) > budget:
                    raise TypeBudgetExceeded(f"more than {budget} {k}-table atoms")
    return tuple(out)


@dataclass(frozen=True, order=True)
class KTable:
    """A k-table over ``vocab``: one polarity per atom of ``table_atoms(vocab, k)``."""

    vocab: Vocabulary
    k: int
    bits: tuple[bool, ...]

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("tables have k >= 2")
        if len(self.bits) != len(table_atoms(self.vocab, self.k)):
            raise ValueError("bit vector does not match the atom universe")

    @property
    def positive(self) -> frozenset:
        return frozenset(a for a, b in zip(table_atoms(self.vocab, self.k), self.bits) if b)

    def literals(self, vars: tuple[str, ...]) -> list[Formula]:
        if len(vars) != self.k:
            raise ValueError(f"need {self.k} variables")
        out = []
        for (name, pattern), bit in zip(table_atoms(self.vocab, self.k), self.bits):
            atom = Atom(name, tuple(vars[p] for p in pattern))
            out.append(atom if bit else Not(atom))
        return out

    def formula(self, vars: tuple[str, ...]) -> Formula:
        return conj(self.literals(vars), vars[0])

    def render(self) -> str:
        return render_formula(self.formula(tuple(f"v{i + 1}" for i in range(self.k))))

    def permuted(self, perm: tuple[int, ...]) -> "KTable":
        """Table of (a_perm[0], ..., a_perm[k-1]) given this table of (a_0..a_{k-1})."""
        atoms = table_atoms(self.vocab, self.k)
        pos = {a: b for a, b in zip(atoms, self.bits)}
        bits = tuple(pos[(name, tuple(perm[p] for p in pattern))] for name, pattern in atoms)
        return KTable(self.vocab, self.k, bits)


def table_of(A: FiniteStructure, elements: tuple[int, ...], vocab: Vocabulary | None = None) -> KTable:
    vocab = vocab or A.vocab
    elements = tuple(elements)
    k = len(elements)
    if k < 2:
        raise ValueError("tables need at least two elements")
    if len(set(elements)) != k:
        raise ValueError("table_of needs pairwise distinct elements")
    for e in elements:
        if not (0 <= e < A.size):
            raise StructureError(f"element {e} outside the domain")
    bits = tuple(
        tuple(elements[p] for p in pattern) in A.relations[name] for name, pattern in table_atoms(vocab, k)
    )
    return KTable(vocab, k, bits)


def enumerate_tables(vocab: Vocabulary, k: int, budget: int = 1 << 16) -> Iterator[KTable]:
    atoms = table_atoms(vocab, k)
    if (1 << len(atoms)) > budget:
        raise TypeBudgetExceeded(f"{1 << len(atoms)} {k}-tables exceed the budget of {budget}")
    for bits in itertools.product((False, True), repeat=len(atoms)):
        yield KTable(vocab, k, bits)


# --------------------------------------------------------------------------
# Extremal realizations and royalty


def extremal_realization(A: FiniteStructure, alpha: OneType, kind: str = "min", order_symbol: str = "<") -> int | None:
    """An element satisfying min_alpha (or max_alpha), evaluated directly:
    min_alpha(x) := alpha(x) & forall y ((alpha(y) & x != y) -> x < y).
    Works for any binary relation, linear or not. Returns the least such element."""
    if kind not in ("min", "max"):
        raise ValueError("kind is 'min' or 'max'")
    vocab = A.vocab.restrict(alpha.universe)
    tps = types_of(A, vocab)
    order = A.relations[order_symbol]
    realizers = [a for a in A.domain if tps[a] == alpha]
    for x in realizers:
        if kind == "min":
            ok = all((x, y) in order for y in realizers if y != x)
        else:
            ok = all((y, x) in order for y in realizers if y != x)
        if ok:
            return x
    return None


@dataclass(frozen=True)
class RoyaltyReport:
    width: int
    counts: dict  # OneType -> realization count capped at width
    kings: frozenset[int]
    pawns: frozenset[int]
    royal_types: frozenset[OneType]

    def is_king(self, a: int) -> bool:
        return a in self.kings


def classify_royalty(A: FiniteStructure, nf_or_width, vocab: Vocabulary | None = None) -> RoyaltyReport:
    """Royal types have at most n-1 realizations; their elements are kings."""
    if isinstance(nf_or_width, int):
        n = nf_or_width
    else:
        n = nf_or_width.width
        vocab = vocab or nf_or_width.vocab
        missing = set(vocab.names) - set(A.vocab.names)
        if missing:
            raise StructureError(f"structure lacks symbols {sorted(missing)}")
    vocab = vocab or A.vocab
    tps = types_of(A, vocab)
    counts = Counter(tps)
    royal = frozenset(t for t, c in counts.items() if c <= n - 1)
    kings = frozenset(a for a in A.domain if tps[a] in royal)
    pawns = frozenset(A.domain) - kings
    bound = (n - 1) * (2 ** len(vocab))
    assert len(kings) <= bound, "king bound violated"
    return RoyaltyReport(n, {t: min(c, n) for t, c in counts.items()}, kings, pawns, royal)
