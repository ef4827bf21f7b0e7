"""Cloning extensions, courts, canonical partitions and canonical admissibility tuples
for finite ordered models."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .admissibility import AdmissibilityTuple
from .axioms import BOT_SYM, D_SYM, K_SYM, TOP_SYM, axiom_symbols, u_sym
from .formula import live_variables
from .normal_form import ORDER, NormalFormSentence
from .structures import (
    FiniteStructure,
    StructureError,
    canonical_order,
    class_membership,
    compile_formula,
    model_check,
)
from .types_tables import OneType, classify_royalty, table_atoms, types_of

# Clone count used for canonical tuples. Three clones leave a one-element interval after
# a court pawn that is the last original of its type, which breaks the last axiom; four
# clones always leave two.
CANONICAL_CLONES = 4


class NotAModel(ValueError):
    pass


def _over(A: FiniteStructure, nf: NormalFormSentence) -> FiniteStructure:
    missing = set(nf.vocab.names) - set(A.vocab.names)
    if missing:
        raise StructureError(f"structure lacks symbols {sorted(missing)}")
    return A.reduct(nf.vocab.names)


def _require_ordered_model(A: FiniteStructure, nf: NormalFormSentence):
    if not class_membership(A, ORDER):
        raise StructureError("< is not a strict linear order")
    if not model_check(A, nf.formula()):
        raise NotAModel("the structure does not satisfy the sentence")


@dataclass(frozen=True)
class CloneMetadata:
    c: int
    original: tuple[int, ...]  # element of A -> position in A'
    source: tuple[int, ...]  # position in A' -> element of A it copies
    intervals: dict  # pawn of A -> positions of its clone interval (p0, p, p2, ...)
    t2: dict = field(default_factory=dict)  # (type, type) -> (w, w')
    tk: dict = field(default_factory=dict)  # types tuple -> distinct elements of A

    def is_clone(self, u: int) -> bool:
        return self.original[self.source[u]] != u


def cloning_extension(A: FiniteStructure, nf: NormalFormSentence, c: int = 3, check: bool = True):
    """The c-cloning extension A' of A. Elements of A' are numbered by their position in
    the order, so < in A' is 0 < 1 < ... ."""
    if c < 3:
        raise ValueError("cloning needs c >= 3")
    A = _over(A, nf)
    if check:
        _require_ordered_model(A, nf)
    vocab = nf.vocab
    roy = classify_royalty(A, nf)
    order = A.order_list(ORDER)
    source, original, intervals = [], {}, {}
    for a in order:
        if a in roy.pawns:
            start = len(source)
            source.extend([a] * c)
            original[a] = start + 1
            intervals[a] = tuple(range(start, start + c))
        else:
            original[a] = len(source)
            source.append(a)
    L = len(source)
    orig_of = tuple(original[a] for a in range(A.size))
    is_orig = [False] * L
    for a in range(A.size):
        is_orig[orig_of[a]] = True

    tps = types_of(A, vocab)
    rel = A.relations
    lt = rel[ORDER]
    t2: dict = {}
    tk: dict = {}

    def pick_pair(key):
        if key not in t2:
            for w in range(A.size):
                if tps[w] != key[0]:
                    continue
                for w2 in range(A.size):
                    if tps[w2] == key[1] and (w, w2) in lt:
                        t2[key] = (w, w2)
                        break
                if key in t2:
                    break
            else:
                raise AssertionError(f"no ordered pair realizes {key}")
        return t2[key]

    def pick_distinct(key):
        if key not in tk:
            used, out = set(), []
            for t in key:
                w = next((w for w in range(A.size) if w not in used and tps[w] == t), None)
                if w is None:
                    raise AssertionError(f"not enough realizations for {key}")
                used.add(w)
                out.append(w)
            tk[key] = tuple(out)
        return tk[key]

    def mapping(S):
        clones = [u for u in S if not is_orig[u]]
        if not clones:
            return tuple(source[u] for u in S)
        if len(clones) == 1 and len(S) > 1:
            pawn = source[clones[0]]
            if all(source[u] != pawn for u in S if is_orig[u]):
                return tuple(source[u] for u in S)
        if len(S) == 1:
            return (source[S[0]],)
        key = tuple(tps[source[u]] for u in S)
        return pick_pair(key) if len(S) == 2 else pick_distinct(key)

    m = nf.m
    out: dict[str, set] = {name: set() for name in vocab.names}
    for k in range(1, m + 1):
        atoms = table_atoms(vocab, k)
        for S in itertools.combinations(range(L), k):
            mu = mapping(S)
            for name, pattern in atoms:
                if tuple(mu[p] for p in pattern) in rel[name]:
                    out[name].add(tuple(S[p] for p in pattern))
    A2 = FiniteStructure(vocab, L, out)
    assert A2.relations[ORDER] == canonical_order(L), "cloning produced a non-canonical order"
    assert A2.restrict(orig_of) == A, "cloning extension does not extend the input"
    meta = CloneMetadata(c, orig_of, tuple(source), dict(intervals), t2, tk)
    return A2, meta


# --------------------------------------------------------------------------
# Courts


@dataclass(frozen=True)
class Court:
    structure: FiniteStructure  # A restricted to C, relabelled in <-order
    elements: tuple[int, ...]  # C as elements of A, in <-order
    kings: frozenset
    D: frozenset
    free_parts: dict  # (type, conjunct index) -> live part of the chosen free witness
    witnesses: dict  # (element, conjunct index) -> witness tuple (b1..bk)


def _witness_search(A: FiniteStructure, nf: NormalFormSentence):
    """Per conjunct: (compiled matrix, k, live positions in (x, y1..yk))."""
    out = []
    for e in nf.existentials:
        fn = compile_formula(A, e.matrix, e.vars)
        live = live_variables(e.matrix, e.vars)
        out.append((fn, e.k, tuple(i for i, v in enumerate(e.vars) if v in live)))
    return out


def free_witness(A, search, a: int, i: int):
    """Least (b1..bk) whose live part avoids a, or None."""
    fn, k, live = search[i]
    for bs in itertools.product(A.domain, repeat=k):
        full = (a,) + bs
        if a not in {full[j] for j in live} and fn(a, *bs):
            return bs
    return None


def build_court(A: FiniteStructure, nf: NormalFormSentence, check: bool = True) -> Court:
    A = _over(A, nf)
    if check:
        _require_ordered_model(A, nf)
    roy = classify_royalty(A, nf)
    tps = types_of(A, nf.vocab)
    search = _witness_search(A, nf)
    free_parts = {}
    for t in sorted(set(tps), key=OneType.key):
        for i, (fn, k, live) in enumerate(search):
            for a in (a for a in A.domain if tps[a] == t):
                bs = free_witness(A, search, a, i)
                if bs is not None:
                    full = (a,) + bs
                    free_parts[(t, i)] = frozenset(full[j] for j in live)
                    break
    D = frozenset().union(*free_parts.values()) if free_parts else frozenset()
    C = set(roy.kings) | set(D)
    witnesses = {}
    for a in sorted(roy.kings | D):
        for i, (fn, k, _) in enumerate(search):
            bs = next((bs for bs in itertools.product(A.domain, repeat=k) if fn(a, *bs)), None)
            if bs is None:
                raise NotAModel(f"element {a} has no witness for existential conjunct {i + 1}")
            witnesses[(a, i)] = bs
            C.update(bs)
    rank = {a: p for p, a in enumerate(A.order_list(ORDER))}
    elements = tuple(sorted(C, key=rank.__getitem__))
    size = max(nf.size(), 1)
    assert len(elements) <= 2 * size**4 * 2 ** len(nf.vocab), "court bound violated"
    return Court(A.restrict(elements), elements, roy.kings, D, free_parts, witnesses)


# --------------------------------------------------------------------------
# Canonical partition


@dataclass(frozen=True)
class IntervalFamily:
    bounds: tuple[tuple[int, int], ...]  # half-open position ranges in A'
    types: tuple[frozenset, ...]
    singleton: dict  # court element (as position in A') -> interval index, 1-based

    @property
    def N(self) -> int:
        return len(self.bounds)

    def interval_of(self, u: int) -> int:
        for s, (lo, hi) in enumerate(self.bounds, 1):
            if lo <= u < hi:
                return s
        raise IndexError(u)


def canonical_partition(A2: FiniteStructure, court: Court, meta: CloneMetadata, nf: NormalFormSentence) -> IntervalFamily:
    vocab = nf.vocab
    L = A2.size
    court_pos = [meta.original[a] for a in court.elements]
    tps = types_of(A2, vocab)
    roy = classify_royalty(A2, nf)
    cuts = set()
    for p in court_pos:
        cuts.update((p, p + 1))
    for t in set(tps):
        if t in roy.royal_types:
            continue
        where = [u for u in range(L) if tps[u] == t]
        cuts.update((where[0], where[-1] + 1))
    cuts = sorted(x for x in cuts if 0 < x < L)
    edges = [0] + cuts + [L]
    bounds = tuple((edges[i], edges[i + 1]) for i in range(len(edges) - 1))
    types = tuple(frozenset(tps[u] for u in range(lo, hi)) for lo, hi in bounds)
    fam = IntervalFamily(bounds, types, {})
    singleton = {}
    for p in court_pos:
        s = fam.interval_of(p)
        assert bounds[s - 1] == (p, p + 1), "court element not in a singleton interval"
        singleton[p] = s
    n_types = 2 ** len(vocab)
    assert len(bounds) <= 2 * (len(court_pos) + n_types) + 1, "interval count bound violated"
    size = max(nf.size(), 1)
    assert len(bounds) <= 6 * size**4 * n_types, "interval bound violated"
    return IntervalFamily(bounds, types, singleton)


# --------------------------------------------------------------------------
# Canonical tuple and the expansion by axiom predicates


def free_witness_pairs(A: FiniteStructure, nf: NormalFormSentence) -> frozenset:
    """Pairs (type, conjunct index) with a free witness structure in A."""
    tps = types_of(A, nf.vocab)
    search = _witness_search(A, nf)
    out = set()
    for i in range(len(search)):
        for a in A.domain:
            if (tps[a], i) not in out and free_witness(A, search, a, i) is not None:
                out.add((tps[a], i))
    return frozenset(out)


@dataclass(frozen=True)
class CanonicalData:
    gamma: AdmissibilityTuple
    extension: FiniteStructure
    meta: CloneMetadata
    court: Court
    family: IntervalFamily

    def __iter__(self):
        return iter((self.gamma, self.extension, self.court, self.family))


def canonical_admissibility_tuple(A: FiniteStructure, nf: NormalFormSentence, c: int = CANONICAL_CLONES) -> CanonicalData:
    """Gamma read off the c-cloning extension of a finite ordered model A of nf.
    Unpacks as (gamma, A', court, family); ``.meta`` holds the cloning data."""
    A = _over(A, nf)
    _require_ordered_model(A, nf)
    A2, meta = cloning_extension(A, nf, c, check=False)
    court = build_court(A, nf, check=False)
    fam = canonical_partition(A2, court, meta, nf)
    vocab = nf.vocab
    tps = types_of(A2, vocab)
    roy = classify_royalty(A2, nf)
    realized = frozenset(tps)
    delta = tuple(fam.singleton[meta.original[a]] for a in court.elements)
    gamma = AdmissibilityTuple(
        vocab,
        court.structure,
        fam.types,
        roy.royal_types,
        realized,
        realized,
        delta,
        free_witness_pairs(A2, nf),
    )
    return CanonicalData(gamma, A2, meta, court, fam)


def expand_with_axiom_predicates(
    A2: FiniteStructure, gamma: AdmissibilityTuple, nf: NormalFormSentence, court: Court, family: IntervalFamily, meta: CloneMetadata
) -> FiniteStructure:
    """Interpret K, D, Pbot, Ptop and the U_s on the cloning extension."""
    if family.N != gamma.N:
        raise ValueError("family and tuple disagree on the number of intervals")
    tps = types_of(A2, nf.vocab)
    roy = classify_royalty(A2, nf)
    rels = {
        K_SYM: {(u,) for u in roy.kings},
        D_SYM: {(meta.original[a],) for a in court.D},
        BOT_SYM: set(),
        TOP_SYM: set(),
    }
    for t in set(tps):
        where = [u for u in A2.domain if tps[u] == t]
        rels[BOT_SYM].add((where[0],))
        rels[TOP_SYM].add((where[-1],))
    for s, (lo, hi) in enumerate(family.bounds, 1):
        rels[u_sym(s)] = {(u,) for u in range(lo, hi)}
    return A2.expand(axiom_symbols(gamma.N), rels)
