"""Admissibility tuples: data model, the six admissibility conditions, text format and
explicit enumeration of candidates."""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .formula import Vocabulary, live_variables
from .normal_form import ORDER, NormalFormSentence
from .structures import (
    ORDER_CLASSES,
    FiniteStructure,
    class_membership,
    enumerate_ordered_structures,
    read_structure,
    write_structure,
)
from .types_tables import OneType, irreflexive_types, parse_one_type, types_of

CONDITIONS = ("i", "ii", "iii", "iv", "v", "vi")
REQUIRED = {"O": CONDITIONS[:2], "WO": CONDITIONS[:4], "Ofin": CONDITIONS}


class TupleFormatError(ValueError):
    pass


def _type_order(t: OneType):
    return t.key()


def sorted_types(ts: Iterable[OneType]) -> list[OneType]:
    return sorted(ts, key=_type_order)


@dataclass(frozen=True)
class AdmissibilityTuple:
    """(court, family, royal, bottom, top, delta, F) over the vocabulary ``vocab``.

    ``family[s-1]`` is the type set of interval s; ``delta[c]`` is the interval (1-based) of
    court element c; ``F`` holds pairs (type, existential conjunct index, 0-based)."""

    vocab: Vocabulary
    court: FiniteStructure
    family: tuple[frozenset, ...]
    royal: frozenset
    bottom: frozenset
    top: frozenset
    delta: tuple[int, ...]
    F: frozenset

    @property
    def N(self) -> int:
        return len(self.family)

    @property
    def court_size(self) -> int:
        return self.court.size

    def union(self) -> frozenset:
        return frozenset().union(*self.family) if self.family else frozenset()

    def minus(self, s: int) -> frozenset:
        """Types of interval s not met in earlier intervals (s is 1-based)."""
        earlier = frozenset().union(*self.family[: s - 1])
        return self.family[s - 1] - earlier

    def plus(self, s: int) -> frozenset:
        later = frozenset().union(*self.family[s:])
        return self.family[s - 1] - later

    def image(self) -> frozenset:
        return frozenset(self.delta)

    def court_types(self) -> list[OneType]:
        return types_of(self.court, self.vocab)

    def structural_errors(self, nf: NormalFormSentence | None = None) -> list[str]:
        """Everything the tuple definition requires apart from the six conditions."""
        errs = []
        names = self.vocab.names
        if ORDER not in self.vocab:
            errs.append("vocabulary lacks <")
        if self.court.vocab.symbols != self.vocab.symbols:
            errs.append("court structure is over a different vocabulary")
        if self.N < 1:
            errs.append("empty family")
        if len(self.delta) != self.court.size:
            errs.append("delta is not total on the court")
        if len(set(self.delta)) != len(self.delta):
            errs.append("delta is not injective")
        if any(not (1 <= s <= self.N) for s in self.delta):
            errs.append("delta leaves the index range")
        if self.court.size > self.N:
            errs.append("court larger than the index")
        if ORDER in self.vocab and not class_membership(self.court, ORDER):
            errs.append("court order is not a strict linear order")
        every = [self.royal, self.bottom, self.top, *self.family, {a for a, _ in self.F}]
        for group in every:
            for t in group:
                if t.universe != names:
                    errs.append(f"type {t!r} is over another vocabulary")
        for s, group in enumerate(self.family, 1):
            for t in group:
                if t.universe == names and ORDER in t.positive:
                    errs.append(f"interval {s} contains a type with v1 < v1")
        if nf is not None:
            if set(nf.vocab.names) != set(names):
                errs.append("tuple and sentence use different vocabularies")
            if any(not (0 <= i < nf.m_exists) for _, i in self.F):
                errs.append("F names a missing existential conjunct")
            size = max(nf.size(), 1)
            n_types = 2 ** len(self.vocab)
            if self.court.size > 2 * size**4 * n_types:
                errs.append("court exceeds 2|phi|^4|alpha|")
            if self.N > 6 * size**4 * n_types:
                errs.append("index exceeds 6|phi|^4|alpha|")
            if len(serialize_tuple(self)) > encoding_bound(nf):
                errs.append("description exceeds the exponential encoding bound")
        return errs

    def encoding_key(self) -> str:
        return serialize_tuple(self)


def encoding_bound(nf: NormalFormSentence) -> int:
    """A concrete exponential bound on the text length of a tuple for ``nf``:
    2^((r+2)(|nf| + 4 log|nf| + 8)), r the maximal arity. Generous by design."""
    size = max(nf.size(), 2)
    r = max(nf.max_arity, 1)
    return 2 ** ((r + 2) * (size + 4 * math.ceil(math.log2(size)) + 8))


def derived_boundary_sets(gamma: AdmissibilityTuple) -> tuple[list[frozenset], list[frozenset]]:
    return [gamma.minus(s) for s in range(1, gamma.N + 1)], [gamma.plus(s) for s in range(1, gamma.N + 1)]


# --------------------------------------------------------------------------
# Conditions


@dataclass(frozen=True)
class AdmissibilityReport:
    results: dict  # condition -> (ok, message)
    cls: str

    @property
    def admissible(self) -> bool:
        return all(self.results[c][0] for c in REQUIRED[self.cls])

    def failed(self) -> list[str]:
        return [c for c in REQUIRED[self.cls] if not self.results[c][0]]

    def __bool__(self):
        return self.admissible


def check_admissibility(gamma: AdmissibilityTuple, K: str = "Ofin") -> AdmissibilityReport:
    if K not in ORDER_CLASSES:
        raise ValueError(f"unknown class {K}")
    res = {}
    union = gamma.union()
    bad = [name for name, part in (("royal", gamma.royal), ("top", gamma.top), ("bottom", gamma.bottom)) if not part <= union]
    res["i"] = (not bad, f"not contained in the family union: {bad}" if bad else "")

    msgs = []
    image = gamma.image()
    for s in range(1, gamma.N + 1):
        if gamma.family[s - 1] & gamma.royal and s not in image:
            msgs.append(f"interval {s} holds a royal type but is no court interval")
    ctypes = gamma.court_types()
    for c, s in enumerate(gamma.delta):
        if not (1 <= s <= gamma.N):
            msgs.append(f"delta({c}) out of range")
            continue
        t = ctypes[c]
        if gamma.family[s - 1] != frozenset({t}):
            msgs.append(f"interval {s} of court element {c} is not {{tp(c)}}")
        elif t not in gamma.royal and (gamma.minus(s) or gamma.plus(s)):
            msgs.append(f"court pawn {c} sits at a first or last occurrence (interval {s})")
    res["ii"] = (not msgs, "; ".join(msgs))

    over = [s for s in range(1, gamma.N + 1) if len(gamma.minus(s)) > 1]
    res["iii"] = (not over, f"|minus| > 1 at intervals {over}" if over else "")
    res["iv"] = (gamma.bottom == union, "" if gamma.bottom == union else "bottom set differs from the union")
    over = [s for s in range(1, gamma.N + 1) if len(gamma.plus(s)) > 1]
    res["v"] = (not over, f"|plus| > 1 at intervals {over}" if over else "")
    res["vi"] = (gamma.top == union, "" if gamma.top == union else "top set differs from the union")
    return AdmissibilityReport(res, K)


# --------------------------------------------------------------------------
# Text format


def _types_line(vocab: Vocabulary, ts: Iterable[OneType]) -> str:
    ts = sorted_types(ts)
    return " ; ".join(t.render(vocab) for t in ts) if ts else "{}"


def _parse_types(vocab: Vocabulary, text: str) -> frozenset:
    text = text.strip()
    if text == "{}":
        return frozenset()
    return frozenset(parse_one_type(part, vocab) for part in text.split(";"))


def serialize_tuple(gamma: AdmissibilityTuple) -> str:
    v = gamma.vocab
    lines = [
        "admissibility-tuple v1",
        f"vocabulary: {v.render()}",
        f"N: {gamma.N}",
        "court:",
        write_structure(gamma.court).rstrip("\n"),
        "end court",
    ]
    for s, group in enumerate(gamma.family, 1):
        lines.append(f"family {s}: {_types_line(v, group)}")
    lines.append(f"royal: {_types_line(v, gamma.royal)}")
    lines.append(f"bottom: {_types_line(v, gamma.bottom)}")
    lines.append(f"top: {_types_line(v, gamma.top)}")
    lines.append("delta: " + " ".join(f"{c}->{s}" for c, s in enumerate(gamma.delta)))
    pairs = sorted(gamma.F, key=lambda p: (p[1], p[0].key()))
    lines.append("F: " + (" ; ".join(f"{i} @ {t.render(v)}" for t, i in pairs) if pairs else "{}"))
    return "\n".join(lines) + "\n"


def parse_tuple(text: str) -> AdmissibilityTuple:
    lines = [l for l in text.splitlines()]
    it = iter(lines)

    def expect(prefix):
        for line in it:
            if line.strip():
                if not line.startswith(prefix):
                    raise TupleFormatError(f"expected {prefix!r}, got {line!r}")
                return line[len(prefix):].strip()
        raise TupleFormatError(f"missing {prefix!r}")

    if expect("admissibility-tuple") != "v1":
        raise TupleFormatError("unsupported tuple format version")
    vocab = Vocabulary.parse(expect("vocabulary:"))
    N = int(expect("N:"))
    expect("court:")
    body = []
    for line in it:
        if line.strip() == "end court":
            break
        body.append(line)
    else:
        raise TupleFormatError("unterminated court block")
    court = read_structure("\n".join(body), vocab)
    family = []
    for s in range(1, N + 1):
        family.append(_parse_types(vocab, expect(f"family {s}:")))
    royal = _parse_types(vocab, expect("royal:"))
    bottom = _parse_types(vocab, expect("bottom:"))
    top = _parse_types(vocab, expect("top:"))
    delta_text = expect("delta:")
    delta = {}
    for item in delta_text.split():
        m = re.fullmatch(r"(\d+)->(\d+)", item)
        if not m:
            raise TupleFormatError(f"bad delta entry {item!r}")
        delta[int(m.group(1))] = int(m.group(2))
    if sorted(delta) != list(range(court.size)):
        raise TupleFormatError("delta must list every court element once")
    F_text = expect("F:")
    F = set()
    if F_text != "{}":
        for part in F_text.split(";"):
            idx, _, t = part.partition("@")
            F.add((parse_one_type(t, vocab), int(idx)))
    return AdmissibilityTuple(
        vocab, court, tuple(family), royal, bottom, top, tuple(delta[c] for c in range(court.size)), frozenset(F)
    )


# --------------------------------------------------------------------------
# Explicit enumeration


@dataclass
class EnumerationBudget:
    max_index: int = 3
    max_court: int = 2
    max_types: int = 8
    max_candidates: int = 200_000


@dataclass
class TupleStream:
    """Iterable of admissible tuples. ``truncated`` turns true when a budget cut the
    candidate space short, so an empty stream does not mean the space is empty."""

    nf: NormalFormSentence
    K: str
    budget: EnumerationBudget
    monotone_delta: bool = True
    truncated: bool = False
    produced: int = 0

    def __iter__(self) -> Iterator[AdmissibilityTuple]:
        return _enumerate(self)


def enumerate_admissibility_tuples(
    nf: NormalFormSentence, budget: EnumerationBudget | None = None, K: str = "Ofin", monotone_delta: bool = True
) -> TupleStream:
    """Admissible tuples for ``nf`` in order of index N, then court size, then text encoding."""
    if K not in ORDER_CLASSES:
        raise ValueError(f"unknown class {K}")
    return TupleStream(nf, K, budget or EnumerationBudget(), monotone_delta)


def _nonempty_subsets(items: list) -> list[frozenset]:
    out = []
    for r in range(1, len(items) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(items, r))
    return out


def _subsets(items: list) -> list[frozenset]:
    return [frozenset()] + _nonempty_subsets(items)


def _enumerate(stream: TupleStream) -> Iterator[AdmissibilityTuple]:

    nf, K, b = stream.nf, stream.K, stream.budget
    vocab = nf.vocab
    types = irreflexive_types(vocab, budget=1 << 16)
    if len(types) > b.max_types:
        stream.truncated = True
        types = types[: b.max_types]
    freeable = [i for i, e in enumerate(nf.existentials) if "x" not in live_variables(e.matrix, e.vars)]
    count = 0
    for N in range(1, b.max_index + 1):
        for c in range(0, min(N, b.max_court) + 1):
            batch = []
            courts = [C for C in enumerate_ordered_structures(vocab, c) if all(ORDER not in t.positive for t in types_of(C, vocab))]
            for C in courts:
                ctypes = types_of(C, vocab)
                if stream.monotone_delta:
                    deltas = list(itertools.combinations(range(1, N + 1), c))
                else:
                    deltas = list(itertools.permutations(range(1, N + 1), c))
                for delta in deltas:
                    fixed = {s: frozenset({ctypes[i]}) for i, s in enumerate(delta)}
                    choices = [[fixed[s]] if s in fixed else _nonempty_subsets(types) for s in range(1, N + 1)]
                    for family in itertools.product(*choices):
                        union = frozenset().union(*family)
                        ulist = sorted_types(union)
                        court_only = frozenset().union(*(family[s - 1] for s in delta)) if delta else frozenset()
                        outside = frozenset().union(*(family[s - 1] for s in range(1, N + 1) if s not in delta))
                        royal_pool = sorted_types(court_only - outside)
                        bottoms = [union] if K in ("WO", "Ofin") else _subsets(ulist)
                        tops = [union] if K == "Ofin" else _subsets(ulist)
                        pairs = [(t, i) for t in ulist for i in freeable]
                        for royal in _subsets(royal_pool):
                            for bottom in bottoms:
                                for top in tops:
                                    for F in _subsets(pairs):
                                        count += 1
                                        if count > b.max_candidates:
                                            stream.truncated = True
                                            yield from _flush(batch, stream)
                                            return
                                        g = AdmissibilityTuple(vocab, C, tuple(family), royal, bottom, top, delta, F)
                                        if check_admissibility(g, K).admissible:
                                            batch.append(g)
            yield from _flush(batch, stream)


def _flush(batch: list, stream: TupleStream):
    keyed = sorted(((g.encoding_key(), g) for g in batch), key=lambda p: p[0])
    seen = set()
    for key, g in keyed:
        if key in seen:
            continue
        seen.add(key)
        stream.produced += 1
        yield g
    batch.clear()
