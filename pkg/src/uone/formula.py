"""Formula syntax: AST, parser, printer and fragment membership checks."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

ORDER_SYMBOLS = ("<", "<1", "<2")
INFIX_SYMBOLS = frozenset(ORDER_SYMBOLS)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + message)


class VocabularyError(ValueError):
    pass


# --------------------------------------------------------------------------
# Vocabulary


@dataclass(frozen=True)
class Vocabulary:
    """Relation names with arities. Stored sorted so equal vocabularies compare equal."""

    symbols: tuple[tuple[str, int], ...] = ()
    order_symbols: frozenset[str] = frozenset()

    def __post_init__(self):
        names = [s for s, _ in self.symbols]
        if len(set(names)) != len(names):
            raise VocabularyError("duplicate relation names")
        object.__setattr__(self, "symbols", tuple(sorted(self.symbols)))
        for name, arity in self.symbols:
            if arity < 1:
                raise VocabularyError(f"{name}: arity must be positive")
        for name in self.order_symbols:
            if self.arities.get(name, 2) != 2:
                raise VocabularyError(f"order-like symbol {name} must be binary")

    @classmethod
    def of(cls, mapping: Mapping[str, int] | Iterable[tuple[str, int]], order_symbols=None):
        items = dict(mapping)
        if order_symbols is None:
            order_symbols = [s for s in ORDER_SYMBOLS if s in items]
        return cls(tuple(items.items()), frozenset(order_symbols))

    @property
    def arities(self) -> dict[str, int]:
        return dict(self.symbols)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.symbols)

    @property
    def max_arity(self) -> int:
        return max((a for _, a in self.symbols), default=0)

    def arity(self, name: str) -> int:
        try:
            return self.arities[name]
        except KeyError:
            raise VocabularyError(f"unknown relation {name}") from None

    def __contains__(self, name) -> bool:
        return name in self.arities

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.names)

    def union(self, other: "Vocabulary") -> "Vocabulary":
        merged = self.arities
        for name, arity in other.symbols:
            if merged.get(name, arity) != arity:
                raise VocabularyError(f"{name} used with arities {merged[name]} and {arity}")
            merged[name] = arity
        return Vocabulary(tuple(merged.items()), self.order_symbols | other.order_symbols)

    def with_symbols(self, mapping: Mapping[str, int]) -> "Vocabulary":
        return self.union(Vocabulary.of(mapping, order_symbols=()))

    def restrict(self, names: Iterable[str]) -> "Vocabulary":
        keep = set(names)
        return Vocabulary(
            tuple((s, a) for s, a in self.symbols if s in keep),
            frozenset(s for s in self.order_symbols if s in keep),
        )

    def render(self) -> str:
        return " ".join(f"{s}/{a}" for s, a in self.symbols)

    @classmethod
    def parse(cls, text: str) -> "Vocabulary":
        items = {}
        for chunk in text.split():
            name, _, arity = chunk.rpartition("/")
            if not name or not arity.isdigit():
                raise ParseError(f"bad vocabulary entry {chunk!r}")
            items[name] = int(arity)
        return cls.of(items)


# --------------------------------------------------------------------------
# AST


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return render_formula(self)

    def __and__(self, other):
        return And((self, other))

    def __or__(self, other):
        return Or((self, other))

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    rel: str
    args: tuple[str, ...]

    def __repr__(self):
        return f"Atom({self.rel!r}, {self.args!r})"


@dataclass(frozen=True, repr=False)
class Eq(Formula):
    left: str
    right: str

    def __repr__(self):
        return f"Eq({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Not(Formula):
    body: Formula

    def __repr__(self):
        return f"Not({self.body!r})"


@dataclass(frozen=True, repr=False)
class And(Formula):
    parts: tuple[Formula, ...]

    def __repr__(self):
        return f"And({self.parts!r})"


@dataclass(frozen=True, repr=False)
class Or(Formula):
    parts: tuple[Formula, ...]

    def __repr__(self):
        return f"Or({self.parts!r})"


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"Implies({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Iff(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"Iff({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Quant(Formula):
    kind: str  # "exists" or "forall"
    vars: tuple[str, ...]
    body: Formula

    def __post_init__(self):
        if self.kind not in ("exists", "forall"):
            raise ValueError(f"bad quantifier kind {self.kind!r}")
        if not self.vars:
            raise ValueError("quantifier block needs at least one variable")

    def __repr__(self):
        return f"Quant({self.kind!r}, {self.vars!r}, {self.body!r})"


def exists(vars, body: Formula) -> Formula:
    vars = (vars,) if isinstance(vars, str) else tuple(vars)
    return Quant("exists", vars, body) if vars else body


def forall(vars, body: Formula) -> Formula:
    vars = (vars,) if isinstance(vars, str) else tuple(vars)
    return Quant("forall", vars, body) if vars else body


def truth(var: str) -> Formula:
    return Eq(var, var)


def falsity(var: str) -> Formula:
    return Not(Eq(var, var))


def conj(parts: Iterable[Formula], var: str | None = None) -> Formula:
    """Conjunction of ``parts``; the empty conjunction is ``var = var``."""
    parts = tuple(parts)
    if not parts:
        if var is None:
            raise ValueError("empty conjunction needs a variable")
        return truth(var)
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts: Iterable[Formula], var: str | None = None) -> Formula:
    """Disjunction of ``parts``; the empty disjunction is ``var != var``."""
    parts = tuple(parts)
    if not parts:
        if var is None:
            raise ValueError("empty disjunction needs a variable")
        return falsity(var)
    return parts[0] if len(parts) == 1 else Or(parts)


def neq(x: str, y: str) -> Formula:
    return Not(Eq(x, y))


def lt(x: str, y: str, symbol: str = "<") -> Formula:
    return Atom(symbol, (x, y))


# --------------------------------------------------------------------------
# Traversal helpers


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Atom, Eq)):
        return ()
    if isinstance(f, (Not, Quant)):
        return (f.body,)
    if isinstance(f, (And, Or)):
        return f.parts
    return (f.left, f.right)


def subformulas(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def atom_vars(f: Atom | Eq) -> tuple[str, ...]:
    return f.args if isinstance(f, Atom) else (f.left, f.right)


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, (Atom, Eq)):
        return frozenset(atom_vars(f))
    if isinstance(f, Quant):
        return free_vars(f.body) - set(f.vars)
    out: frozenset[str] = frozenset()
    for c in children(f):
        out |= free_vars(c)
    return out


def all_vars(f: Formula) -> frozenset[str]:
    out = set()
    for g in subformulas(f):
        if isinstance(g, (Atom, Eq)):
            out.update(atom_vars(g))
        elif isinstance(g, Quant):
            out.update(g.vars)
    return frozenset(out)


def is_quantifier_free(f: Formula) -> bool:
    return not any(isinstance(g, Quant) for g in subformulas(f))


def relations_used(f: Formula) -> dict[str, set[int]]:
    out: dict[str, set[int]] = {}
    for g in subformulas(f):
        if isinstance(g, Atom):
            out.setdefault(g.rel, set()).add(len(g.args))
    return out


def infer_vocabulary(f: Formula) -> Vocabulary:
    used = relations_used(f)
    bad = {r: a for r, a in used.items() if len(a) > 1}
    if bad:
        name, arities = sorted(bad.items())[0]
        raise VocabularyError(f"{name} used with arities {sorted(arities)}")
    return Vocabulary.of({r: a.pop() for r, a in used.items()})


def substitute(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename free variables. Bound variables shadow the mapping."""
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(mapping.get(v, v) for v in f.args))
    if isinstance(f, Eq):
        return Eq(mapping.get(f.left, f.left), mapping.get(f.right, f.right))
    if isinstance(f, Not):
        return Not(substitute(f.body, mapping))
    if isinstance(f, And):
        return And(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(substitute(f.left, mapping), substitute(f.right, mapping))
    if isinstance(f, Iff):
        return Iff(substitute(f.left, mapping), substitute(f.right, mapping))
    inner = {k: v for k, v in mapping.items() if k not in f.vars}
    clash = set(f.vars) & set(inner.values())
    if clash:
        raise ValueError(f"substitution would capture {sorted(clash)}")
    return Quant(f.kind, f.vars, substitute(f.body, inner))


def desugar(f: Formula) -> Formula:
    """Remove -> and <-> in favour of ~, &, |."""
    if isinstance(f, (Atom, Eq)):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.body))
    if isinstance(f, And):
        return And(tuple(desugar(p) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(desugar(p) for p in f.parts))
    if isinstance(f, Implies):
        return Or((Not(desugar(f.left)), desugar(f.right)))
    if isinstance(f, Iff):
        a, b = desugar(f.left), desugar(f.right)
        return Or((And((a, b)), And((Not(a), Not(b)))))
    return Quant(f.kind, f.vars, desugar(f.body))


def merged_block(q: Quant) -> tuple[str, tuple[str, ...], Formula]:
    """A maximal run of same-kind quantifiers, returned as (kind, vars, matrix)."""
    kind, vars, body = q.kind, list(q.vars), q.body
    while isinstance(body, Quant) and body.kind == kind:
        vars.extend(body.vars)
        body = body.body
    return kind, tuple(vars), body


def formula_size(f: Formula) -> int:
    """Symbol count: atoms count their relation and argument occurrences, connectives and
    quantified variables count one each."""
    total = 0
    for g in subformulas(f):
        if isinstance(g, Atom):
            total += 1 + len(g.args)
        elif isinstance(g, Eq):
            total += 3
        elif isinstance(g, (And, Or)):
            total += len(g.parts) - 1
        elif isinstance(g, Quant):
            total += len(g.vars)
        else:
            total += 1
    return total


# --------------------------------------------------------------------------
# Parser

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+) |
    (?P<nl>\n) |
    (?P<comment>\#[^\n]*) |
    (?P<op><->|->|!=|<1|<2|<|=|~|&|\||\(|\)|,|\.) |
    (?P<name>[A-Za-z_][A-Za-z0-9_]*) |
    (?P<bad>.)
    """,
    re.VERBOSE,
)

KEYWORDS = {"exists", "forall"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        col = m.start() - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
            continue
        if kind in ("ws", "comment"):
            continue
        if kind == "bad":
            raise ParseError(f"unexpected character {m.group()!r}", line, col)
        toks.append(_Tok(kind, m.group(), line, col))
    toks.append(_Tok("eof", "", line, len(text) - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        found = tok.text or "end of input"
        return ParseError(f"{msg} (found {found!r})", tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        tok = self.peek()
        if tok.text != text or tok.kind == "name":
            raise self.error(f"expected {text!r}")
        return self.next()

    def parse(self) -> Formula:
        f = self.iff()
        if self.peek().kind != "eof":
            raise self.error("unexpected trailing input")
        return f

    def iff(self) -> Formula:
        left = self.implies()
        if self.peek().text == "<->":
            self.next()
            return Iff(left, self.iff())
        return left

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.peek().text == "->":
            self.next()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.peek().text == "|":
            self.next()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.peek().text == "&":
            self.next()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.text == "~" and tok.kind == "op":
            self.next()
            return Not(self.unary())
        if tok.kind == "name" and tok.text in KEYWORDS:
            return self.quantifier()
        if tok.text == "(" and tok.kind == "op":
            self.next()
            f = self.iff()
            self.expect(")")
            return f
        return self.atom()

    def quantifier(self) -> Formula:
        kind = self.next().text
        vars = []
        while self.peek().kind == "name" and self.peek().text not in KEYWORDS:
            vars.append(self.next().text)
        if not vars:
            raise self.error(f"{kind} needs at least one variable")
        self.expect(".")
        return Quant(kind, tuple(vars), self.iff())

    def variable(self) -> str:
        tok = self.peek()
        if tok.kind != "name" or tok.text in KEYWORDS:
            raise self.error("expected a variable")
        return self.next().text

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.kind != "name" or tok.text in KEYWORDS:
            raise self.error("expected an atom")
        name = self.next().text
        nxt = self.peek()
        if nxt.text == "(" and nxt.kind == "op":
            self.next()
            args = [self.variable()]
            while self.peek().text == ",":
                self.next()
                args.append(self.variable())
            self.expect(")")
            f = Atom(name, tuple(args))
            object.__setattr__(f, "_loc", (tok.line, tok.col))
            return f
        if nxt.kind == "op" and nxt.text in ("=", "!=", "<", "<1", "<2"):
            self.next()
            right = self.variable()
            if nxt.text == "=":
                return Eq(name, right)
            if nxt.text == "!=":
                return Not(Eq(name, right))
            f = Atom(nxt.text, (name, right))
            object.__setattr__(f, "_loc", (tok.line, tok.col))
            return f
        raise self.error("expected '(' or an infix relation after a name", nxt)


def parse_formula(text: str, vocab: Vocabulary | None = None) -> Formula:
    """Parse ``text``. With ``vocab`` every atom must match its declared arity; without
    it the arities used must at least be consistent."""
    f = _Parser(text).parse()
    seen: dict[str, tuple[int, tuple[int, int]]] = {}
    for g in subformulas(f):
        if not isinstance(g, Atom):
            continue
        line, col = getattr(g, "_loc", (0, 0))
        if vocab is not None:
            if g.rel not in vocab:
                raise ParseError(f"relation {g.rel} not in vocabulary", line, col)
            if vocab.arity(g.rel) != len(g.args):
                raise ParseError(
                    f"arity mismatch: {g.rel} has arity {vocab.arity(g.rel)}, used with {len(g.args)}",
                    line,
                    col,
                )
        prev = seen.get(g.rel)
        if prev is not None and prev[0] != len(g.args):
            raise ParseError(
                f"arity mismatch: {g.rel} used with {prev[0]} and {len(g.args)} arguments", line, col
            )
        seen.setdefault(g.rel, (len(g.args), (line, col)))
    return f


# --------------------------------------------------------------------------
# Printer

_PREC = {"quant": 0, "iff": 1, "implies": 2, "or": 3, "and": 4, "not": 5, "atom": 6}


def _prec(f: Formula) -> int:
    if isinstance(f, Quant):
        return 0
    if isinstance(f, Iff):
        return 1
    if isinstance(f, Implies):
        return 2
    if isinstance(f, Or):
        return 3
    if isinstance(f, And):
        return 4
    if isinstance(f, Not) and not isinstance(f.body, Eq):
        return 5
    return 6


def _wrap(f: Formula, min_prec: int) -> str:
    text = render_formula(f)
    return text if _prec(f) >= min_prec and _prec(f) > 0 else f"({text})"


def render_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        if f.rel in INFIX_SYMBOLS and len(f.args) == 2:
            return f"{f.args[0]} {f.rel} {f.args[1]}"
        return f"{f.rel}({','.join(f.args)})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Not):
        if isinstance(f.body, Eq):
            return f"{f.body.left} != {f.body.right}"
        return "~" + _wrap(f.body, 5)
    if isinstance(f, And):
        return " & ".join(_wrap(p, 5) for p in f.parts)
    if isinstance(f, Or):
        return " | ".join(_wrap(p, 4) for p in f.parts)
    if isinstance(f, Implies):
        return f"{_wrap(f.left, 3)} -> {_wrap(f.right, 3)}"
    if isinstance(f, Iff):
        return f"{_wrap(f.left, 2)} <-> {_wrap(f.right, 2)}"
    return f"{f.kind} {' '.join(f.vars)}. {render_formula(f.body)}"


# --------------------------------------------------------------------------
# Fragment checking

U1 = "U1"
U1_NO_EQ = "U1_NO_EQ"
FU1 = "FU1"
U1_FREE = "U1_FREE"


@dataclass(frozen=True)
class FragmentProfile:
    mode: str = U1
    free_symbols: tuple[str, ...] = ()

    def __post_init__(self):
        if self.mode not in (U1, U1_NO_EQ, FU1, U1_FREE):
            raise ValueError(f"unknown fragment mode {self.mode}")
        if self.free_symbols and self.mode != U1_FREE:
            raise ValueError("only U1_FREE takes exempt symbols")

    @classmethod
    def u1_free(cls, symbols=("<1", "<2")) -> "FragmentProfile":
        return cls(U1_FREE, tuple(symbols))

    @classmethod
    def from_name(cls, name: str) -> "FragmentProfile":
        key = name.lower().replace("-", "_")
        table = {"u1": cls(U1), "u1_no_eq": cls(U1_NO_EQ), "noeq": cls(U1_NO_EQ),
                 "fu1": cls(FU1), "u1_free": cls.u1_free(), "u1_orders": cls.u1_free()}
        if key not in table:
            raise ValueError(f"unknown profile {name!r}")
        return table[key]

    def exempt(self, f: Atom | Eq) -> bool:
        """True if the atom is outside the uniformity requirement."""
        if isinstance(f, Eq):
            return self.mode != FU1
        return f.rel in self.free_symbols


@dataclass(frozen=True)
class Violation:
    location: str
    kind: str  # uniformity | one-dimensionality | arity | scope
    message: str


@dataclass(frozen=True)
class FragmentReport:
    violations: tuple[Violation, ...] = ()

    @property
    def accepted(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __bool__(self) -> bool:
        return self.accepted


def _short(f: Formula, limit: int = 60) -> str:
    text = render_formula(f)
    return text if len(text) <= limit else text[: limit - 3] + "..."


def matrix_atoms(f: Formula) -> Iterator[Atom | Eq]:
    """Atoms reachable from ``f`` without crossing a quantifier."""
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (Atom, Eq)):
            yield g
        elif not isinstance(g, Quant):
            stack.extend(reversed(children(g)))


def _nested_blocks(f: Formula) -> Iterator[Quant]:
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Quant):
            yield g
        else:
            stack.extend(reversed(children(g)))


def check_fragment(f: Formula, profile: FragmentProfile | None = None) -> FragmentReport:
    """Classify ``f`` against a U1 variant. Violations are returned, never raised."""
    profile = profile or FragmentProfile()
    out: list[Violation] = []

    for rel, arities in sorted(relations_used(f).items()):
        if len(arities) > 1:
            out.append(Violation(rel, "arity", f"{rel} used with arities {sorted(arities)}"))
    for sym in profile.free_symbols:
        arities = relations_used(f).get(sym, {2})
        if arities != {2}:
            out.append(Violation(sym, "arity", f"exempt symbol {sym} must be binary"))

    if profile.mode == U1_NO_EQ:
        for g in subformulas(f):
            if isinstance(g, Eq):
                out.append(Violation(_short(g), "scope", "equality is not available in U1_NO_EQ"))

    def check_matrix(matrix: Formula, where: str):
        sets = []
        for a in matrix_atoms(matrix):
            vs = frozenset(atom_vars(a))
            if len(vs) >= 2 and not profile.exempt(a):
                sets.append((vs, a))
        distinct = {vs for vs, _ in sets}
        if len(distinct) > 1:
            shown = ", ".join(_short(a, 30) for _, a in sets)
            groups = " vs ".join("{" + ",".join(sorted(s)) + "}" for s in sorted(distinct, key=sorted))
            out.append(
                Violation(where, "uniformity", f"atoms {shown} use different variable sets {groups}")
            )
        for q in _nested_blocks(matrix):
            check_block(q)

    def check_block(q: Quant):
        kind, vars, matrix = merged_block(q)
        where = f"{kind} {' '.join(vars)}. {_short(matrix, 40)}"
        left = free_vars(matrix) - set(vars)
        if len(left) > 1:
            out.append(
                Violation(
                    where,
                    "one-dimensionality",
                    f"block leaves {len(left)} free variables ({', '.join(sorted(left))})",
                )
            )
        check_matrix(matrix, where)

    check_matrix(f, "top level")
    return FragmentReport(tuple(out))


def live_variables(matrix: Formula, X_prime: Iterable[str] | None = None, exempt=()) -> frozenset[str]:
    """Live variables of a quantifier-free matrix: the variable set of its higher-arity
    non-equality atoms, or the empty set if there are none."""
    if not is_quantifier_free(matrix):
        raise ValueError("live_variables needs a quantifier-free matrix")
    exempt = set(exempt)
    out: set[str] = set()
    for a in matrix_atoms(matrix):
        if isinstance(a, Atom) and a.rel not in exempt and len(set(a.args)) >= 2:
            out.update(a.args)
    if X_prime is not None:
        missing = out - set(X_prime)
        if missing:
            raise ValueError(f"matrix uses variables outside X': {sorted(missing)}")
    return frozenset(out)


def live_elements(matrix: Formula, variables: Iterable[str], elements: Iterable, exempt=()) -> frozenset:
    """live(psi[a1..ak]): the elements assigned to live variables."""
    variables, elements = tuple(variables), tuple(elements)
    if len(variables) != len(elements):
        raise ValueError("variables and elements differ in length")
    live = live_variables(matrix, variables, exempt)
    return frozenset(e for v, e in zip(variables, elements) if v in live)
