"""Generalized Scott normal form: validation and translation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .formula import (
    And,
    Atom,
    Eq,
    Formula,
    FragmentProfile,
    Iff,
    Implies,
    Not,
    Or,
    Quant,
    Vocabulary,
    all_vars,
    check_fragment,
    conj,
    forall,
    exists,
    formula_size,
    free_vars,
    infer_vocabulary,
    is_quantifier_free,
    live_variables,
    merged_block,
    render_formula,
    substitute,
    truth,
)

ORDER = "<"


class NormalFormError(ValueError):
    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


def ex_vars(k: int) -> tuple[str, ...]:
    return ("x",) + tuple(f"y{i}" for i in range(1, k + 1))


def un_vars(l: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, l + 1))


@dataclass(frozen=True)
class ExistentialConjunct:
    """forall x exists y1..yk . matrix(x, y1..yk)"""

    k: int
    matrix: Formula

    @property
    def vars(self) -> tuple[str, ...]:
        return ex_vars(self.k)

    @property
    def live(self) -> frozenset[str]:
        return live_variables(self.matrix, self.vars)

    def formula(self) -> Formula:
        return forall("x", exists(self.vars[1:], self.matrix))


@dataclass(frozen=True)
class UniversalConjunct:
    """forall x1..xl . matrix(x1..xl)"""

    l: int
    matrix: Formula

    @property
    def vars(self) -> tuple[str, ...]:
        return un_vars(self.l)

    def formula(self) -> Formula:
        return forall(self.vars, self.matrix)


@dataclass(frozen=True)
class NormalFormSentence:
    vocab: Vocabulary
    existentials: tuple[ExistentialConjunct, ...] = ()
    universals: tuple[UniversalConjunct, ...] = ()

    @property
    def width(self) -> int:
        return max([e.k + 1 for e in self.existentials] + [u.l for u in self.universals] + [0])

    @property
    def m_exists(self) -> int:
        return len(self.existentials)

    @property
    def m_forall(self) -> int:
        return len(self.universals)

    @property
    def max_arity(self) -> int:
        return self.vocab.max_arity

    @property
    def m(self) -> int:
        return min(self.width, self.max_arity)

    def conjuncts(self) -> list[Formula]:
        return [e.formula() for e in self.existentials] + [u.formula() for u in self.universals]

    def formula(self) -> Formula:
        parts = self.conjuncts()
        if not parts:
            return forall("x1", truth("x1"))
        return conj(parts)

    def render(self) -> str:
        return render_formula(self.formula())

    def size(self) -> int:
        return formula_size(self.formula())

    def with_vocab(self, vocab: Vocabulary) -> "NormalFormSentence":
        return NormalFormSentence(self.vocab.union(vocab), self.existentials, self.universals)


def _block_chain(f: Formula) -> list[tuple[str, tuple[str, ...]]]:
    chain = []
    while isinstance(f, Quant):
        kind, vars, f = merged_block(f)
        chain.append((kind, vars))
    return chain


def _split_conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        out = []
        for p in f.parts:
            out.extend(_split_conjuncts(p))
        return out
    return [f]


def _check_matrix(matrix: Formula, where: str):
    if not is_quantifier_free(matrix):
        raise NormalFormError("matrix is not quantifier-free", where)
    report = check_fragment(Quant("exists", tuple(sorted(free_vars(matrix)) or ["x"]), matrix))
    bad = [v for v in report.violations if v.kind == "uniformity"]
    if bad:
        raise NormalFormError(bad[0].message, where)


def _rename(matrix: Formula, old: tuple[str, ...], new: tuple[str, ...]) -> Formula:
    if len(set(old)) != len(old):
        raise NormalFormError("a quantifier block binds the same variable twice")
    tmp = {v: f"__t{i}" for i, v in enumerate(old)}
    return substitute(substitute(matrix, tmp), {f"__t{i}": w for i, w in enumerate(new)})


def validate_normal_form(f: Formula, vocab: Vocabulary | None = None, strict: bool = False) -> NormalFormSentence:
    """Read ``f`` as a conjunction of forall-exists and forall conjuncts.

    A closed conjunct that opens with an existential block, such as the first half of
    "exactly three elements are P", is read as forall-exists with a vacuous universal
    variable. ``strict`` turns that off and insists on a leading universal."""
    exs, uns = [], []
    for idx, c in enumerate(_split_conjuncts(f)):
        where = f"conjunct {idx + 1}"
        if free_vars(c):
            raise NormalFormError(f"free variables {sorted(free_vars(c))}", where)
        if not strict and isinstance(c, Quant) and c.kind == "exists":
            c = Quant("forall", (_vacuous(all_vars(c)),), c)
        if not isinstance(c, Quant) or c.kind != "forall":
            raise NormalFormError("expected a leading universal quantifier", where)
        _, uvars, body = merged_block(c)
        if isinstance(body, Quant):
            if body.kind != "exists" or len(uvars) != 1:
                raise NormalFormError("expected 'forall x. exists y1..yk.' or 'forall x1..xl.'", where)
            _, evars, matrix = merged_block(body)
            if isinstance(matrix, Quant):
                raise NormalFormError("more than two quantifier blocks", where)
            _check_matrix(matrix, where)
            if uvars[0] in evars:
                raise NormalFormError("existential block rebinds the universal variable", where)
            k = len(evars)
            exs.append(ExistentialConjunct(k, _rename(matrix, uvars + evars, ex_vars(k))))
        else:
            _check_matrix(body, where)
            l = len(uvars)
            uns.append(UniversalConjunct(l, _rename(body, uvars, un_vars(l))))
    voc = infer_vocabulary(f)
    if vocab is not None:
        voc = vocab.union(voc)
    voc = voc.union(Vocabulary.of({ORDER: 2}))
    return NormalFormSentence(voc, tuple(exs), tuple(uns))


def _vacuous(taken) -> str:
    i = 0
    while f"w{i}" in taken:
        i += 1
    return f"w{i}"


def pad_width(nf: NormalFormSentence) -> NormalFormSentence:
    """Ensure width >= 2 with a vacuous universal conjunct over two variables."""
    if nf.width >= 2:
        return nf
    pad = UniversalConjunct(2, Eq("x1", "x1"))
    return NormalFormSentence(nf.vocab, nf.existentials, nf.universals + (pad,))


class _Renamer:
    """Replaces quantifier blocks with fresh unary predicates, innermost first."""

    def __init__(self, taken: Iterable[str], prefix: str = "_n"):
        self.taken = set(taken)
        self.prefix = prefix
        self.counter = 0
        self.exs: list[ExistentialConjunct] = []
        self.uns: list[UniversalConjunct] = []
        self.fresh: list[str] = []

    def new_name(self) -> str:
        while True:
            self.counter += 1
            name = f"{self.prefix}{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                self.fresh.append(name)
                return name

    def flatten(self, f: Formula, spare: str) -> Formula:
        """Rewrite ``f`` without quantifiers; ``spare`` is a variable in scope used to
        host predicates that stand for closed subformulas."""
        if isinstance(f, (Atom, Eq)):
            return f
        if isinstance(f, Not):
            return Not(self.flatten(f.body, spare))
        if isinstance(f, And):
            return And(tuple(self.flatten(p, spare) for p in f.parts))
        if isinstance(f, Or):
            return Or(tuple(self.flatten(p, spare) for p in f.parts))
        if isinstance(f, Implies):
            return Implies(self.flatten(f.left, spare), self.flatten(f.right, spare))
        if isinstance(f, Iff):
            return Iff(self.flatten(f.left, spare), self.flatten(f.right, spare))
        return self.block(f, spare)

    def block(self, q: Quant, spare: str) -> Formula:
        kind, vars, body = merged_block(q)
        outside = free_vars(body) - set(vars)
        if len(outside) > 1:
            raise NormalFormError(f"block leaves {sorted(outside)} free", render_formula(q)[:60])
        host = next(iter(outside)) if outside else None
        inner_spare = host or vars[0]
        matrix = self.flatten(body, inner_spare)
        name = self.new_name()
        k = len(vars)
        if host is None:
            # closed block: the two conjuncts below force the predicate to be constant,
            # so any variable in scope can host it
            renamed = _rename(matrix, vars, ex_vars(k)[1:])
        else:
            renamed = _rename(matrix, (host,) + vars, ex_vars(k))
        head = Atom(name, ("x",))
        if kind == "exists":
            # P(x) -> exists y. M   and   M -> P(x)
            self.exs.append(ExistentialConjunct(k, Implies(head, renamed)))
            un_matrix = Implies(renamed, head)
        else:
            # P(x) -> M   and   ~P(x) -> exists y. ~M
            self.exs.append(ExistentialConjunct(k, Implies(Not(head), Not(renamed))))
            un_matrix = Implies(head, renamed)
        self.uns.append(UniversalConjunct(k + 1, _rename(un_matrix, ex_vars(k), un_vars(k + 1))))
        return Atom(name, (host or spare,))


def to_normal_form(f: Formula, profile: FragmentProfile | None = None) -> NormalFormSentence:
    """Equisatisfiable normal form; new symbols are unary predicates named ``_n<i>``."""
    report = check_fragment(f, profile or FragmentProfile())
    if not report.accepted:
        v = report.violations[0]
        raise NormalFormError(f"not in U1 ({v.kind}): {v.message}", v.location)
    if free_vars(f):
        raise NormalFormError(f"not a sentence; free variables {sorted(free_vars(f))}")
    base_vocab = infer_vocabulary(f).union(Vocabulary.of({ORDER: 2}))
    renamer = _Renamer(base_vocab.names)
    exs: list[ExistentialConjunct] = []
    uns: list[UniversalConjunct] = []
    loose: list[Formula] = []
    for c in _split_conjuncts(f):
        chain = _block_chain(c) if isinstance(c, Quant) else []
        if chain and chain[0][0] == "forall":
            _, uvars, body = merged_block(c)
            if (
                isinstance(body, Quant)
                and body.kind == "exists"
                and len(uvars) == 1
                and uvars[0] not in merged_block(body)[1]
            ):
                _, evars, inner = merged_block(body)
                matrix = renamer.flatten(inner, uvars[0])
                k = len(evars)
                exs.append(ExistentialConjunct(k, _rename(matrix, uvars + evars, ex_vars(k))))
                continue
            if len(set(uvars)) == len(uvars):
                matrix = renamer.flatten(body, uvars[0])
                l = len(uvars)
                uns.append(UniversalConjunct(l, _rename(matrix, uvars, un_vars(l))))
                continue
        loose.append(c)
    if loose:
        matrix = renamer.flatten(conj(loose), "x1")
        uns.append(UniversalConjunct(1, matrix))
    vocab = base_vocab.with_symbols({name: 1 for name in renamer.fresh})
    nf = NormalFormSentence(vocab, tuple(exs + renamer.exs), tuple(uns + renamer.uns))
    return pad_width(nf)
