"""The pseudo-ordering axioms Ax(Gamma) as a normal form sentence over the extended vocabulary."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .admissibility import AdmissibilityTuple, sorted_types
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
    Vocabulary,
    all_vars,
    check_fragment,
    conj,
    disj,
    exists,
    forall,
    live_variables,
    substitute,
)
from .normal_form import (
    ORDER,
    ExistentialConjunct,
    NormalFormSentence,
    UniversalConjunct,
    ex_vars,
    un_vars,
)
from .structures import FiniteStructure, compile_formula
from .types_tables import enumerate_one_types, table_of

K_SYM, D_SYM, BOT_SYM, TOP_SYM = "_K", "_D", "_Pbot", "_Ptop"
AXIOM_NAMES = {
    1: "the sentence itself",
    2: "intervals partition the domain",
    3: "intervals realize their type sets",
    4: "court intervals are singletons",
    5: "pawn types occur at least n times",
    6: "royal types occur between 1 and n-1 times",
    7: "K marks the royal types",
    8: "free witness bookkeeping",
    9: "K and D lie in court intervals",
    10: "K and D have witnesses inside the court",
    11: "the court is copied",
    12: "< is a tournament",
    13: "first realizations",
    14: "last realizations",
    15: "intervals are ordered",
    16: "last types have earlier companions",
}


def u_sym(s: int) -> str:
    return f"_U{s}"


def axiom_symbols(N: int) -> dict[str, int]:
    out = {K_SYM: 1, D_SYM: 1, BOT_SYM: 1, TOP_SYM: 1}
    out.update({u_sym(s): 1 for s in range(1, N + 1)})
    return out


@dataclass(frozen=True)
class AxiomsOutput:
    sentence: NormalFormSentence
    # one axiom number per conjunct, existentials first, then universals
    ex_axiom: tuple[int, ...]
    un_axiom: tuple[int, ...]

    @property
    def vocab(self) -> Vocabulary:
        return self.sentence.vocab

    def conjuncts_of(self, axiom: int) -> list[Formula]:
        out = [e.formula() for e, a in zip(self.sentence.existentials, self.ex_axiom) if a == axiom]
        out += [u.formula() for u, a in zip(self.sentence.universals, self.un_axiom) if a == axiom]
        return out

    def render(self) -> str:
        lines = []
        for axiom in range(1, 17):
            parts = self.conjuncts_of(axiom)
            lines.append(f"# axiom {axiom}: {AXIOM_NAMES[axiom]} ({len(parts)} conjuncts)")
            lines.extend(str(p) for p in parts)
        return "\n".join(lines) + "\n"

    def failing_axioms(self, B: FiniteStructure) -> list[int]:
        """Axiom numbers with a conjunct false in ``B``."""
        bad = set()
        for e, a in zip(self.sentence.existentials, self.ex_axiom):
            if a not in bad and not _holds_existential(B, e):
                bad.add(a)
        for u, a in zip(self.sentence.universals, self.un_axiom):
            if a not in bad and not _holds_universal(B, u):
                bad.add(a)
        return sorted(bad)


def _holds_existential(B: FiniteStructure, e: ExistentialConjunct) -> bool:
    fn = compile_formula(B, e.matrix, e.vars)
    ys = e.vars[1:]
    # matrices here often ignore x; checking one x then suffices
    if "x" not in _vars_of(e.matrix) and B.size:
        return any(fn(0, *b) for b in itertools.product(B.domain, repeat=len(ys)))
    return all(any(fn(a, *b) for b in itertools.product(B.domain, repeat=len(ys))) for a in B.domain)


def _holds_universal(B: FiniteStructure, u: UniversalConjunct) -> bool:
    fn = compile_formula(B, u.matrix, u.vars)
    return all(fn(*t) for t in itertools.product(B.domain, repeat=u.l))


def _vars_of(f: Formula) -> frozenset:
    return all_vars(f)


def _u(s: int, v: str) -> Formula:
    return Atom(u_sym(s), (v,))


class _Builder:
    def __init__(self):
        self.exs: list[ExistentialConjunct] = []
        self.uns: list[UniversalConjunct] = []
        self.ex_ax: list[int] = []
        self.un_ax: list[int] = []

    def ex(self, axiom: int, k: int, matrix: Formula):
        self.exs.append(ExistentialConjunct(k, matrix))
        self.ex_ax.append(axiom)

    def closed_ex(self, axiom: int, k: int, matrix_over_y: Formula):
        """An existential sentence exists y1..yk . M, hosted on a vacuous x."""
        self.ex(axiom, k, matrix_over_y)

    def un(self, axiom: int, l: int, matrix: Formula):
        self.uns.append(UniversalConjunct(l, matrix))
        self.un_ax.append(axiom)


def generate_pseudo_ordering_axioms(
    gamma: AdmissibilityTuple, nf: NormalFormSentence, axiom3: str = "exact", check: bool = True
) -> AxiomsOutput:
    """Ax(gamma) for ``nf``. ``axiom3='exact'`` states that each interval realizes exactly
    its type set (every element of U_s has a type in the set and every type in the set
    occurs in U_s); ``axiom3='biconditional'`` emits U_s(x) <-> OR alpha(x) instead."""
    if set(gamma.vocab.names) != set(nf.vocab.names):
        raise ValueError("tuple and sentence are over different vocabularies")
    if axiom3 not in ("exact", "biconditional"):
        raise ValueError("axiom3 is 'exact' or 'biconditional'")
    sigma = nf.vocab
    extra = axiom_symbols(gamma.N)
    clash = set(extra) & set(sigma.names)
    if clash:
        raise ValueError(f"sentence already uses reserved symbols {sorted(clash)}")
    vocab = sigma.with_symbols(extra)
    n = nf.width
    N = gamma.N
    all_types = list(enumerate_one_types(sigma))
    union = sorted_types(gamma.union())
    royal = sorted_types(gamma.royal)
    court_types = gamma.court_types()

    def tp(t, v):
        return t.formula(v, sigma)

    b = _Builder()
    # 1
    for e in nf.existentials:
        b.ex(1, e.k, e.matrix)
    for u in nf.universals:
        b.un(1, u.l, u.matrix)
    # 2
    for s in range(1, N + 1):
        b.closed_ex(2, 1, _u(s, "y1"))
    b.un(2, 1, disj([conj([_u(s, "x1")] + [Not(_u(t, "x1")) for t in range(1, N + 1) if t != s]) for s in range(1, N + 1)], "x1"))
    # 3
    for s in range(1, N + 1):
        types_s = sorted_types(gamma.family[s - 1])
        body = disj([tp(t, "x1") for t in types_s], "x1")
        if axiom3 == "biconditional":
            b.un(3, 1, Iff(_u(s, "x1"), body))
        else:
            b.un(3, 1, Implies(_u(s, "x1"), body))
            for t in types_s:
                b.closed_ex(3, 1, And((_u(s, "y1"), tp(t, "y1"))))
    # 4
    for c, s in enumerate(gamma.delta):
        b.closed_ex(4, 1, And((_u(s, "y1"), tp(court_types[c], "y1"))))
        b.un(4, 2, Implies(And((_u(s, "x1"), _u(s, "x2"))), Eq("x1", "x2")))
    # 5
    ys = ex_vars(n)[1:]
    for t in union:
        if t in gamma.royal:
            continue
        distinct = [Not(Eq(a, c)) for a, c in itertools.combinations(ys, 2)]
        b.closed_ex(5, n, conj(distinct + [tp(t, y) for y in ys], "y1"))
    # 6
    xs = un_vars(n)
    for t in royal:
        b.closed_ex(6, 1, tp(t, "y1"))
        same = [Eq(a, c) for a, c in itertools.combinations(xs, 2)]
        b.un(6, n, Implies(conj([tp(t, x) for x in xs], "x1"), disj(same, "x1")))
    # 7
    b.un(7, 1, Iff(disj([tp(t, "x1") for t in royal], "x1"), Atom(K_SYM, ("x1",))))
    # 8
    for i, e in enumerate(nf.existentials):
        live = live_variables(e.matrix, e.vars)
        shifted_vars = ex_vars(e.k + 1)[1:]  # y1..y_{k+1}
        ren = dict(zip(e.vars, shifted_vars))
        matrix = _rename(e.matrix, e.vars, shifted_vars)
        xv = ren["x"]
        zs = [ren[z] for z in e.vars if z in live]
        for t in all_types:
            if (t, i) in gamma.F:
                extra_lits = [part for z in zs for part in (Not(Eq(z, xv)), Atom(D_SYM, (z,)))]
                b.closed_ex(8, e.k + 1, conj([tp(t, xv), matrix] + extra_lits, xv))
        uvars = un_vars(e.k + 1)
        umatrix = _rename(e.matrix, e.vars, uvars)
        uren = dict(zip(e.vars, uvars))
        for t in all_types:
            if (t, i) not in gamma.F:
                body = conj([tp(t, uren["x"]), umatrix] + [Not(Eq(uren[z], uren["x"])) for z in e.vars if z in live], "x1")
                b.un(8, e.k + 1, Not(body))
    # 9
    court_cover = lambda v: disj([_u(s, v) for s in gamma.delta], v)  # noqa: E731
    b.un(9, 1, Implies(Or((Atom(K_SYM, ("x1",)), Atom(D_SYM, ("x1",)))), court_cover("x1")))
    # 10
    for e in nf.existentials:
        inside = [court_cover(y) for y in e.vars[1:]]
        b.ex(
            10,
            e.k,
            Implies(Or((Atom(K_SYM, ("x",)), Atom(D_SYM, ("x",)))), conj(inside + [e.matrix], "x")),
        )
    # 11
    m = nf.m
    for k in range(1, m + 1):
        for combo in itertools.combinations(range(gamma.court_size), k):
            xs_k = un_vars(k)
            guard = conj([_u(gamma.delta[c], x) for c, x in zip(combo, xs_k)], "x1")
            if k == 1:
                beta = tp(court_types[combo[0]], "x1")
            else:
                beta = table_of(gamma.court, combo, sigma).formula(xs_k)
            b.un(11, k, Implies(guard, beta))
    # 12
    lt = lambda a, c: Atom(ORDER, (a, c))  # noqa: E731
    b.un(12, 2, Or((lt("x1", "x2"), lt("x2", "x1"), Eq("x1", "x2"))))
    b.un(12, 2, Not(And((lt("x1", "x2"), lt("x2", "x1")))))
    # 13 and 14
    for axiom, sym, chosen, boundary in ((13, BOT_SYM, gamma.bottom, gamma.minus), (14, TOP_SYM, gamma.top, gamma.plus)):
        for t in all_types:
            if t not in chosen:
                b.un(axiom, 1, Not(And((tp(t, "x1"), Atom(sym, ("x1",))))))
        for t in sorted_types(chosen):
            b.closed_ex(axiom, 1, And((tp(t, "y1"), Atom(sym, ("y1",)))))
        for t in sorted_types(chosen):
            guard = conj([Atom(sym, ("x1",)), tp(t, "x1"), tp(t, "x2"), Not(Eq("x2", "x1"))], "x1")
            after = lt("x1", "x2") if axiom == 13 else lt("x2", "x1")
            b.un(axiom, 2, Implies(guard, after))
        for s in range(1, N + 1):
            for t in sorted_types(boundary(s) & chosen):
                b.closed_ex(axiom, 1, conj([Atom(sym, ("y1",)), tp(t, "y1"), _u(s, "y1")], "y1"))
    # 15
    for s in range(1, N + 1):
        for t in range(s + 1, N + 1):
            b.un(15, 2, Implies(And((_u(s, "x1"), _u(t, "x2"))), lt("x1", "x2")))
    # 16
    image = gamma.image()
    for s in range(1, N + 1):
        if s in image:
            continue
        for t in sorted_types(gamma.plus(s)):
            for t2 in sorted_types(gamma.family[s - 1]):
                b.closed_ex(16, 2, conj([tp(t, "y1"), tp(t2, "y2"), _u(s, "y1"), _u(s, "y2"), lt("y2", "y1")], "y1"))

    sentence = NormalFormSentence(vocab, tuple(b.exs), tuple(b.uns))
    out = AxiomsOutput(sentence, tuple(b.ex_ax), tuple(b.un_ax))
    if check:
        profile = FragmentProfile()
        for f in sentence.conjuncts():
            report = check_fragment(f, profile)
            if not report.accepted:
                raise AssertionError(f"generated axiom left the fragment: {report.violations[0].message}")
    return out


def _rename(f: Formula, old, new) -> Formula:
    tmp = {v: f"__r{i}" for i, v in enumerate(old)}
    return substitute(substitute(f, tmp), {f"__r{i}": w for i, w in enumerate(new)})


def compact_min_max_axioms(gamma: AdmissibilityTuple, nf: NormalFormSentence) -> list[Formula]:
    """The short readings of axioms 13/14: exists x (min_alpha(x) & U_s x) for alpha in
    minus(s) & bottom, and the max analogue. Not in normal form."""
    sigma = nf.vocab
    out = []
    for s in range(1, gamma.N + 1):
        for chosen, boundary, first in ((gamma.bottom, gamma.minus(s), True), (gamma.top, gamma.plus(s), False)):
            for t in sorted_types(boundary & chosen):
                a_x, a_y = t.formula("x", sigma), t.formula("y", sigma)
                rel = Atom(ORDER, ("x", "y")) if first else Atom(ORDER, ("y", "x"))
                extremal = And((a_x, forall("y", Implies(And((a_y, Not(Eq("x", "y")))), rel))))
                out.append(exists("x", And((extremal, _u(s, "x")))))
    return out
