"""Propositional grounding of formulas over a fixed finite domain, solved with a CDCL solver.

Ground atoms become propositional variables; quantifiers expand over the domain;
subformulas get Plaisted-Greenbaum definitions (one direction suffices because the
input is in negation normal form and every node occurs positively).
"""

from __future__ import annotations

import itertools
import threading
import time
from typing import Iterable, Mapping

from pysat.card import CardEnc, EncType
from pysat.solvers import Solver

from .formula import And, Atom, Eq, Formula, Iff, Implies, Not, Or, Vocabulary
from .structures import BudgetExceeded, FiniteStructure


class SearchTimeout(BudgetExceeded):
    pass


def limited_solve(solver, assumptions=(), deadline: float | None = None):
    """``solver.solve`` that gives up at ``deadline`` (a time.monotonic value)."""
    if deadline is None:
        return solver.solve(assumptions=list(assumptions))
    left = deadline - time.monotonic()
    if left <= 0:
        raise SearchTimeout("wall-clock budget exhausted")
    timer = threading.Timer(left, solver.interrupt)
    timer.start()
    try:
        result = solver.solve_limited(assumptions=list(assumptions), expect_interrupt=True)
    finally:
        timer.cancel()
    if result is None:
        raise SearchTimeout("wall-clock budget exhausted")
    solver.clear_interrupt()
    return result

# glucose supports interrupting a running search, which wall-clock budgets need
SOLVER_NAME = "glucose4"

# NNF node tags
LIT, AND, OR, ALL, EX = range(5)


def to_nnf(f: Formula, positive: bool = True):
    """Negation normal form as nested tuples:
    (LIT, atom, sign) | (AND, parts) | (OR, parts) | (ALL, vars, body) | (EX, vars, body)."""
    if isinstance(f, (Atom, Eq)):
        return (LIT, f, positive)
    if isinstance(f, Not):
        return to_nnf(f.body, not positive)
    if isinstance(f, And):
        return ((AND if positive else OR), tuple(to_nnf(p, positive) for p in f.parts))
    if isinstance(f, Or):
        return ((OR if positive else AND), tuple(to_nnf(p, positive) for p in f.parts))
    if isinstance(f, Implies):
        return to_nnf(Or((Not(f.left), f.right)), positive)
    if isinstance(f, Iff):
        a, b = f.left, f.right
        return to_nnf(Or((And((a, b)), And((Not(a), Not(b))))), positive)
    kind = f.kind == "forall"
    tag = ALL if kind == positive else EX
    return (tag, f.vars, to_nnf(f.body, positive))


class Grounding:
    """Accumulates clauses describing structures of a fixed size."""

    def __init__(
        self,
        vocab: Vocabulary,
        size: int,
        fixed: Mapping[str, Iterable[tuple]] | None = None,
        max_clauses: int = 3_000_000,
    ):
        self.vocab = vocab
        self.size = size
        self.fixed = {k: frozenset(map(tuple, v)) for k, v in (fixed or {}).items()}
        self.atoms: dict[tuple, int] = {}
        self.top = 0
        self.clauses: list[list[int]] = []
        self.max_clauses = max_clauses
        self.domain = range(size)

    # -- variables -------------------------------------------------------

    def new_var(self) -> int:
        self.top += 1
        return self.top

    def atom(self, rel: str, args: tuple[int, ...]):
        """Literal for a ground atom, or a bool when the relation is fixed."""
        if rel in self.fixed:
            return args in self.fixed[rel]
        key = (rel, args)
        v = self.atoms.get(key)
        if v is None:
            v = self.atoms[key] = self.new_var()
        return v

    def add_clause(self, lits: Iterable) -> None:
        out = []
        for l in lits:
            if l is True:
                return
            if l is False:
                continue
            out.append(l)
        self.clauses.append(out)
        if len(self.clauses) > self.max_clauses:
            raise BudgetExceeded(f"grounding exceeded {self.max_clauses} clauses")

    def define_or(self, lits: list) -> int | bool:
        """A literal implying the disjunction of ``lits``."""
        lits = [l for l in lits if l is not False]
        if any(l is True for l in lits):
            return True
        if not lits:
            return False
        if len(lits) == 1:
            return lits[0]
        a = self.new_var()
        self.add_clause([-a] + lits)
        return a

    def define_and(self, lits: list) -> int | bool:
        lits = [l for l in lits if l is not True]
        if any(l is False for l in lits):
            return False
        if not lits:
            return True
        if len(lits) == 1:
            return lits[0]
        a = self.new_var()
        for l in lits:
            self.clauses.append([-a, l])
        return a

    # -- encoding --------------------------------------------------------

    def lit(self, node, env: dict):
        tag = node[0]
        if tag == LIT:
            f, sign = node[1], node[2]
            if isinstance(f, Eq):
                val = env[f.left] == env[f.right]
                return val if sign else not val
            v = self.atom(f.rel, tuple(env[x] for x in f.args))
            if isinstance(v, bool):
                return v if sign else not v
            return v if sign else -v
        if tag == AND:
            out = []
            for p in node[1]:
                l = self.lit(p, env)
                if l is False:
                    return False
                out.append(l)
            return self.define_and(out)
        if tag == OR:
            out = []
            for p in node[1]:
                l = self.lit(p, env)
                if l is True:
                    return True
                out.append(l)
            return self.define_or(out)
        vars, body = node[1], node[2]
        out = []
        for combo in itertools.product(self.domain, repeat=len(vars)):
            inner = dict(env)
            inner.update(zip(vars, combo))
            out.append(self.lit(body, inner))
        return self.define_and(out) if tag == ALL else self.define_or(out)

    def require(self, node, env: dict) -> None:
        """Assert ``node`` under ``env`` (clauses directly where possible)."""
        tag = node[0]
        if tag == AND:
            for p in node[1]:
                self.require(p, env)
            return
        if tag == ALL:
            vars, body = node[1], node[2]
            for combo in itertools.product(self.domain, repeat=len(vars)):
                inner = dict(env)
                inner.update(zip(vars, combo))
                self.require(body, inner)
            return
        if tag == OR:
            lits = []
            for p in node[1]:
                l = self.lit(p, env)
                if l is True:
                    return
                lits.append(l)
            self.add_clause(lits)
            return
        l = self.lit(node, env)
        self.add_clause([l])

    def require_formula(self, f: Formula, env: dict | None = None) -> None:
        self.require(to_nnf(f), dict(env or {}))

    def require_normal_form(self, nf) -> None:
        for e in nf.existentials:
            node = to_nnf(e.matrix)
            ys = e.vars[1:]
            for a in self.domain:
                lits = []
                for combo in itertools.product(self.domain, repeat=len(ys)):
                    env = {"x": a}
                    env.update(zip(ys, combo))
                    l = self.lit(node, env)
                    if l is True:
                        break
                    lits.append(l)
                else:
                    self.add_clause(lits)
        for u in nf.universals:
            node = to_nnf(u.matrix)
            for combo in itertools.product(self.domain, repeat=u.l):
                self.require(node, dict(zip(u.vars, combo)))

    def at_least(self, lits: list[int], bound: int) -> None:
        self._card(lits, bound, "atleast")

    def at_most(self, lits: list[int], bound: int) -> None:
        self._card(lits, bound, "atmost")

    def _card(self, lits, bound, kind):
        consts = [l for l in lits if isinstance(l, bool)]
        lits = [l for l in lits if not isinstance(l, bool)]
        trues = sum(consts)
        bound -= trues
        if kind == "atleast":
            if bound <= 0:
                return
            if bound > len(lits):
                self.add_clause([])
                return
            if bound == 1:
                self.add_clause(lits)
                return
            enc = CardEnc.atleast(lits, bound=bound, top_id=self.top, encoding=EncType.seqcounter)
        else:
            if bound < 0:
                self.add_clause([])
                return
            if bound >= len(lits):
                return
            if bound == 0:
                for l in lits:
                    self.add_clause([-l])
                return
            enc = CardEnc.atmost(lits, bound=bound, top_id=self.top, encoding=EncType.seqcounter)
        self.top = max(self.top, enc.nv)
        for c in enc.clauses:
            self.add_clause(c)

    # -- solving ---------------------------------------------------------

    def solve(self, assumptions: Iterable[int] = (), deadline: float | None = None) -> dict | None:
        """Satisfying assignment as {var: bool}, or None."""
        if any(len(c) == 0 for c in self.clauses):
            return None
        with Solver(name=SOLVER_NAME, bootstrap_with=self.clauses) as s:
            if not limited_solve(s, assumptions, deadline):
                return None
            model = s.get_model() or []
        return {abs(l): l > 0 for l in model}

    def structure(self, model: dict, vocab: Vocabulary | None = None) -> FiniteStructure:
        vocab = vocab or self.vocab
        rels: dict[str, set] = {name: set() for name in vocab.names}
        for name, tuples in self.fixed.items():
            if name in rels:
                rels[name] = set(tuples)
        for (rel, args), v in self.atoms.items():
            if rel in rels and model.get(v, False):
                rels[rel].add(args)
        return FiniteStructure(vocab, self.size, rels)


def find_model(
    vocab: Vocabulary,
    size: int,
    formulas: Iterable[Formula] = (),
    nf=None,
    fixed: Mapping[str, Iterable[tuple]] | None = None,
    max_clauses: int = 3_000_000,
    deadline: float | None = None,
) -> FiniteStructure | None:
    g = Grounding(vocab, size, fixed, max_clauses)
    if nf is not None:
        g.require_normal_form(nf)
    for f in formulas:
        g.require_formula(f)
    model = g.solve(deadline=deadline)
    return None if model is None else g.structure(model)
