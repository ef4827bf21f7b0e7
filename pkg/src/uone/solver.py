"""Satisfiability over finite, well-founded and arbitrary linear orders.

Three searches live here: a brute-force oracle over canonically ordered finite
structures, a bounded model search for the pseudo-ordering axioms of a fixed tuple,
and the full pipeline that looks for an admissibility tuple together with a model of
its axioms. Every positive answer carries a certificate that can be re-checked from
scratch by :func:`verify_certificate`.
"""

from __future__ import annotations

import itertools
import json
import os
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from pysat.solvers import Solver

from .admissibility import (
    AdmissibilityTuple,
    EnumerationBudget,
    check_admissibility,
    enumerate_admissibility_tuples,
    parse_tuple,
    serialize_tuple,
)
from .axioms import BOT_SYM, D_SYM, K_SYM, TOP_SYM, axiom_symbols, generate_pseudo_ordering_axioms, u_sym
from .constructions import free_witness_pairs
from .formula import Formula, FragmentProfile, Vocabulary, check_fragment, infer_vocabulary, live_variables, parse_formula, render_formula
from .grounding import SOLVER_NAME, Grounding, SearchTimeout, find_model, limited_solve, to_nnf
from .normal_form import ORDER, NormalFormSentence, to_normal_form
from .structures import (
    ORDER_CLASSES,
    BudgetExceeded,
    FiniteStructure,
    canonical_order,
    class_membership,
    count_ordered_structures,
    enumerate_ordered_structures,
    model_check,
    read_structure,
    write_structure,
)
from .types_tables import types_of

FORMAT_VERSION = "uone-certificate v1"
BUDGET_ENV = "UONE_BUDGET_PROFILE"


class BudgetError(ValueError):
    """Budgets that cannot be used (non-positive, or too small for --complete)."""


class FragmentViolation(ValueError):
    def __init__(self, report):
        self.report = report
        v = report.violations[0]
        super().__init__(f"{v.location}: {v.kind}: {v.message}")


# --------------------------------------------------------------------------
# Budgets and verdicts


@dataclass(frozen=True)
class Budgets:
    """Search limits. The exact bounds that make the search complete are exponential
    (models of the axioms may need 8 m^2 n^2 |types| elements, tuples may have an index
    of 6|phi|^4 |types|), so these are practical cut-offs, not guarantees."""

    max_oracle_domain: int = 4
    max_gamma_index: int = 8
    max_court_size: int = 4
    max_ax_model_domain: int = 8
    wall_clock: float = 120.0
    max_clauses: int = 2_000_000

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise BudgetError(f"budget {name} must be positive, got {value}")


PROFILES = {
    "quick": Budgets(max_oracle_domain=3, max_gamma_index=4, max_court_size=2, max_ax_model_domain=5, wall_clock=20.0),
    "desk": Budgets(),
    # enough for every ordered model with at most four elements: its canonical tuple
    # uses four clones per pawn, so the axioms have a model with at most 16 elements
    "sufficient": Budgets(max_oracle_domain=4, max_gamma_index=16, max_court_size=4, max_ax_model_domain=16, wall_clock=900.0),
}


def default_budgets(profile: str | None = None) -> Budgets:
    name = profile or os.environ.get(BUDGET_ENV, "desk")
    if name not in PROFILES:
        raise BudgetError(f"unknown budget profile {name!r}; choose from {sorted(PROFILES)}")
    return PROFILES[name]


@dataclass(frozen=True)
class Certificate:
    """Either a finite ordered model of the input (``gamma`` is None) or a tuple
    together with a model of its pseudo-ordering axioms."""

    formula: str
    K: str
    source: str
    structure: FiniteStructure
    gamma: AdmissibilityTuple | None = None

    @property
    def kind(self) -> str:
        return "ordered-model" if self.gamma is None else "pseudo-ordering"

    def files(self) -> dict[str, str]:
        head = [
            FORMAT_VERSION,
            f"kind: {self.kind}",
            f"class: {self.K}",
            f"source: {self.source}",
            f"formula: {self.formula}",
            f"solver: {SOLVER_NAME}",
        ]
        out = {"provenance.txt": "\n".join(head) + "\n", "structure.txt": write_structure(self.structure)}
        if self.gamma is not None:
            out["gamma.txt"] = serialize_tuple(self.gamma)
        return out

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        stale = path / "gamma.txt"
        if self.gamma is None and stale.exists():
            stale.unlink()
        for name, text in self.files().items():
            (path / name).write_text(text)
        return path


class CertificateFormatError(ValueError):
    pass


def read_certificate(path: str | Path) -> Certificate:
    path = Path(path)
    try:
        lines = (path / "provenance.txt").read_text().splitlines()
    except OSError as e:
        raise CertificateFormatError(f"cannot read provenance: {e}") from e
    if not lines or lines[0] != FORMAT_VERSION:
        raise CertificateFormatError("missing or unknown certificate header")
    meta = {}
    for line in lines[1:]:
        key, sep, value = line.partition(": ")
        if not sep:
            raise CertificateFormatError(f"bad provenance line {line!r}")
        meta[key] = value
    for key in ("kind", "class", "source", "formula"):
        if key not in meta:
            raise CertificateFormatError(f"provenance lacks {key}")
    structure = read_structure((path / "structure.txt").read_text())
    gamma = None
    if meta["kind"] == "pseudo-ordering":
        gamma = parse_tuple((path / "gamma.txt").read_text())
    elif meta["kind"] != "ordered-model":
        raise CertificateFormatError(f"unknown certificate kind {meta['kind']!r}")
    return Certificate(meta["formula"], meta["class"], meta["source"], structure, gamma)


@dataclass
class SolveVerdict:
    status: str  # "sat" | "no-model-within-budget" | "unsat" | "error"
    budgets: Budgets
    K: str
    certificate: Certificate | None = None
    source: str = ""
    message: str = ""
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == "sat"

    def as_dict(self) -> dict:
        out = {"schema": "uone-verdict/1", "verdict": self.status, "class": self.K, "source": self.source}
        if self.certificate is not None:
            cert = self.certificate
            out["certificate_kind"] = cert.kind
            out["domain"] = cert.structure.size
            if cert.gamma is not None:
                out["index"] = cert.gamma.N
                out["court"] = cert.gamma.court_size
        if self.message:
            out["message"] = self.message
        out["budgets"] = asdict(self.budgets)
        out["stats"] = dict(self.stats)
        return out

    def render(self, as_json: bool = False) -> str:
        d = self.as_dict()
        if as_json:
            return json.dumps(d, indent=2, sort_keys=True)
        lines = []
        for key, value in d.items():
            if isinstance(value, dict):
                for k2, v2 in value.items():
                    lines.append(f"{key}.{k2}: {v2}")
            else:
                lines.append(f"{key}: {value}")
        return "\n".join(lines)


# --------------------------------------------------------------------------
# Inputs


def _check_class(K: str) -> str:
    if K not in ORDER_CLASSES:
        raise ValueError(f"class must be one of {ORDER_CLASSES}, got {K!r}")
    return K


def _require_fragment(f: Formula, profile: FragmentProfile | None) -> None:
    report = check_fragment(f, profile or FragmentProfile())
    if not report.accepted:
        raise FragmentViolation(report)


def _as_formula(f) -> Formula:
    return parse_formula(f) if isinstance(f, str) else f


def _deadline(budgets: Budgets, start: float | None = None) -> float:
    return (start if start is not None else time.monotonic()) + budgets.wall_clock


# --------------------------------------------------------------------------
# Brute-force oracle


ENUMERATION_LIMIT = 1 << 14  # structures per size below which plain enumeration is used


def brute_force_ordered_sat(
    f,
    K: str = "Ofin",
    budgets: Budgets | None = None,
    profile: FragmentProfile | None = None,
    deadline: float | None = None,
) -> SolveVerdict:
    """Look for a finite model with < the canonical order 0 < 1 < ..., sizes
    1..max_oracle_domain. A finite linear order is a well-order and a linear order, so
    any model found answers all three classes. Small search spaces are enumerated
    outright; larger ones are grounded with the order fixed, which is equally exhaustive
    per size."""
    _check_class(K)
    budgets = budgets or default_budgets()
    if isinstance(f, NormalFormSentence):
        target, vocab, text = f.formula(), f.vocab, f.render()
    else:
        target = _as_formula(f)
        _require_fragment(target, profile)
        vocab = infer_vocabulary(target).union(Vocabulary.of({ORDER: 2}))
        text = render_formula(target)
    deadline = deadline if deadline is not None else _deadline(budgets)
    sizes_done = 0
    for size in range(1, budgets.max_oracle_domain + 1):
        if time.monotonic() > deadline:
            break
        model = None
        if count_ordered_structures(vocab, size) <= ENUMERATION_LIMIT:
            for A in enumerate_ordered_structures(vocab, size, fix_order=True, budget_bits=14):
                if model_check(A, target):
                    model = A
                    break
        else:
            try:
                model = find_model(vocab, size, [target], fixed={ORDER: canonical_order(size)}, max_clauses=budgets.max_clauses, deadline=deadline)
            except SearchTimeout:
                break
        if model is not None:
            cert = Certificate(text, K, "oracle", model)
            return SolveVerdict("sat", budgets, K, cert, "oracle", stats={"domain": size})
        sizes_done = size
    return SolveVerdict(
        "no-model-within-budget",
        budgets,
        K,
        message=f"no ordered model with at most {sizes_done} elements",
        stats={"sizes_searched": sizes_done},
    )


# --------------------------------------------------------------------------
# Bounded model search for a fixed normal form sentence


def bounded_general_model_search(
    nf: NormalFormSentence,
    max_domain: int,
    max_clauses: int = 2_000_000,
    deadline: float | None = None,
    fixed: dict | None = None,
) -> FiniteStructure | None:
    """Least size model of ``nf`` with at most ``max_domain`` elements, < unconstrained.
    Each size is grounded and handed to a CDCL solver, whose unit propagation and
    clause learning play the role of type-level propagation. Raises BudgetExceeded when
    the grounding or the clock runs out, so that it is never mistaken for absence."""
    if max_domain < 1:
        raise BudgetError("max_domain must be positive")
    for size in range(1, max_domain + 1):
        model = find_model(nf.vocab, size, nf=nf, fixed=fixed, max_clauses=max_clauses, deadline=deadline)
        if model is not None:
            return model
    return None


# --------------------------------------------------------------------------
# Joint search for a tuple and a model of its axioms


class _Joint:
    """Clauses describing a structure B over sigma plus the axiom predicates, of a fixed
    size, such that the tuple read off B is admissible and B satisfies its axioms.

    The tuple is not guessed separately: interval types, royal types, the bottom and
    top sets, the court and F are all functions of B, so the encoding only has to make
    the axioms that relate B to those read-off values true. Elements are sorted by their
    interval, which costs nothing since B carries no order of its own."""

    def __init__(self, nf: NormalFormSentence, d: int, n_max: int, K: str, max_court: int, max_clauses: int):
        self.nf, self.d, self.n_max, self.K = nf, d, n_max, K
        sigma = nf.vocab
        self.vocab = sigma.with_symbols(axiom_symbols(n_max))
        g = self.g = Grounding(self.vocab, d, max_clauses=max_clauses)
        dom = range(d)
        S = range(1, n_max + 1)
        clause = g.add_clause

        def at(rel, *args):
            return g.atom(rel, args)

        self.u = u = {(x, s): at(u_sym(s), x) for x in dom for s in S}
        # each element in exactly one interval; used intervals form a prefix
        for x in dom:
            clause([u[x, s] for s in S])
            g.at_most([u[x, s] for s in S], 1)
        self.used = used = {s: g.new_var() for s in S}
        for s in S:
            for x in dom:
                clause([-u[x, s], used[s]])
            clause([-used[s]] + [u[x, s] for x in dom])
            if s > 1:
                clause([-used[s], used[s - 1]])
        # ule[x, b]: the interval of x is at most b
        ule = {}
        for x in dom:
            prev = False
            for b in S:
                if b == n_max:
                    ule[x, b] = True
                    continue
                v = g.new_var()
                self._iff_or(v, [prev, u[x, b]])
                ule[x, b] = prev = v
        for x in range(d - 1):
            for b in range(1, n_max):
                clause([-ule[x + 1, b], ule[x, b]])
        # diff[x, y] (x < y as indices): y sits in a later interval than x
        self.diff = diff = {}
        for x in dom:
            for y in range(x + 1, d):
                parts = []
                for b in range(1, n_max):
                    t = g.new_var()
                    self._iff_and(t, [ule[x, b], -ule[y, b]])
                    parts.append(t)
                v = g.new_var()
                self._iff_or(v, parts)
                diff[x, y] = v

        # 12 and 15
        lt = self.lt = lambda a, b: at(ORDER, a, b)  # noqa: E731
        for x in dom:
            clause([-lt(x, x)])
            for y in range(x + 1, d):
                clause([lt(x, y), lt(y, x)])
                clause([-lt(x, y), -lt(y, x)])
                clause([-diff[x, y], lt(x, y)])

        # same 1-type
        bits = {x: [at(name, *(x,) * sigma.arity(name)) for name in sigma.names] for x in dom}
        self.same = same = {}
        for x in dom:
            for y in range(x + 1, d):
                es = []
                for a, b in zip(bits[x], bits[y]):
                    e = g.new_var()
                    clause([-e, -a, b])
                    clause([-e, a, -b])
                    clause([e, a, b])
                    clause([e, -a, -b])
                    es.append(e)
                v = g.new_var()
                self._iff_and(v, es)
                same[x, y] = same[y, x] = v

        def seq(x, y):
            return True if x == y else same[x, y]

        def together(x, y):
            if x == y:
                return True
            return -diff[min(x, y), max(x, y)]

        self.seq, self.together = seq, together

        # royal types: at most n-1 realizations (5, 6, 7)
        n = nf.width
        royal = {}
        for x in dom:
            others = [same[x, y] for y in dom if y != x]
            royal[x] = self._not_at_least(others, n - 1)
            k = at(K_SYM, x)
            clause([-k, royal[x]])
            clause([k, _neg(royal[x])])
        self.royal = royal

        # court intervals are singletons (4)
        self.court = court = {s: g.new_var() for s in S}
        g.at_most([court[s] for s in S], max_court)
        for s in S:
            clause([-court[s], used[s]])
            for x in dom:
                for y in range(x + 1, d):
                    clause([-court[s], -u[x, s], -u[y, s]])
        cin = {}
        for x in dom:
            ws = []
            for s in S:
                w = g.new_var()
                self._iff_and(w, [u[x, s], court[s]])
                ws.append(w)
            v = g.new_var()
            self._iff_or(v, ws)
            cin[x] = v
        self.cin = cin

        # 9
        for x in dom:
            clause([-at(K_SYM, x), cin[x]])
            clause([-at(D_SYM, x), cin[x]])

        # 10
        for e in nf.existentials:
            node = to_nnf(e.matrix)
            ys = e.vars[1:]
            for x in dom:
                lits = []
                for combo in _tuples(d, len(ys)):
                    env = {"x": x, **dict(zip(ys, combo))}
                    lits.append(g.define_and([cin[y] for y in combo] + [g.lit(node, env)]))
                w = g.define_or(lits)
                clause([-at(K_SYM, x), w])
                clause([-at(D_SYM, x), w])

        # first and last occurrences of a type
        fm, lm = {}, {}
        for x in dom:
            fm[x] = self._none_of([self._exact_and([same[x, y], diff[y, x]]) for y in range(x)])
            lm[x] = self._none_of([self._exact_and([same[x, y], diff[x, y]]) for y in range(x + 1, d)])
        self.fm, self.lm = fm, lm

        # admissibility: royal types only in court intervals; court pawns are neither
        # first nor last occurrences
        for x in dom:
            clause([-cin[x], royal[x], -fm[x]])
            clause([-cin[x], royal[x], -lm[x]])
        if K in ("WO", "Ofin"):
            for x in dom:
                for y in range(x + 1, d):
                    clause([-fm[x], -fm[y], diff[x, y], same[x, y]])
        if K == "Ofin":
            for x in dom:
                for y in range(x + 1, d):
                    clause([-lm[x], -lm[y], diff[x, y], same[x, y]])

        # 13 and 14
        for sym, first, below, forced in (
            (BOT_SYM, fm, lambda a, b: lt(a, b), K in ("WO", "Ofin")),
            (TOP_SYM, lm, lambda a, b: lt(b, a), K == "Ofin"),
        ):
            P = {x: at(sym, x) for x in dom}
            for x in dom:
                for y in dom:
                    if x != y:
                        clause([-P[x], -same[x, y], below(x, y)])
                sel = g.new_var()
                for y in dom:
                    clause([-P[y], _neg(seq(x, y)), sel])
                if forced:
                    clause([sel])
                    clause([-sel] + [g.define_and([seq(x, y), P[y]]) for y in dom])
                here = [g.define_and([P[y], seq(x, y), together(x, y)]) for y in dom]
                clause([-first[x], -sel] + here)

        # 16
        above = {}
        for x in dom:
            for y2 in dom:
                above[x, y2] = g.define_or(
                    [g.define_and([seq(x, y1), together(y1, y2), lt(y2, y1)]) for y1 in dom if y1 != y2]
                )
        for x in dom:
            for y in dom:
                opts = [g.define_and([seq(y, y2), together(x, y2), above[x, y2]]) for y2 in dom]
                clause([_neg(together(x, y)), -lm[x], cin[x]] + opts)

        # 8
        for i, e in enumerate(nf.existentials):
            live = live_variables(e.matrix, e.vars)
            if "x" in live:
                continue
            node = to_nnf(e.matrix)
            neg = to_nnf(e.matrix, False)
            ys = e.vars[1:]
            live_pos = [j for j, v in enumerate(ys) if v in live]
            f_, g_ = {}, {}
            for x in dom:
                f_[x], g_[x] = g.new_var(), g.new_var()
                witnesses = []
                for combo in _tuples(d, len(ys)):
                    if any(combo[j] == x for j in live_pos):
                        continue
                    env = {"x": x, **dict(zip(ys, combo))}
                    clause([g.lit(neg, env), f_[x]])
                    witnesses.append(g.define_and([g.lit(node, env)] + [at(D_SYM, combo[j]) for j in live_pos]))
                clause([-g_[x]] + witnesses)
            for x in dom:
                clause([-f_[x]] + [g.define_and([seq(x, y), g_[y]]) for y in dom])

        # 1
        g.require_normal_form(nf)

    # -- small circuit helpers (full equivalences) -------------------------

    def _iff_or(self, v, lits):
        lits = [l for l in lits if l is not False]
        g = self.g
        if any(l is True for l in lits):
            g.add_clause([v])
            return
        g.add_clause([-v] + lits)
        for l in lits:
            g.add_clause([v, -l])

    def _iff_and(self, v, lits):
        lits = [l for l in lits if l is not True]
        g = self.g
        if any(l is False for l in lits):
            g.add_clause([-v])
            return
        for l in lits:
            g.add_clause([-v, l])
        g.add_clause([v] + [-l for l in lits])

    def _exact_and(self, lits):
        v = self.g.new_var()
        self._iff_and(v, lits)
        return v

    def _none_of(self, lits):
        v = self.g.new_var()
        self._iff_or(v, lits)
        return -v

    def _not_at_least(self, lits, bound):
        """Literal equivalent to 'fewer than ``bound`` of lits are true' (sequential
        counter with both directions); True when that cannot fail."""
        if bound > len(lits):
            return True
        if bound <= 0:
            return False
        g = self.g
        prev = [True] + [False] * bound  # prev[j]: at least j among the lits seen
        for l in lits:
            cur = [True]
            for j in range(1, bound + 1):
                a, b = prev[j], prev[j - 1]
                if a is True or (b is True and l is True):
                    cur.append(True)
                    continue
                v = g.new_var()
                # v <-> a | (b & l)
                if a is not False:
                    g.add_clause([v, -a])
                if b is not False:
                    g.add_clause([v] + ([-b] if b is not True else []) + [-l])
                g.add_clause([-v] + ([a] if a is not False else []) + ([b] if b is not False else []))
                g.add_clause([-v] + ([a] if a is not False else []) + [l])
                cur.append(v)
            prev = cur
        last = prev[bound]
        return True if last is False else -last

    # -- reading the answer ------------------------------------------------

    def solve(self, deadline: float | None):
        g = self.g
        if any(len(c) == 0 for c in g.clauses):
            return None
        with Solver(name=SOLVER_NAME, bootstrap_with=g.clauses) as s:
            if not limited_solve(s, (), deadline):
                return None
            model = {abs(l): l > 0 for l in s.get_model() or []}
        N = max(t for t in range(1, self.n_max + 1) if model.get(self.used[t], False))
        court = tuple(t for t in range(1, N + 1) if model.get(self.court[t], False))
        vocab = self.nf.vocab.with_symbols(axiom_symbols(N))
        B = g.structure(model, vocab)
        return B, court


def _neg(l):
    if l is True:
        return False
    if l is False:
        return True
    return -l


def _tuples(d: int, k: int):
    return itertools.product(range(d), repeat=k)


def read_off_tuple(B: FiniteStructure, nf: NormalFormSentence, court_intervals) -> AdmissibilityTuple:
    """The tuple whose axioms B is meant to satisfy: interval type sets, royal types
    (at most n-1 realizations), bottom/top sets from the extremal predicates, the court
    as B restricted to the given singleton intervals, and F from B's free witnesses."""
    sigma = nf.vocab
    N = sum(1 for name in B.vocab.names if name.startswith("_U"))
    base = B.reduct(sigma.names)
    tps = types_of(base, sigma)
    members = {s: [x for x in B.domain if (x,) in B.relations[u_sym(s)]] for s in range(1, N + 1)}
    family = tuple(frozenset(tps[x] for x in members[s]) for s in range(1, N + 1))
    counts: dict = {}
    for t in tps:
        counts[t] = counts.get(t, 0) + 1
    royal = frozenset(t for t, c in counts.items() if c <= nf.width - 1)
    bottom = frozenset(tps[x] for (x,) in B.relations[BOT_SYM])
    top = frozenset(tps[x] for (x,) in B.relations[TOP_SYM])
    delta = tuple(sorted(court_intervals))
    court_elems = []
    for s in delta:
        if len(members[s]) != 1:
            raise ValueError(f"court interval {s} is not a singleton")
        court_elems.append(members[s][0])
    court = base.restrict(court_elems)
    return AdmissibilityTuple(sigma, court, family, royal, bottom, top, delta, free_witness_pairs(base, nf))


def _joint_search(nf, K, budgets, deadline, stats):
    for d in range(1, budgets.max_ax_model_domain + 1):
        if time.monotonic() > deadline:
            raise SearchTimeout("wall-clock budget exhausted")
        enc = _Joint(nf, d, min(budgets.max_gamma_index, d), K, budgets.max_court_size, budgets.max_clauses)
        stats["largest_domain_tried"] = d
        stats["clauses"] = stats.get("clauses", 0) + len(enc.g.clauses)
        found = enc.solve(deadline)
        if found is None:
            continue
        B, court = found
        gamma = read_off_tuple(B, nf, court)
        return gamma, B
    return None


def _enumerate_search(nf, K, budgets, deadline, stats, monotone_delta=True):
    ebudget = EnumerationBudget(max_index=budgets.max_gamma_index, max_court=budgets.max_court_size)
    stream = enumerate_admissibility_tuples(nf, ebudget, K, monotone_delta=monotone_delta)
    tried = 0
    for gamma in stream:
        if time.monotonic() > deadline:
            raise SearchTimeout("wall-clock budget exhausted")
        tried += 1
        ax = generate_pseudo_ordering_axioms(gamma, nf, check=False)
        B = bounded_general_model_search(ax.sentence, budgets.max_ax_model_domain, budgets.max_clauses, deadline)
        if B is not None:
            stats["tuples_tried"] = tried
            return gamma, B
    stats["tuples_tried"] = tried
    if stream.truncated:
        raise BudgetExceeded("tuple enumeration budget exhausted")
    return None


def solve_ordered_sat(
    f,
    K: str = "Ofin",
    budgets: Budgets | None = None,
    fast_path: bool = True,
    strategy: str = "joint",
    complete: bool = False,
    monotone_delta: bool = True,
    profile: FragmentProfile | None = None,
) -> SolveVerdict:
    """Decide, within budgets, whether ``f`` has a model whose < is a linear order of
    class K. The brute-force oracle runs first when ``fast_path`` is on; the pipeline
    then searches for an admissibility tuple with a model of its axioms, either jointly
    (``strategy='joint'``) or by streaming tuples (``strategy='enumerate'``)."""
    _check_class(K)
    budgets = budgets or default_budgets()
    if strategy not in ("joint", "enumerate"):
        raise ValueError("strategy is 'joint' or 'enumerate'")
    f = _as_formula(f)
    _require_fragment(f, profile)
    nf = to_normal_form(f, profile)
    if complete:
        need = completeness_domain(nf)
        if budgets.max_ax_model_domain < need or budgets.max_gamma_index < 6 * max(nf.size(), 1) ** 4 * 2 ** len(nf.vocab):
            raise BudgetError(
                f"--complete needs max_ax_model_domain >= {need} and an index budget of 6|phi|^4|types|; "
                "the budgets given do not cover that"
            )
    start = time.monotonic()
    deadline = _deadline(budgets, start)
    text = render_formula(f)
    stats: dict = {}
    if fast_path:
        quick = brute_force_ordered_sat(f, K, budgets, profile, deadline=deadline)
        if quick.sat:
            quick.certificate = replace(quick.certificate, source="fast-path")
            quick.source = "fast-path"
            return quick
    try:
        if strategy == "joint":
            found = _joint_search(nf, K, budgets, deadline, stats)
        else:
            found = _enumerate_search(nf, K, budgets, deadline, stats, monotone_delta)
    except BudgetExceeded as e:
        stats["seconds"] = round(time.monotonic() - start, 3)
        return SolveVerdict("no-model-within-budget", budgets, K, message=str(e), stats=_stable(stats))
    if found is None:
        status = "unsat" if complete else "no-model-within-budget"
        return SolveVerdict(status, budgets, K, message="search space exhausted", stats=_stable(stats))
    gamma, B = found
    cert = Certificate(text, K, "pipeline", B, gamma)
    report = verify_certificate(cert)
    if not report.ok:
        return SolveVerdict("error", budgets, K, cert, "pipeline", message="certificate failed verification: " + "; ".join(report.problems))
    return SolveVerdict("sat", budgets, K, cert, "pipeline", stats=_stable(stats))


def _stable(stats: dict) -> dict:
    return {k: v for k, v in stats.items() if k != "seconds"}


def completeness_domain(nf: NormalFormSentence) -> int:
    """A domain size past which a bounded search over the axioms is complete for the
    largest tuple allowed for ``nf``: 8 m^2 n^2 |types| for the axiom sentence."""
    size = max(nf.size(), 1)
    s = len(nf.vocab)
    N = 6 * size**4 * 2**s
    n_ax = max(nf.width + 1, 2)
    m_ax = nf.m_exists * (2 + 2**s) + N * (1 + 2 ** (s + 1) + 4**s) + 2 ** (s + 2) + N
    return 8 * m_ax**2 * n_ax**2 * 2 ** (s + N + 4)


# --------------------------------------------------------------------------
# Verification


@dataclass
class VerificationReport:
    ok: bool
    problems: list[str]
    failing_axioms: list[int] = field(default_factory=list)
    failed_conditions: list[str] = field(default_factory=list)

    def render(self) -> str:
        if self.ok:
            return "certificate: valid"
        lines = ["certificate: INVALID"] + [f"problem: {p}" for p in self.problems]
        if self.failing_axioms:
            lines.append("failing axioms: " + " ".join(map(str, self.failing_axioms)))
        return "\n".join(lines)


def verify_certificate(cert: Certificate, profile: FragmentProfile | None = None) -> VerificationReport:
    """Check a certificate from nothing but its own contents: re-derive the normal
    form, re-check the tuple and regenerate its axioms, then model-check."""
    problems: list[str] = []
    try:
        f = parse_formula(cert.formula)
    except Exception as e:  # noqa: BLE001 - any parse failure invalidates the certificate
        return VerificationReport(False, [f"formula does not parse: {e}"])
    if cert.K not in ORDER_CLASSES:
        return VerificationReport(False, [f"unknown class {cert.K!r}"])
    report = check_fragment(f, profile or FragmentProfile())
    if not report.accepted:
        return VerificationReport(False, [f"formula outside the fragment: {report.violations[0].message}"])
    A = cert.structure
    if cert.gamma is None:
        if ORDER not in A.vocab or not class_membership(A, ORDER, cert.K):
            problems.append("< is not a linear order of the class")
        else:
            vocab = infer_vocabulary(f)
            if not set(vocab.names) <= set(A.vocab.names):
                problems.append("structure lacks symbols of the formula")
            elif not model_check(A, f):
                problems.append("structure is not a model of the formula")
        return VerificationReport(not problems, problems)
    nf = to_normal_form(f, profile)
    gamma = cert.gamma
    errs = gamma.structural_errors(nf)
    problems.extend(errs)
    if errs:
        return VerificationReport(False, problems)
    adm = check_admissibility(gamma, cert.K)
    if not adm.admissible:
        problems.append("tuple not admissible: conditions " + ", ".join(adm.failed()))
    expected = nf.vocab.with_symbols(axiom_symbols(gamma.N))
    if A.vocab != expected:
        problems.append("structure vocabulary does not match the axioms")
        return VerificationReport(False, problems, failed_conditions=adm.failed())
    ax = generate_pseudo_ordering_axioms(gamma, nf)
    failing = ax.failing_axioms(A)
    if failing:
        problems.append("structure violates axioms " + ", ".join(map(str, failing)))
    return VerificationReport(not problems, problems, failing, adm.failed())
