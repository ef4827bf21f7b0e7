"""Ordered models rebuilt from a tuple and a model of its axioms.

The domain is a sum of intervals, one per index s. Interval s is either a single
element (a court element of royal type), a single block (a court pawn), or the
concatenation J- . J . J+ of blocks, where each block has 3(m+n) elements of one
1-type and is split into E, F and G parts of m+n elements each. For finite orders each
part occurs once; for well-orders J+ repeats omega times; for arbitrary orders J-
also repeats towards the left.

Elements are addressed by (interval, repetition, block, position). Repetition is
negative inside J-, zero inside J and positive inside J+; addresses compare
lexicographically. Every table of the rebuilt model is copied from a table of
distinct elements of B with the same 1-types, chosen by fixed rules, so sampled
substructures can be computed on demand and always agree with each other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .admissibility import AdmissibilityTuple, check_admissibility, sorted_types
from .axioms import BOT_SYM, D_SYM, K_SYM, TOP_SYM, u_sym
from .formula import live_variables
from .normal_form import ORDER, NormalFormSentence
from .structures import FiniteStructure, canonical_order, compile_formula, model_check
from .types_tables import OneType, table_atoms, types_of

Address = tuple  # (interval, repetition, block, position)


class ReconstructionError(ValueError):
    pass


KINDS = {
    # repetition kinds of (J-, J, J+)
    "O": ("omegaStar", "finite", "omega"),
    "WO": ("finite", "finite", "omega"),
    "Ofin": ("finite", "finite", "finite"),
}


@dataclass(frozen=True)
class BlockLayout:
    """Interval s of the rebuilt order."""

    s: int
    minus: tuple  # block types of J-
    middle: tuple  # block types of J
    plus: tuple  # block types of J+
    kinds: tuple  # repetition kinds of (J-, J, J+)
    block_size: int
    court: str  # "" | "king" | "pawn"

    def types_at(self, r: int) -> tuple:
        if r < 0:
            return self.minus
        return self.middle if r == 0 else self.plus

    def has_repetition(self, r: int) -> bool:
        if r == 0:
            return True
        if r < 0:
            return bool(self.minus) and (r == -1 or self.kinds[0] == "omegaStar")
        return bool(self.plus) and (r == 1 or self.kinds[2] == "omega")

    def size_of_block(self) -> int:
        return 1 if self.court == "king" else self.block_size

    def finite_blocks(self):
        """(r, b) in order, for layouts without infinite repetition."""
        for r in (-1, 0, 1):
            if self.has_repetition(r):
                for b in range(len(self.types_at(r))):
                    yield r, b

    def render(self) -> str:
        def names(ts):
            return "[" + ", ".join(t.key() for t in ts) + "]"

        if self.court:
            return f"interval {self.s}: court {self.court} {names(self.middle)}"
        return (
            f"interval {self.s}: J- {names(self.minus)} x {self.kinds[0]}; "
            f"J {names(self.middle)}; J+ {names(self.plus)} x {self.kinds[2]}"
        )


class IntervalModelDescription:
    """A lazily evaluated ordered model built from a certificate (gamma, B)."""

    def __init__(self, B: FiniteStructure, gamma: AdmissibilityTuple, nf: NormalFormSentence, K: str):
        if K not in KINDS:
            raise ValueError(f"unknown class {K}")
        report = check_admissibility(gamma, K)
        if not report.admissible:
            raise ReconstructionError(f"tuple is not admissible for {K}: conditions {report.failed()}")
        self.B, self.gamma, self.nf, self.K = B, gamma, nf, K
        sigma = self.sigma = nf.vocab
        self.base = B.reduct(sigma.names)
        self.btypes = types_of(self.base, sigma)
        self.m_ex = nf.m_exists
        self.n = nf.width
        self.part_size = self.m_ex + self.n
        self.block_size = 3 * self.part_size
        self.m = nf.m
        self.r = max(sigma.max_arity, 1)
        N = gamma.N
        self.members = {s: tuple(x for x in B.domain if (x,) in B.relations[u_sym(s)]) for s in range(1, N + 1)}
        self.interval_of_b = {x: s for s, xs in self.members.items() for x in xs}
        court_set = set(gamma.delta)
        layouts = []
        for s in range(1, N + 1):
            fam = gamma.family[s - 1]
            middle = tuple(sorted_types(fam))
            if s in court_set:
                kind = "king" if fam & gamma.royal else "pawn"
                layouts.append(BlockLayout(s, (), middle, (), ("finite",) * 3, self.block_size, kind))
            else:
                layouts.append(
                    BlockLayout(
                        s,
                        tuple(sorted_types(gamma.minus(s))),
                        middle,
                        tuple(sorted_types(gamma.plus(s))),
                        KINDS[K],
                        self.block_size,
                        "",
                    )
                )
        self.layouts = tuple(layouts)
        # court: h maps the element of U_delta(c) to the single or first element of I_delta(c)
        self.h = {}
        for s in sorted(court_set):
            (b,) = self.members[s]
            self.h[b] = (s, 0, 0, 0)
        self.h_inv = {a: b for b, a in self.h.items()}
        self.K_B = frozenset(x for (x,) in B.relations[K_SYM])
        self.D_B = frozenset(x for (x,) in B.relations[D_SYM])
        self.KD_A = frozenset(self.h[b] for b in self.K_B | self.D_B)
        self._matrices = []
        for e in nf.existentials:
            fn = compile_formula(self.base, e.matrix, e.vars)
            live = live_variables(e.matrix, e.vars)
            self._matrices.append((fn, e.k, tuple(j for j, v in enumerate(e.vars) if v in live)))
        self._bwit: dict = {}
        self._plans: dict = {}
        self._first_interval = {}
        for s in range(1, N + 1):
            if self.layouts[s - 1].court == "king":
                continue
            for t in gamma.family[s - 1]:
                self._first_interval.setdefault(t, s)
        self._atoms = {k: table_atoms(sigma, k) for k in range(1, self.r + 1)}

    # -- addresses ---------------------------------------------------------

    def layout(self, s: int) -> BlockLayout:
        return self.layouts[s - 1]

    def valid(self, a: Address) -> bool:
        if not (isinstance(a, tuple) and len(a) == 4 and all(isinstance(v, int) for v in a)):
            return False
        s, r, b, p = a
        if not (1 <= s <= self.gamma.N):
            return False
        lay = self.layout(s)
        if not lay.has_repetition(r) or (lay.court and r != 0):
            return False
        return 0 <= b < len(lay.types_at(r)) and 0 <= p < lay.size_of_block()

    def check(self, a: Address) -> Address:
        if not self.valid(a):
            raise ReconstructionError(f"invalid address {a}")
        return a

    def label(self, a: Address) -> OneType:
        s, r, b, _ = a
        return self.layout(s).types_at(r)[b]

    @staticmethod
    def compare(a: Address, b: Address) -> int:
        return (a > b) - (a < b)

    def part(self, a: Address) -> str:
        if a in self.h_inv:
            return "C"
        return "EFG"[a[3] // self.part_size]

    def finite_addresses(self) -> list:
        if self.K != "Ofin":
            raise ReconstructionError("only finite layouts can be listed")
        out = []
        for lay in self.layouts:
            for r, b in lay.finite_blocks():
                out.extend((lay.s, r, b, p) for p in range(lay.size_of_block()))
        return out

    def render(self) -> str:
        lines = [f"class: {self.K}", f"block size: {self.block_size}", f"intervals: {self.gamma.N}"]
        lines += [lay.render() for lay in self.layouts]
        lines.append("court: " + " ".join(f"{b}->{':'.join(map(str, a))}" for b, a in sorted(self.h.items())))
        return "\n".join(lines) + "\n"

    # -- block navigation --------------------------------------------------

    def j_block(self, s: int, t: OneType) -> tuple:
        lay = self.layout(s)
        return (s, 0, lay.middle.index(t))

    def home_block(self, t: OneType) -> tuple:
        """A fixed block of type t: the J block of the first interval holding t."""
        return self.j_block(self._first_interval[t], t)

    def _reps_before(self, lay: BlockLayout, r: int):
        # each J- copy is identical, so one copy is enough to search
        q = r - 1
        while lay.has_repetition(q) or q == 0:
            yield q
            if q < 0:
                return
            q -= 1

    def _reps_after(self, lay: BlockLayout, r: int):
        q = r + 1
        while lay.has_repetition(q) or q == 0:
            yield q
            if q > 0:
                return
            q += 1

    def nearest_before(self, a: Address, t: OneType):
        s, r, b, _ = a
        lay = self.layout(s)
        for bb in range(b - 1, -1, -1):
            if lay.types_at(r)[bb] == t:
                return (s, r, bb)
        for q in self._reps_before(lay, r):
            ts = lay.types_at(q)
            for bb in range(len(ts) - 1, -1, -1):
                if ts[bb] == t:
                    return (s, q, bb)
        return None

    def nearest_after(self, a: Address, t: OneType):
        s, r, b, _ = a
        lay = self.layout(s)
        for bb in range(b + 1, len(lay.types_at(r))):
            if lay.types_at(r)[bb] == t:
                return (s, r, bb)
        for q in self._reps_after(lay, r):
            for bb, tt in enumerate(lay.types_at(q)):
                if tt == t:
                    return (s, q, bb)
        return None

    def last_block(self, s: int) -> tuple:
        lay = self.layout(s)
        if lay.plus:
            return (s, 1, len(lay.plus) - 1)
        return (s, 0, len(lay.middle) - 1)

    def in_last_block(self, a: Address) -> bool:
        return self.K == "Ofin" and a[:3] == self.last_block(a[0])

    # -- pattern elements and witnesses in B ---------------------------------

    def _first_of_type(self, s: int, t: OneType, sym: str | None = None) -> int:
        for x in self.members[s]:
            if self.btypes[x] == t and (sym is None or (x,) in self.B.relations[sym]):
                return x
        raise ReconstructionError(f"no element of type {t!r} in U_{s}" + (f" with {sym}" if sym else ""))

    def pattern(self, a: Address) -> int:
        if a in self.h_inv:
            return self.h_inv[a]
        s = a[0]
        t = self.label(a)
        minus, plus = self.gamma.minus(s), self.gamma.plus(s)
        if self.K == "WO" and t in minus:
            return self._first_of_type(s, t, BOT_SYM)
        if self.K == "Ofin":
            lo, hi = t in minus, t in plus
            if lo and hi:
                return self._first_of_type(s, t, TOP_SYM if self.in_last_block(a) else BOT_SYM)
            if lo:
                return self._first_of_type(s, t, BOT_SYM)
            if hi:
                return self._first_of_type(s, t, TOP_SYM)
        return self._first_of_type(s, t)

    def _live_values(self, i: int, full: tuple) -> frozenset:
        return frozenset(full[j] for j in self._matrices[i][2])

    def b_witness(self, b: int, i: int, inside=None) -> tuple:
        """Least (b, y1..yk) in B satisfying conjunct i's matrix; with ``inside``,
        all of y1..yk must lie in that set."""
        key = (b, i, inside is not None)
        if key not in self._bwit:
            fn, k, _ = self._matrices[i]
            pool = sorted(inside) if inside is not None else list(self.B.domain)
            found = next((ys for ys in itertools.product(pool, repeat=k) if fn(b, *ys)), None)
            if found is None:
                raise ReconstructionError(f"B has no witness for element {b} and conjunct {i + 1}")
            self._bwit[key] = (b,) + found
        return self._bwit[key]

    def d_witness(self, t: OneType, i: int) -> tuple:
        key = ("D", t, i)
        if key not in self._bwit:
            fn, k, live = self._matrices[i]
            for x in self.B.domain:
                if self.btypes[x] != t:
                    continue
                for ys in itertools.product(self.B.domain, repeat=k):
                    full = (x,) + ys
                    lv = {full[j] for j in live}
                    if x not in lv and lv <= self.D_B and fn(x, *ys):
                        self._bwit[key] = full
                        break
                if key in self._bwit:
                    break
            else:
                raise ReconstructionError(f"no free witness with live part in D for {t!r}, conjunct {i + 1}")
        return self._bwit[key]

    # -- witness plans -----------------------------------------------------

    def is_definer(self, a: Address) -> bool:
        return a not in self.KD_A

    def _slot(self, block: tuple, part: str, inner: int) -> Address:
        offset = {"E": 0, "F": 1, "G": 2}[part] * self.part_size
        return block + (offset + inner,)

    def plan(self, a: Address) -> tuple:
        """Per existential conjunct: (A witness tuple, live definition or None). A live
        definition (A tuple, B tuple) fixes the table of the A tuple's elements."""
        if a in self._plans:
            return self._plans[a]
        self.check(a)
        out = []
        if not self.is_definer(a):
            b = self.h_inv[a]
            court = frozenset(self.h)
            for i in range(self.m_ex):
                full = self.b_witness(b, i, inside=court)
                out.append((tuple(self.h[x] for x in full), None))
            self._plans[a] = tuple(out)
            return self._plans[a]
        b = self.pattern(a)
        alpha = self.label(a)
        if self.btypes[b] != alpha:
            raise ReconstructionError("pattern element has the wrong type")
        target = {"E": "F", "F": "G", "G": "E", "C": "E"}[self.part(a)]
        for i in range(self.m_ex):
            full = self.b_witness(b, i)
            lv = self._live_values(i, full)
            phi = {}
            definition = None
            slot = 1 + i
            if not lv:
                phi[b] = a
            elif b not in lv:
                if (alpha, i) not in self.gamma.F:
                    raise ReconstructionError("free witness for a pair outside F")
                full = self.d_witness(alpha, i)
                phi[full[0]] = a
                for d in self._live_values(i, full):
                    phi[d] = self.h[d]
            elif len(lv) == 1:
                phi[b] = a
            elif len(lv) == 2:
                (other,) = lv - {b}
                phi[b] = a
                phi[other] = self._doubleton_partner(a, b, other, target, slot)
                definition = ((a, phi[other]), (b, other))
            else:
                phi[b] = a
                rs = sorted(x for x in lv if x in self.K_B and x != b)
                rest = sorted(x for x in lv if x not in self.K_B and x != b)
                for x in rs:
                    phi[x] = self.h[x]
                for j, x in enumerate(rest):
                    block = self.home_block(self.btypes[x])
                    phi[x] = self._slot(block, target, slot if j == 0 else self.m_ex + j)
                live_b = (b,) + tuple(rs) + tuple(rest)
                definition = (tuple(phi[x] for x in live_b), live_b)
            self._complete_dead(full, phi)
            out.append((tuple(phi[x] for x in full), definition))
        self._plans[a] = tuple(out)
        return self._plans[a]

    def _doubleton_partner(self, a, b, other, target, slot) -> Address:
        s = a[0]
        t_other = self.interval_of_b[other]
        alpha2 = self.btypes[other]
        if t_other != s:
            # Only kings, D elements and pairs inside the court are pinned to h. Other
            # court pawns have non-royal types, so a fresh element of their block will
            # do, and a court pawn never ends up with two competing tables.
            if other in self.h and (other in self.K_B or other in self.D_B or a in self.h_inv):
                return self.h[other]
            block = self.j_block(t_other, alpha2)
        elif (other, b) in self.B.relations[ORDER]:
            if alpha2 not in self.gamma.minus(s):
                t = max(t for t in range(1, s) if alpha2 in self.gamma.family[t - 1])
                block = self.j_block(t, alpha2)
            else:
                block = self.nearest_before(a, alpha2)
                if block is None:
                    raise ReconstructionError("no earlier block for a witness below the pattern element")
        else:
            if alpha2 not in self.gamma.plus(s):
                t = min(t for t in range(s + 1, self.gamma.N + 1) if alpha2 in self.gamma.family[t - 1])
                block = self.j_block(t, alpha2)
            elif self.K == "Ofin":
                block = self.last_block(s)
                if self.layout(s).types_at(block[1])[block[2]] != alpha2 or block <= a[:3]:
                    raise ReconstructionError("last block does not follow with the needed type")
            else:
                block = self.nearest_after(a, alpha2)
                if block is None:
                    raise ReconstructionError("no later block for a witness above the pattern element")
        return self._slot(block, target, slot)

    def _complete_dead(self, full: tuple, phi: dict) -> None:
        used = set(phi.values())
        for x in full:
            if x in phi:
                continue
            t = self.btypes[x]
            if t in self.gamma.royal:
                cand = self.h.get(x)
                if cand is None or cand in used:
                    raise ReconstructionError("royal element outside the court")
            else:
                block = self.home_block(t)
                size = self.layout(block[0]).size_of_block()
                cand = next((block + (p,) for p in range(size) if block + (p,) not in used), None)
                if cand is None:
                    raise ReconstructionError("block too small for a dead part")
            phi[x] = cand
            used.add(cand)

    def witness(self, a: Address, i: int) -> tuple:
        """Addresses (a, y1..yk) of the designated witness for conjunct i."""
        return self.plan(a)[i][0]

    # -- tables ------------------------------------------------------------

    def definitions_of(self, a: Address) -> list:
        if not self.is_definer(a):
            return []
        return [d for _, d in self.plan(a) if d is not None]

    def definition(self, S) -> tuple | None:
        """(A tuple, B tuple) fixing the table of the set S, or None when S gets the
        all-negative table."""
        S = frozenset(S)
        k = len(S)
        if k < 2:
            raise ValueError("tables need at least two elements")
        if S <= self.h_inv.keys():
            if k > self.r:
                return None
            elems = tuple(sorted(S))
            return elems, tuple(self.h_inv[x] for x in elems)
        if k > self.m:
            return None
        found = None
        for a in sorted(S):
            for d in self.definitions_of(a):
                if frozenset(d[0]) == S:
                    if found is None:
                        found = d
                    elif self._bits(found) != self._bits(d):
                        raise ReconstructionError(f"two different tables requested for {sorted(S)}")
        if found is not None:
            return found
        return self._completion(S)

    def _bits(self, d) -> frozenset:
        ā, b̄ = d
        pos = {x: j for j, x in enumerate(ā)}
        order = sorted(ā)
        out = set()
        for name, pattern in self._atoms[len(ā)]:
            if tuple(b̄[pos[order[p]]] for p in pattern) in self.base.relations[name]:
                out.add((name, pattern))
        return frozenset(out)

    def _completion(self, S) -> tuple:
        elems = tuple(sorted(S))
        types = [self.label(x) for x in elems]
        if len(elems) == 2:
            a1, a2 = elems
            s, t = a1[0], a2[0]
            al1, al2 = types
            lt = self.B.relations[ORDER]
            if s < t:
                pair = (self._first_of_type(s, al1), self._first_of_type(t, al2))
            elif al2 not in self.gamma.plus(s):
                later = min(q for q in range(s + 1, self.gamma.N + 1) if al2 in self.gamma.family[q - 1])
                pair = (self._first_of_type(s, al1), self._first_of_type(later, al2))
            elif s not in self.gamma.image():
                pair = next(
                    (
                        (x, y)
                        for x in self.members[s]
                        for y in self.members[s]
                        if self.btypes[x] == al1 and self.btypes[y] == al2 and (x, y) in lt
                    ),
                    None,
                )
                if pair is None:
                    raise ReconstructionError(f"no ordered pair of the needed types in U_{s}")
            else:
                raise ReconstructionError("two ordered elements inside a court interval")
            return elems, pair
        used, chosen = set(), []
        for t in types:
            x = next((x for x in self.B.domain if self.btypes[x] == t and x not in used), None)
            if x is None:
                raise ReconstructionError("not enough elements of a type in B")
            used.add(x)
            chosen.append(x)
        return elems, tuple(chosen)

    # -- structures --------------------------------------------------------

    def sample(self, addresses) -> FiniteStructure:
        """The substructure induced on ``addresses`` (element j is addresses[j])."""
        addresses = [self.check(tuple(a)) for a in addresses]
        if len(set(addresses)) != len(addresses):
            raise ReconstructionError("sampled addresses must be distinct")
        index = {a: j for j, a in enumerate(addresses)}
        rels = {name: set() for name in self.sigma.names}
        for j, a in enumerate(addresses):
            for name in self.label(a).positive:
                rels[name].add((j,) * self.sigma.arity(name))
        top = min(len(addresses), self.r)
        for k in range(2, top + 1):
            for combo in itertools.combinations(addresses, k):
                d = self.definition(combo)
                if d is None:
                    continue
                ā, b̄ = d
                to_b = dict(zip(ā, b̄))
                order = sorted(combo)
                for name, pattern in self._atoms[k]:
                    if tuple(to_b[order[p]] for p in pattern) in self.base.relations[name]:
                        rels[name].add(tuple(index[order[p]] for p in pattern))
        return FiniteStructure(self.sigma, len(addresses), rels)


# --------------------------------------------------------------------------


def reconstruct_symbolic(B: FiniteStructure, gamma: AdmissibilityTuple, nf: NormalFormSentence, K: str = "O") -> IntervalModelDescription:
    if K not in ("O", "WO"):
        raise ValueError("symbolic reconstruction is for the classes O and WO")
    return IntervalModelDescription(B, gamma, nf, K)


def symbolic_sample(desc: IntervalModelDescription, addresses) -> FiniteStructure:
    return desc.sample(addresses)


def reconstruct_finite(B: FiniteStructure, gamma: AdmissibilityTuple, nf: NormalFormSentence, check: bool = True):
    """A finite ordered model of nf; elements are numbered in the order of their
    addresses, so < is 0 < 1 < ... . Returns (structure, description)."""
    desc = IntervalModelDescription(B, gamma, nf, "Ofin")
    addresses = desc.finite_addresses()
    A = desc.sample(addresses)
    if check:
        if A.relations[ORDER] != canonical_order(A.size):
            raise ReconstructionError("rebuilt order disagrees with the address order")
        if not model_check(A, nf.formula()):
            raise ReconstructionError("rebuilt structure is not a model")
    return A, desc


def parse_address(text: str) -> Address:
    parts = text.strip().split(":")
    if len(parts) != 4:
        raise ValueError(f"address {text!r} is not of the form i:r:b:p")
    try:
        return tuple(int(p) for p in parts)
    except ValueError as e:
        raise ValueError(f"address {text!r} has a non-integer part") from e


def format_address(a: Address) -> str:
    return ":".join(map(str, a))



def witness_holds(desc: IntervalModelDescription, a: Address, i: int) -> bool:
    """Model-check conjunct i's matrix on the designated witness of a."""
    full = desc.witness(a, i)
    elems = sorted(set(full))
    S = desc.sample(elems)
    pos = {x: j for j, x in enumerate(elems)}
    conj = desc.nf.existentials[i]
    return model_check(S, conj.matrix, {v: pos[x] for v, x in zip(conj.vars, full)})


def universals_hold(desc: IntervalModelDescription, addresses) -> bool:
    S = desc.sample(addresses)
    return all(model_check(S, u.formula()) for u in desc.nf.universals)


def random_address(desc: IntervalModelDescription, rng, spread: int = 4) -> Address:
    """A uniformly drawn interval, then a repetition within ``spread`` of J, then a
    block and a position."""
    while True:
        s = rng.randint(1, desc.gamma.N)
        lay = desc.layout(s)
        r = 0 if lay.court else rng.randint(-spread, spread)
        if not lay.has_repetition(r):
            continue
        return (s, r, rng.randrange(len(lay.types_at(r))), rng.randrange(lay.size_of_block()))
