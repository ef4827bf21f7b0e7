"""Domino systems encoded with two linear orders <1 and <2.

H and V are pinned down as the successor relations induced by <1 (row by row) and
<2 (column by column); a 4-ary N ties each point to a unit square. The orders are
exempt from uniformity, which is what makes the encoding go through.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .formula import (
    Atom,
    Eq,
    Formula,
    Implies,
    Not,
    Vocabulary,
    conj,
    disj,
    exists,
    forall,
    parse_formula,
    render_formula,
)
from .structures import FiniteStructure, model_check

ORDERS = ("<1", "<2")
_TILE = re.compile(r"[A-Za-z0-9_]+")


class DominoFormatError(ValueError):
    pass


@dataclass(frozen=True)
class DominoSystem:
    tiles: tuple[str, ...]
    H: frozenset = frozenset()
    V: frozenset = frozenset()

    def __post_init__(self):
        if not self.tiles:
            raise DominoFormatError("a domino system needs at least one tile")
        if len(set(self.tiles)) != len(self.tiles):
            raise DominoFormatError("duplicate tile names")
        for t in self.tiles:
            if not _TILE.fullmatch(t):
                raise DominoFormatError(f"bad tile name {t!r}")
        known = set(self.tiles)
        for name in ("H", "V"):
            for pair in getattr(self, name):
                if not set(pair) <= known:
                    raise DominoFormatError(f"{name} mentions an unknown tile in {pair}")

    @staticmethod
    def predicate(tile: str) -> str:
        return f"P_{tile}"

    def render(self) -> str:
        def pairs(rel):
            return " ".join(f"({a},{b})" for a, b in sorted(rel))

        return f"tiles: {' '.join(self.tiles)}\nH: {pairs(self.H)}\nV: {pairs(self.V)}\n"

    @classmethod
    def parse(cls, text: str) -> "DominoSystem":
        fields = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, rest = line.partition(":")
            key = key.strip()
            if not sep or key not in ("tiles", "H", "V"):
                raise DominoFormatError(f"unexpected line {raw!r}")
            if key in fields:
                raise DominoFormatError(f"{key} given twice")
            fields[key] = rest.strip()
        if "tiles" not in fields:
            raise DominoFormatError("missing tiles line")
        tiles = tuple(fields["tiles"].split())

        def pairs(body: str) -> frozenset:
            out = set()
            rest = re.sub(r"\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)", lambda m: out.add((m[1], m[2])) or "", body)
            if rest.strip():
                raise DominoFormatError(f"cannot read pairs {body!r}")
            return frozenset(out)

        return cls(tiles, pairs(fields.get("H", "")), pairs(fields.get("V", "")))


def vocabulary(D: DominoSystem) -> Vocabulary:
    arities = {"H": 2, "V": 2, "N": 4, "<1": 2, "<2": 2}
    arities.update({D.predicate(t): 1 for t in D.tiles})
    return Vocabulary.of(arities)


def leq(x: str, y: str, order: str) -> Formula:
    return disj([Eq(x, y), Atom(order, (x, y))])


def sigma(i: int, x: str, y: str, z: str) -> Formula:
    """x <i y with z not strictly between them."""
    o = ORDERS[i - 1]
    return conj([Atom(o, (x, y)), disj([leq(z, x, o), leq(y, z, o)])])


def beta(i: int, x: str, y: str, z: str = "z") -> Formula:
    """y is the immediate <i successor of x."""
    return forall(z, sigma(i, x, y, z))


def eta_parts() -> dict[str, Formula]:
    return {
        "G": forall("x", conj([exists("y", Atom("H", ("x", "y"))), exists("y", Atom("V", ("x", "y")))])),
        "H": forall(("x", "y", "z"), Implies(Atom("H", ("x", "y")), sigma(1, "x", "y", "z"))),
        "V": forall(("x", "y", "z"), Implies(Atom("V", ("x", "y")), sigma(2, "x", "y", "z"))),
        "N_exists": forall("x", exists(("y", "z", "t"), Atom("N", ("x", "y", "z", "t")))),
        "N_forall": forall(
            ("x", "y", "z", "t", "u"),
            Implies(
                Atom("N", ("x", "y", "z", "t")),
                conj([sigma(1, "x", "y", "u"), sigma(2, "x", "t", "u"), sigma(2, "y", "z", "u"), sigma(1, "t", "z", "u")]),
            ),
        ),
    }


UNIVERSAL_ETA = ("H", "V", "N_forall")


def tiling_formula(D: DominoSystem) -> Formula:
    """Each point carries exactly one tile and H/V neighbours respect the system."""
    P = D.predicate
    one = conj(
        [disj([Atom(P(d), ("x",)) for d in D.tiles])]
        + [Not(conj([Atom(P(d), ("x",)), Atom(P(e), ("x",))])) for d, e in itertools.combinations(D.tiles, 2)]
    )

    def adjacency(rel: str, allowed) -> Formula:
        options = [conj([Atom(P(d), ("x",)), Atom(P(e), ("y",))]) for d, e in sorted(allowed)]
        return forall(("x", "y"), Implies(Atom(rel, ("x", "y")), disj(options, var="x")))

    return conj([forall("x", one), adjacency("H", D.H), adjacency("V", D.V)])


def domino_to_formula(D: DominoSystem) -> Formula:
    return conj(list(eta_parts().values()) + [tiling_formula(D)])


def render_reduction(D: DominoSystem) -> str:
    return render_formula(domino_to_formula(D)) + "\n"


@dataclass(frozen=True)
class GridFragment:
    """The k x k corner of the expanded grid; element j*k + i is the point (i, j)."""

    k: int
    structure: FiniteStructure
    interior: frozenset = field(default_factory=frozenset)

    def point(self, e: int) -> tuple[int, int]:
        return e % self.k, e // self.k

    def element(self, i: int, j: int) -> int:
        return j * self.k + i


def build_grid_fragment(k: int, labeling=None, D: DominoSystem | None = None) -> GridFragment:
    """``labeling`` maps (i, j) to a tile; with it the tile predicates are added."""
    if k < 2:
        raise ValueError("fragments need k >= 2")
    pts = [(i, j) for j in range(k) for i in range(k)]
    idx = {p: n for n, p in enumerate(pts)}
    H = {(idx[i, j], idx[i + 1, j]) for i, j in pts if i + 1 < k}
    V = {(idx[i, j], idx[i, j + 1]) for i, j in pts if j + 1 < k}
    N = {
        (idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1])
        for i, j in pts
        if i + 1 < k and j + 1 < k
    }
    lt1 = {(idx[p], idx[q]) for p in pts for q in pts if (p[1], p[0]) < (q[1], q[0])}
    lt2 = {(idx[p], idx[q]) for p in pts for q in pts if p < q}
    rels = {"H": H, "V": V, "N": N, "<1": lt1, "<2": lt2}
    if labeling is None:
        vocab = Vocabulary.of({"H": 2, "V": 2, "N": 4, "<1": 2, "<2": 2})
    else:
        missing = [p for p in pts if p not in labeling]
        if missing:
            raise ValueError(f"labeling misses {len(missing)} points, e.g. {missing[0]}")
        tiles = D.tiles if D is not None else tuple(sorted(set(labeling[p] for p in pts)))
        D = D or DominoSystem(tiles)
        vocab = vocabulary(D)
        for t in D.tiles:
            rels[D.predicate(t)] = {(idx[p],) for p in pts if labeling[p] == t}
        unknown = {labeling[p] for p in pts} - set(D.tiles)
        if unknown:
            raise ValueError(f"labeling uses unknown tiles {sorted(unknown)}")
    interior = frozenset(idx[i, j] for i, j in pts if i + 1 < k and j + 1 < k)
    return GridFragment(k, FiniteStructure(vocab, k * k, rels), interior)


def direct_tiling_check(D: DominoSystem, k: int, labeling) -> bool:
    for j in range(k):
        for i in range(k):
            if i + 1 < k and (labeling[i, j], labeling[i + 1, j]) not in D.H:
                return False
            if j + 1 < k and (labeling[i, j], labeling[i, j + 1]) not in D.V:
                return False
    return True


def check_tiling(D: DominoSystem, k: int, labeling) -> tuple[bool, bool]:
    """(adjacency check, model check of the tiling sentence on the fragment)."""
    direct = direct_tiling_check(D, k, labeling)
    grid = build_grid_fragment(k, labeling, D)
    return direct, model_check(grid.structure, tiling_formula(D))


def successor_claim() -> Formula:
    """Immediate successors along <1 are unique."""
    return forall(
        ("x", "y", "w"),
        Implies(conj([beta(1, "x", "y"), beta(1, "x", "w")]), Eq("y", "w")),
    )


def existential_at(grid: GridFragment, name: str, e: int) -> bool:
    """The matrix of the existential eta part ``name`` at element e."""
    body = eta_parts()[name].body
    return model_check(grid.structure, body, {"x": e})


def parse_tiling(text: str) -> Formula:
    """Read back an emitted reduction."""
    return parse_formula(text)
