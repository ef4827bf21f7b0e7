import random

import pytest

from conftest import random_models
from uone.axioms import (
    BOT_SYM,
    TOP_SYM,
    compact_min_max_axioms,
    generate_pseudo_ordering_axioms,
    u_sym,
)
from uone.constructions import canonical_admissibility_tuple, expand_with_axiom_predicates
from uone.formula import FragmentProfile, Quant, check_fragment, parse_formula, subformulas
from uone.normal_form import to_normal_form, validate_normal_form
from uone.structures import FiniteStructure, canonical_order, model_check

SENTENCES = [
    "forall x. exists y. P(y) & x != y",
    "forall x. exists y. (P(x) -> ~P(y)) & (Q(y) | P(y))",
    "forall x. exists y1 y2. R(x,y1) & Q(y2)",
    "forall x. exists y. R(x,y) & x != y & (P(x) <-> ~P(y))",
    "forall x. exists y. (x < y -> R(y,x)) & P(y)",
    "exists x y z. ~T(x,y,z) & P(x)",
]


def nf_of(text):
    return to_normal_form(parse_formula(text))


@pytest.fixture(scope="module")
def cases():
    out = []
    for seed, text in enumerate(SENTENCES):
        nf = nf_of(text)
        for A in random_models(nf, 6, 100 + seed, max_size=5):
            d = canonical_admissibility_tuple(A, nf)
            B = expand_with_axiom_predicates(d.extension, d.gamma, nf, d.court, d.family, d.meta)
            out.append((nf, d.gamma, B))
    return out


def test_tournament_conjuncts_verbatim(cases):
    nf, g, _ = cases[0]
    ax = generate_pseudo_ordering_axioms(g, nf)
    assert ax.conjuncts_of(12) == [
        parse_formula("forall x1 x2. x1 < x2 | x2 < x1 | x1 = x2"),
        parse_formula("forall x1 x2. ~(x1 < x2 & x2 < x1)"),
    ]


def test_empty_F_leaves_only_the_negative_half():
    nf = nf_of("forall x. exists y. R(x,y) & R(y,x)")
    A = FiniteStructure(nf.vocab, 2, {"<": canonical_order(2), "R": {(0, 0), (1, 1)}})
    g = canonical_admissibility_tuple(A, nf).gamma
    assert g.F == frozenset()
    ax = generate_pseudo_ordering_axioms(g, nf)
    parts = ax.conjuncts_of(8)
    assert parts and all(p.kind == "forall" and not _has_exists(p) for p in parts)


def _has_exists(f):
    return any(isinstance(g, Quant) and g.kind == "exists" for g in subformulas(f))


def test_expansions_satisfy_the_axioms(cases):
    for nf, g, B in cases:
        ax = generate_pseudo_ordering_axioms(g, nf)
        assert ax.failing_axioms(B) == []
        assert model_check(B, ax.sentence.formula())


def test_output_shape(cases):
    for nf, g, _ in cases:
        ax = generate_pseudo_ordering_axioms(g, nf)
        again = validate_normal_form(ax.sentence.formula())
        assert again.width == ax.sentence.width
        assert check_fragment(ax.sentence.formula(), FragmentProfile()).accepted
        assert len(ax.vocab) == len(nf.vocab) + g.N + 4
        fresh = set(ax.vocab.names) - set(nf.vocab.names)
        assert all(ax.vocab.arity(n) == 1 for n in fresh)
        assert ax.sentence.width >= nf.width
        assert len(ax.sentence.existentials) == len(ax.ex_axiom)
        assert set(ax.ex_axiom) | set(ax.un_axiom) <= set(range(1, 17))


def test_render_lists_every_axiom(cases):
    nf, g, _ = cases[0]
    text = generate_pseudo_ordering_axioms(g, nf).render()
    assert all(f"# axiom {i}:" in text for i in range(1, 17))


def test_vocabulary_mismatch(cases):
    _, g, _ = cases[0]
    with pytest.raises(ValueError):
        generate_pseudo_ordering_axioms(g, nf_of("forall x. exists y. S(x,y)"))


def test_axiom3_reading_is_validated(cases):
    nf, g, _ = cases[0]
    with pytest.raises(ValueError):
        generate_pseudo_ordering_axioms(g, nf, axiom3="loose")


def test_dropping_tournament_is_visible(cases):
    """A symmetric < pair breaks axiom 12 alone for some crafted pair."""
    flips = 0
    for nf, g, B in cases:
        ax = generate_pseudo_ordering_axioms(g, nf)
        lt = B.relations["<"]
        for a, b in sorted(lt):
            rels = {**B.relations, "<": lt | {(b, a)}}
            bad = ax.failing_axioms(FiniteStructure(B.vocab, B.size, rels))
            if bad == [12]:
                flips += 1
                break
    assert flips > 0


def test_compact_readings_follow_from_the_printed_axioms(cases):
    rnd = random.Random(7)
    checked = 0
    for nf, g, B in cases:
        ax = generate_pseudo_ordering_axioms(g, nf)
        compact = compact_min_max_axioms(g, nf)
        assert all(model_check(B, f) for f in compact)
        for _ in range(5):
            # shuffle the first/last marks and the interval labels a little
            rels = dict(B.relations)
            for sym in (BOT_SYM, TOP_SYM, u_sym(rnd.randint(1, g.N))):
                if rnd.random() < 0.5:
                    rels[sym] = {(a,) for a in B.domain if rnd.random() < 0.3}
            C = FiniteStructure(B.vocab, B.size, rels)
            if not {13, 14} & set(ax.failing_axioms(C)):
                checked += 1
                assert all(model_check(C, f) for f in compact)
    assert checked > 0


def test_biconditional_reading_also_generated(cases):
    nf, g, _ = cases[0]
    exact = generate_pseudo_ordering_axioms(g, nf)
    loose = generate_pseudo_ordering_axioms(g, nf, axiom3="biconditional")
    assert exact.conjuncts_of(3) != loose.conjuncts_of(3)
    assert exact.conjuncts_of(12) == loose.conjuncts_of(12)
