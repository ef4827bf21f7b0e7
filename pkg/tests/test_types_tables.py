import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_ordered_structure
from uone.formula import Implies, Vocabulary, conj, forall, lt, neq, parse_formula
from uone.normal_form import validate_normal_form
from uone.structures import FiniteStructure, StructureError, model_check
from uone.types_tables import (
    OneType,
    TypeBudgetExceeded,
    classify_royalty,
    enumerate_one_types,
    enumerate_tables,
    extremal_realization,
    parse_one_type,
    table_of,
    type_of,
    types_of,
)

EX1 = Vocabulary.of({"R": 3, "<": 2, "P": 1})


def random_structure(vocab, size, rnd, density=None):
    rels = {}
    for name in vocab.names:
        p = density if density is not None else rnd.random()
        rels[name] = {t for t in itertools.product(range(size), repeat=vocab.arity(name)) if rnd.random() < p}
    return FiniteStructure(vocab, size, rels)


class TestOneTypes:
    def test_count_with_unary_and_order(self):
        assert len(list(enumerate_one_types(Vocabulary.of({"P": 1, "<": 2})))) == 4

    def test_empty_vocabulary(self):
        types = list(enumerate_one_types(Vocabulary.of({})))
        assert len(types) == 1 and types[0].positive == frozenset()

    def test_example_type_present(self):
        wanted = OneType.from_positive(EX1.names, ["P"])
        assert wanted in set(enumerate_one_types(EX1))
        assert parse_one_type("~R(v1,v1,v1) & P(v1) & ~(v1 < v1) & v1 = v1", EX1) == wanted

    def test_budget(self):
        big = Vocabulary.of({f"P{i}": 1 for i in range(20)})
        with pytest.raises(TypeBudgetExceeded):
            list(enumerate_one_types(big, budget=1 << 10))

    def test_singleton_empty_structure(self):
        A = FiniteStructure(EX1, 1, {})
        assert type_of(A, 0).positive == frozenset()

    def test_reflexive_loop(self):
        A = FiniteStructure(EX1, 2, {"<": {(1, 1)}})
        assert "<" in type_of(A, 1).positive and "<" not in type_of(A, 0).positive

    def test_out_of_range(self):
        with pytest.raises(StructureError):
            type_of(FiniteStructure(EX1, 2, {}), 2)

    def test_each_element_realizes_one_enumerated_type(self):
        rnd = random.Random(5)
        universe = list(enumerate_one_types(EX1))
        for _ in range(50):
            A = random_structure(EX1, rnd.randint(1, 4), rnd)
            for a in A.domain:
                matches = [t for t in universe if model_check(A, t.formula("x", EX1), {"x": a})]
                assert matches == [type_of(A, a)]


class TestTables:
    def test_example_two_table(self):
        A = FiniteStructure(EX1, 2, {"R": {(0, 0, 1), (0, 1, 0), (1, 1, 0), (0, 1, 1)}, "<": {(0, 1)}})
        tb = table_of(A, (0, 1))
        assert tb.positive == {
            ("R", (0, 0, 1)),
            ("R", (0, 1, 0)),
            ("R", (1, 1, 0)),
            ("R", (0, 1, 1)),
            ("<", (0, 1)),
        }
        assert len(tb.bits) == 8
        assert "=" not in tb.render()

    def test_all_negative(self):
        A = FiniteStructure(EX1, 3, {})
        assert not any(table_of(A, (2, 0, 1)).bits)

    def test_repeated_elements_rejected(self):
        with pytest.raises(ValueError):
            table_of(FiniteStructure(EX1, 3, {}), (1, 1))

    def test_swap_covariance(self):
        rnd = random.Random(9)
        for _ in range(100):
            A = random_structure(EX1, 3, rnd)
            a, b = rnd.sample(range(3), 2)
            assert table_of(A, (a, b)).permuted((1, 0)) == table_of(A, (b, a))

    def test_each_pair_realizes_one_table(self):
        rnd = random.Random(2)
        vocab = Vocabulary.of({"R": 2, "<": 2})
        tables = list(enumerate_tables(vocab, 2))
        assert len(tables) == 16
        A = random_structure(vocab, 4, rnd)
        for a, b in itertools.permutations(range(4), 2):
            hits = [t for t in tables if model_check(A, t.formula(("x", "y")), {"x": a, "y": b})]
            assert hits == [table_of(A, (a, b))]


def brute_extremal(A, alpha, kind):
    """Elements satisfying alpha(x) & forall y ((alpha(y) & x != y) -> x < y), or the max variant."""
    step = lt("x", "y") if kind == "min" else lt("y", "x")
    f = conj([alpha.formula("x", A.vocab), forall("y", Implies(conj([alpha.formula("y", A.vocab), neq("x", "y")]), step))])
    return [a for a in A.domain if model_check(A, f, {"x": a})]


class TestExtremal:
    def test_chain(self):
        vocab = Vocabulary.of({"<": 2})
        A = random_ordered_structure(vocab, 3, random.Random(0))
        alpha = type_of(A, 0)
        assert extremal_realization(A, alpha, "min") == 0
        assert extremal_realization(A, alpha, "max") == 2

    def test_empty_order_two_realizations(self):
        A = FiniteStructure(Vocabulary.of({"<": 2, "P": 1}), 2, {})
        assert extremal_realization(A, type_of(A, 0), "min") is None

    def test_unrealized_type(self):
        vocab = Vocabulary.of({"<": 2, "P": 1})
        A = FiniteStructure(vocab, 2, {})
        assert extremal_realization(A, OneType.from_positive(vocab.names, ["P"]), "max") is None

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from(["min", "max"]))
    def test_matches_formula_evaluation_on_arbitrary_relations(self, seed, kind):
        rnd = random.Random(seed)
        vocab = Vocabulary.of({"<": 2, "P": 1})
        A = random_structure(vocab, rnd.randint(1, 4), rnd)
        for alpha in enumerate_one_types(vocab):
            hits = brute_extremal(A, alpha, kind)
            got = extremal_realization(A, alpha, kind)
            assert (got is None) == (not hits)
            if got is not None:
                assert got in hits


PSI = (
    "(exists x1 x2 x3. P(x1) & P(x2) & P(x3) & x1 != x2 & x1 != x3 & x2 != x3) & "
    "forall x1 x2 x3 x4. (P(x1) & P(x2) & P(x3) & P(x4)) -> "
    "(x1 = x2 | x1 = x3 | x1 = x4 | x2 = x3 | x2 = x4 | x3 = x4)"
)


class TestRoyalty:
    def test_three_p_elements_are_kings(self):
        nf = validate_normal_form(parse_formula(PSI))
        vocab = Vocabulary.of({"<": 2, "P": 1})
        A = random_ordered_structure(vocab, 8, random.Random(1))
        A = FiniteStructure(vocab, 8, {"<": A.relations["<"], "P": {(1,), (4,), (6,)}})
        rep = classify_royalty(A, nf)
        assert rep.kings == {1, 4, 6}
        assert OneType.from_positive(vocab.names, ["P"]) in rep.royal_types
        assert rep.pawns == set(range(8)) - {1, 4, 6}

    def test_no_kings_when_types_are_common(self):
        vocab = Vocabulary.of({"<": 2, "P": 1})
        A = FiniteStructure(vocab, 6, {"P": {(0,), (1,), (2,)}})
        assert classify_royalty(A, 3).kings == frozenset()

    def test_vocabulary_mismatch(self):
        nf = validate_normal_form(parse_formula("forall x. exists y. Q(y)"))
        with pytest.raises(StructureError):
            classify_royalty(FiniteStructure(Vocabulary.of({"<": 2}), 2, {}), nf)

    def test_bounds_and_monotonicity(self):
        rnd = random.Random(3)
        vocab = Vocabulary.of({"<": 2, "P": 1, "Q": 1})
        for _ in range(100):
            A = random_ordered_structure(vocab, rnd.randint(1, 9), rnd)
            previous = frozenset()
            for n in range(2, 6):
                rep = classify_royalty(A, n)
                assert rep.kings | rep.pawns == set(A.domain) and not rep.kings & rep.pawns
                assert len(rep.kings) <= (n - 1) * 2 ** len(vocab)
                assert previous <= rep.kings
                previous = rep.kings
                counts = {t: types_of(A).count(t) for t in set(types_of(A))}
                assert rep.royal_types == {t for t, c in counts.items() if c <= n - 1}
