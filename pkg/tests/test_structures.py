import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_ordered_structure
from naive import holds
from uone.formula import And, Atom, Eq, Iff, Implies, Not, Or, Quant, Vocabulary, free_vars, parse_formula
from uone.structures import (
    BudgetExceeded,
    FiniteStructure,
    StructureError,
    canonical_order,
    class_membership,
    count_ordered_structures,
    enumerate_ordered_structures,
    model_check,
    read_structure,
    write_structure,
)
from uone.types_tables import enumerate_one_types, type_of

VOCAB = Vocabulary.of({"<": 2, "P": 1, "R": 2, "T": 3})
VARS = ["x", "y", "z"]


@st.composite
def atoms(draw):
    choice = draw(st.integers(0, 4))
    v = lambda: draw(st.sampled_from(VARS))  # noqa: E731
    if choice == 0:
        return Eq(v(), v())
    name = ["<", "P", "R", "T"][choice - 1]
    return Atom(name, tuple(v() for _ in range(VOCAB.arity(name))))


def extend(c):
    return st.one_of(
        c.map(Not),
        st.tuples(c, c).map(lambda p: And(p)),
        st.tuples(c, c).map(lambda p: Or(p)),
        st.tuples(c, c).map(lambda p: Implies(*p)),
        st.tuples(c, c).map(lambda p: Iff(*p)),
        st.tuples(st.sampled_from(["exists", "forall"]), st.sampled_from([("x",), ("y",), ("y", "z")]), c).map(
            lambda t: Quant(*t)
        ),
    )


def close(f):
    free = tuple(sorted(free_vars(f)))
    return Quant("forall", free, f) if free else f


class TestModelCheck:
    def test_two_chain_has_no_successor_everywhere(self):
        A = FiniteStructure(Vocabulary.of({"<": 2}), 2, {"<": {(0, 1)}})
        assert not model_check(A, parse_formula("forall x. exists y. x < y"))

    def test_nonempty_domain(self):
        A = FiniteStructure(Vocabulary.of({"<": 2}), 1, {})
        assert model_check(A, parse_formula("exists x. x = x"))

    def test_uncovered_variable(self):
        A = FiniteStructure(VOCAB, 2, {})
        with pytest.raises(StructureError):
            model_check(A, parse_formula("P(x)"))

    def test_vocabulary_mismatch(self):
        A = FiniteStructure(VOCAB, 2, {})
        with pytest.raises(StructureError):
            model_check(A, parse_formula("exists x. S(x)"))

    def test_witnesses_may_repeat(self):
        A = FiniteStructure(VOCAB, 1, {"R": {(0, 0)}})
        assert model_check(A, parse_formula("exists x y. R(x,y)"))

    @settings(max_examples=400, deadline=None)
    @given(st.recursive(atoms(), extend, max_leaves=10), st.integers(0, 2**32 - 1))
    def test_agrees_with_tree_walker(self, f, seed):
        rnd = random.Random(seed)
        A = random_ordered_structure(VOCAB, rnd.randint(1, 3), rnd)
        f = close(f)
        assert model_check(A, f) == holds(A, f)

    def test_type_formula_agrees_with_type_of(self):
        rnd = random.Random(4)
        for _ in range(30):
            A = random_ordered_structure(VOCAB, rnd.randint(1, 4), rnd)
            for alpha in enumerate_one_types(VOCAB):
                for a in A.domain:
                    assert model_check(A, alpha.formula("x", VOCAB), {"x": a}) == (type_of(A, a) == alpha)

    def test_universal_sentences_survive_substructures(self):
        rnd = random.Random(8)
        f = parse_formula("forall x y. R(x,y) -> (x < y | P(x))")
        checked = 0
        for _ in range(400):
            A = random_ordered_structure(VOCAB, rnd.randint(1, 6), rnd)
            if not model_check(A, f):
                continue
            keep = [a for a in A.domain if rnd.random() < 0.6] or [0]
            assert model_check(A.restrict(keep), f)
            checked += 1
        assert checked > 20


class TestClassMembership:
    V = Vocabulary.of({"<": 2})

    def test_chain(self):
        assert class_membership(FiniteStructure(self.V, 3, {"<": {(0, 1), (0, 2), (1, 2)}}))

    def test_missing_pair(self):
        assert not class_membership(FiniteStructure(self.V, 3, {"<": {(0, 1), (0, 2)}}))

    def test_cycle(self):
        assert not class_membership(FiniteStructure(self.V, 3, {"<": {(0, 1), (1, 2), (2, 0)}}))

    def test_classes_coincide_on_finite_domains(self):
        A = FiniteStructure(self.V, 4, {"<": canonical_order(4)})
        assert all(class_membership(A, "<", K) for K in ("O", "WO", "Ofin"))

    def test_shuffled_order(self):
        perm = [2, 0, 3, 1]
        A = FiniteStructure(self.V, 4, {"<": {(perm[i], perm[j]) for i, j in canonical_order(4)}})
        assert class_membership(A)


class TestEnumeration:
    def test_order_only(self):
        assert len(list(enumerate_ordered_structures(Vocabulary.of({"<": 2}), 2))) == 1

    def test_one_unary(self):
        out = list(enumerate_ordered_structures(Vocabulary.of({"<": 2, "P": 1}), 2))
        assert len(out) == 4 and len(set(out)) == 4

    @pytest.mark.parametrize("size", [1, 2, 3])
    def test_closed_form_count(self, size):
        vocab = Vocabulary.of({"<": 2, "P": 1, "R": 2})
        out = list(enumerate_ordered_structures(vocab, size))
        assert len(out) == count_ordered_structures(vocab, size) == 2 ** (size + size**2)
        assert all(A.relations["<"] == canonical_order(size) for A in out)

    def test_unfixed_order(self):
        out = list(enumerate_ordered_structures(Vocabulary.of({"<": 2}), 2, fix_order=False))
        assert len(out) == 16

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            next(enumerate_ordered_structures(VOCAB, 4, budget_bits=10))


class TestText:
    def test_round_trip(self):
        A = read_structure("domain=3\n< = {(0,1),(0,2),(1,2)}")
        assert A.size == 3 and A.relations["<"] == canonical_order(3)
        assert read_structure(write_structure(A)) == A

    def test_empty_relation(self):
        A = read_structure("domain=2\nR = {}", Vocabulary.of({"R": 2}))
        assert A.relations["R"] == frozenset()

    def test_canonical_form(self):
        text = "domain=2\n# a comment\n<={ (1, 0) }\nP = {(1),(0)}\n"
        A = read_structure(text)
        out = write_structure(A)
        assert "P = {(0),(1)}" in out and "< = {(1,0)}" in out
        assert write_structure(read_structure(out)) == out

    @pytest.mark.parametrize(
        "text",
        ["R = {(0,1)}", "domain=2\nR = {(0,2)}", "domain=2\nR = {(0,1),(1)}", "domain=x", "domain=2\nR {(0,1)}"],
    )
    def test_malformed(self, text):
        with pytest.raises(StructureError):
            read_structure(text)

    def test_random_round_trips(self):
        rnd = random.Random(6)
        for _ in range(50):
            A = random_ordered_structure(VOCAB, rnd.randint(1, 4), rnd)
            assert read_structure(write_structure(A)) == A


def test_tuples_outside_domain_rejected():
    with pytest.raises(StructureError):
        FiniteStructure(VOCAB, 2, {"P": {(2,)}})


def test_arity_checked():
    with pytest.raises(StructureError):
        FiniteStructure(VOCAB, 2, {"R": {(0,)}})


def test_restrict_renumbers_in_order():
    A = FiniteStructure(VOCAB, 4, {"<": canonical_order(4), "P": {(1,), (3,)}})
    B = A.restrict([1, 3])
    assert B.size == 2 and B.relations["P"] == {(0,), (1,)} and B.relations["<"] == {(0, 1)}


def test_all_pairs_in_canonical_order():
    assert canonical_order(3) == set(itertools.combinations(range(3), 2))
