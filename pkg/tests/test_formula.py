import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import classify, read_fragment_corpus
from uone.formula import (
    And,
    Atom,
    Eq,
    FragmentProfile,
    Iff,
    Implies,
    Not,
    Or,
    ParseError,
    Quant,
    Vocabulary,
    VocabularyError,
    check_fragment,
    desugar,
    free_vars,
    infer_vocabulary,
    live_elements,
    live_variables,
    parse_formula,
    render_formula,
    subformulas,
)

EXAMPLE = "exists x y z. ~R(x,y,z,x,y) & ~T(y,x,z) & P(x) & Q(y)"


class TestParse:
    def test_three_block_example_builds_expected_tree(self):
        f = parse_formula(EXAMPLE)
        assert isinstance(f, Quant) and f.kind == "exists" and f.vars == ("x", "y", "z")
        assert f.body == And(
            (
                Not(Atom("R", ("x", "y", "z", "x", "y"))),
                Not(Atom("T", ("y", "x", "z"))),
                Atom("P", ("x",)),
                Atom("Q", ("y",)),
            )
        )

    def test_smallest_sentence(self):
        f = parse_formula("exists x. x = x")
        assert f == Quant("exists", ("x",), Eq("x", "x"))

    def test_arity_mismatch_against_vocabulary(self):
        with pytest.raises(ParseError):
            parse_formula("P(x, y)", Vocabulary.of({"P": 1}))

    def test_inconsistent_inferred_arity(self):
        with pytest.raises(ParseError, match="arity"):
            parse_formula("R(x,y) & R(x)")

    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError, match="line 2, column"):
            parse_formula("exists x.\n  P(x) & & Q(x)")

    def test_open_formula_is_legal(self):
        f = parse_formula("P(x) & R(x,y)")
        assert free_vars(f) == {"x", "y"}

    def test_sugar_and_precedence(self):
        f = parse_formula("~P(x) & Q(x) | R(x,x) -> S(x) <-> x != x")
        assert isinstance(f, Iff)
        assert isinstance(f.left, Implies)
        assert isinstance(f.left.left, Or)
        assert f.right == Not(Eq("x", "x"))

    def test_quantifier_body_extends_right(self):
        f = parse_formula("forall x. P(x) & exists y. R(x,y) | Q(x)")
        assert isinstance(f, Quant) and isinstance(f.body, And)
        assert isinstance(f.body.parts[1], Quant)

    def test_comments_and_infix_orders(self):
        f = parse_formula("# two orders\nforall x y. x <1 y | x <2 y  # trailing")
        assert f.body == Or((Atom("<1", ("x", "y")), Atom("<2", ("x", "y"))))

    def test_order_symbol_must_be_binary(self):
        with pytest.raises(VocabularyError):
            Vocabulary.of({"<": 3})

    def test_vocabulary_rejects_nonpositive_arity(self):
        with pytest.raises(VocabularyError):
            Vocabulary.of({"P": 0})


class TestRender:
    @pytest.mark.parametrize(
        "text",
        [
            "exists x. P(x)",
            EXAMPLE,
            "forall x. exists y z. forall u. T(x,y,z) | P(u)",
            "exists x. (forall y. P(y)) & Q(x)",
            "forall x y. x < y <-> ~(y < x) & x != y",
        ],
    )
    def test_round_trip(self, text):
        f = parse_formula(text)
        assert parse_formula(render_formula(f)) == f

    def test_nested_blocks_keep_grouping(self):
        f = parse_formula("exists x. exists y. R(x,y)")
        g = parse_formula(render_formula(f))
        assert isinstance(g.body, Quant) and g.vars == ("x",) and g.body.vars == ("y",)


NAMES = ["x", "y", "z", "u"]
RELS = [("P", 1), ("Q", 1), ("R", 2), ("T", 3), ("<", 2), ("<1", 2)]


@st.composite
def atoms(draw):
    if draw(st.booleans()):
        return Eq(draw(st.sampled_from(NAMES)), draw(st.sampled_from(NAMES)))
    name, arity = draw(st.sampled_from(RELS))
    return Atom(name, tuple(draw(st.sampled_from(NAMES)) for _ in range(arity)))


def extend(children):
    block = st.lists(st.sampled_from(NAMES), min_size=1, max_size=3, unique=True).map(tuple)
    return st.one_of(
        children.map(Not),
        st.lists(children, min_size=2, max_size=3).map(lambda ps: And(tuple(ps))),
        st.lists(children, min_size=2, max_size=3).map(lambda ps: Or(tuple(ps))),
        st.tuples(children, children).map(lambda p: Implies(*p)),
        st.tuples(children, children).map(lambda p: Iff(*p)),
        st.tuples(st.sampled_from(["exists", "forall"]), block, children).map(lambda t: Quant(*t)),
    )


formulas = st.recursive(atoms(), extend, max_leaves=12)


@settings(max_examples=1000, deadline=None)
@given(formulas)
def test_parse_inverts_render(f):
    assert parse_formula(render_formula(f)) == f


@pytest.mark.parametrize("mode,expected,text", read_fragment_corpus())
def test_fragment_corpus(mode, expected, text):
    assert classify(mode, text) == expected


def test_fragment_corpus_size():
    assert len(read_fragment_corpus()) == 30


class TestFragment:
    def test_uniformity_violation(self):
        r = check_fragment(parse_formula("exists x y z. S(x,y) | S(x,z)"))
        assert not r.accepted and r.kinds() == {"uniformity"}
        assert all(v.location for v in r.violations)

    def test_one_dimensionality_violation(self):
        r = check_fragment(parse_formula("forall y. P(y) & (exists x. T(x,y,z))"))
        assert "one-dimensionality" in r.kinds()

    def test_free_orders_are_exempt(self):
        f = parse_formula("forall x y z. (x <1 y & y <1 z) -> x <1 z")
        assert check_fragment(f, FragmentProfile.u1_free()).accepted
        assert not check_fragment(f, FragmentProfile.from_name("u1")).accepted

    def test_no_equality_mode(self):
        f = parse_formula("forall x. exists y. x != y & P(y)")
        assert check_fragment(f).accepted
        assert check_fragment(f, FragmentProfile.from_name("u1_no_eq")).kinds() == {"scope"}

    def test_fo2_sentence_passes_fu1(self):
        f = parse_formula("forall x. exists y. R(x,y) & ~R(y,x) & x != y & P(y)")
        assert check_fragment(f, FragmentProfile.from_name("fu1")).accepted

    def test_accepted_iff_no_violations(self):
        for mode, _, text in read_fragment_corpus():
            try:
                f = parse_formula(text)
            except ParseError:
                continue
            r = check_fragment(f, FragmentProfile.from_name(mode))
            assert r.accepted == (len(r.violations) == 0)

    def test_u1_acceptance_survives_exemptions(self):
        for mode, expected, text in read_fragment_corpus():
            if mode == "u1" and expected == "accept":
                f = parse_formula(text)
                binary = [n for n in infer_vocabulary(f).names if infer_vocabulary(f).arity(n) == 2]
                assert check_fragment(f, FragmentProfile.u1_free(binary)).accepted

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            FragmentProfile("U2")


class TestLiveVariables:
    def test_lifted_to_elements(self):
        m = parse_formula("R(v2,v3,v2) & P(v4) & v1 = v2")
        assert live_variables(m) == {"v2", "v3"}
        assert live_elements(m, ("v1", "v2", "v3", "v4"), ("a", "b", "c", "b")) == {"b", "c"}

    def test_no_higher_arity_atom(self):
        assert live_variables(parse_formula("P(x) & x = y")) == frozenset()

    def test_union_of_uniform_atoms(self):
        m = parse_formula("T(x,y,z) & R(x,x,y,y,z) & x = u & Q(u)")
        assert live_variables(m) == {"x", "y", "z"}

    def test_needs_quantifier_free_input(self):
        with pytest.raises(ValueError):
            live_variables(parse_formula("exists y. R(x,y)"))

    @settings(max_examples=200, deadline=None)
    @given(st.recursive(atoms(), lambda c: st.one_of(c.map(Not), st.tuples(c, c).map(lambda p: And(p))), max_leaves=8))
    def test_subset_of_matrix_variables(self, m):
        live = live_variables(m)
        assert live <= free_vars(m)
        higher = [a for a in _atoms(m) if isinstance(a, Atom) and len(set(a.args)) >= 2]
        assert (live == frozenset()) == (not higher)


def _atoms(f):
    return [g for g in subformulas(f) if isinstance(g, (Atom, Eq))]


def test_desugar_removes_implications():
    f = desugar(parse_formula("forall x. P(x) -> (Q(x) <-> P(x))"))
    assert not any(isinstance(g, (Implies, Iff)) for g in subformulas(f))
