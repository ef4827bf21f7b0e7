import json
from dataclasses import replace

import pytest

from naive import all_structures, holds
from uone.axioms import u_sym
from uone.formula import Vocabulary, parse_formula
from uone.normal_form import to_normal_form, validate_normal_form
from uone.solver import (
    PROFILES,
    BudgetError,
    Budgets,
    FragmentViolation,
    bounded_general_model_search,
    brute_force_ordered_sat,
    completeness_domain,
    default_budgets,
    read_certificate,
    solve_ordered_sat,
    verify_certificate,
)
from uone.structures import FiniteStructure, class_membership, model_check

QUICK = PROFILES["quick"]


class TestBudgets:
    def test_positive(self):
        with pytest.raises(BudgetError):
            Budgets(max_oracle_domain=0)
        with pytest.raises(BudgetError):
            Budgets(wall_clock=-1.0)

    def test_profiles(self):
        assert default_budgets("desk") == Budgets()
        with pytest.raises(BudgetError):
            default_budgets("huge")

    def test_environment_selects_profile(self, monkeypatch):
        monkeypatch.setenv("UONE_BUDGET_PROFILE", "quick")
        assert default_budgets() == QUICK


class TestOracle:
    def test_three_distinct(self):
        v = brute_force_ordered_sat("exists x y z. x != y & y != z & z != x", "Ofin")
        assert v.sat and v.certificate.structure.size == 3

    def test_irreflexive_order(self):
        v = brute_force_ordered_sat("forall x. x < x", "Ofin", Budgets(max_oracle_domain=5))
        assert v.status == "no-model-within-budget"

    def test_no_finite_successor_model(self):
        v = brute_force_ordered_sat("forall x. exists y. x < y", "Ofin")
        assert not v.sat and v.stats["sizes_searched"] == 4

    def test_fragment_checked(self):
        with pytest.raises(FragmentViolation):
            brute_force_ordered_sat("exists x y z. S(x,y) | S(x,z)")

    def test_unknown_class(self):
        with pytest.raises(ValueError):
            brute_force_ordered_sat("exists x. x = x", "finite")


SMALL_NF = [
    "forall x. exists y. P(y) & ~Q(x)",
    "forall x. exists y. x < y & P(y)",
    "forall x. exists y. y < x | P(x) & Q(y)",
    "(forall x. exists y. x < y) & (forall x1 x2. x1 < x2 -> ~(x2 < x1))",
    "forall x1 x2. (P(x1) & P(x2)) -> x1 = x2",
    "(forall x. exists y. P(y) & ~P(x)) & (forall x1. x1 < x1)",
    "forall x. exists y. x != y & (P(x) <-> Q(y))",
]


class TestGeneralSearch:
    def test_existential_sentence(self):
        nf = to_normal_form(parse_formula("exists x. P(x)"))
        B = bounded_general_model_search(nf, 3)
        assert B is not None and B.size == 1

    def test_contradiction(self):
        nf = validate_normal_form(parse_formula("forall x1. ~(x1 = x1)"))
        assert bounded_general_model_search(nf, 4) is None

    @pytest.mark.parametrize("text", SMALL_NF)
    def test_agrees_with_enumeration(self, text):
        nf = validate_normal_form(parse_formula(text), Vocabulary.of({"P": 1, "Q": 1}))
        f = nf.formula()
        expected = None
        for n in range(1, 4):
            if any(holds(A, f) for A in all_structures(nf.vocab, n)):
                expected = n
                break
        B = bounded_general_model_search(nf, 3)
        assert (B.size if B is not None else None) == expected
        if B is not None:
            assert model_check(B, f)

    def test_budget(self):
        nf = validate_normal_form(parse_formula("forall x. exists y. x < y"))
        with pytest.raises(BudgetError):
            bounded_general_model_search(nf, 0)


class TestSolve:
    def test_successor_over_omega(self):
        v = solve_ordered_sat("forall x. exists y. x < y", "O", QUICK)
        assert v.sat and v.source == "pipeline" and v.certificate.gamma is not None
        assert verify_certificate(v.certificate).ok

    def test_fast_path(self):
        v = solve_ordered_sat("exists x. x = x", "Ofin")
        assert v.sat and v.source == "fast-path" and v.certificate.structure.size == 1

    def test_pipeline_without_fast_path(self):
        v = solve_ordered_sat("exists x y. x < y & P(x) & ~P(y)", "Ofin", QUICK, fast_path=False)
        assert v.sat and v.source == "pipeline"
        assert verify_certificate(v.certificate).ok

    @pytest.mark.parametrize("K", ["Ofin", "WO"])
    def test_no_finite_or_well_ordered_model_of_predecessors(self, K):
        v = solve_ordered_sat("forall x. exists y. y < x", K, QUICK, fast_path=False)
        assert not v.sat and v.status == "no-model-within-budget"

    def test_predecessors_over_omega_star_orders(self):
        assert solve_ordered_sat("forall x. exists y. y < x", "O", QUICK, fast_path=False).sat

    def test_strategies_agree(self):
        for text in ["forall x. exists y. x < y & P(y)", "exists x y z. x != y & y != z & x != z & P(y)"]:
            a = solve_ordered_sat(text, "O", QUICK, fast_path=False)
            b = solve_ordered_sat(text, "O", QUICK, fast_path=False, strategy="enumerate")
            assert a.sat and b.sat
            assert verify_certificate(b.certificate).ok

    def test_complete_needs_huge_budgets(self):
        with pytest.raises(BudgetError):
            solve_ordered_sat("forall x. exists y. x < y", "Ofin", QUICK, complete=True)
        nf = to_normal_form(parse_formula("forall x. exists y. x < y"))
        assert completeness_domain(nf) > 10**6

    def test_deterministic(self):
        a = solve_ordered_sat("forall x. exists y. x < y & (P(x) <-> ~P(y))", "O", QUICK, fast_path=False)
        b = solve_ordered_sat("forall x. exists y. x < y & (P(x) <-> ~P(y))", "O", QUICK, fast_path=False)
        assert a.certificate.files() == b.certificate.files()

    def test_verdict_rendering(self):
        v = solve_ordered_sat("exists x. x = x", "Ofin")
        d = json.loads(v.render(as_json=True))
        assert d["verdict"] == "sat" and d["class"] == "Ofin" and d["domain"] == 1
        assert "verdict: sat" in v.render()

    def test_strategy_validated(self):
        with pytest.raises(ValueError):
            solve_ordered_sat("exists x. x = x", "Ofin", strategy="guess")


@pytest.fixture(scope="module")
def cert():
    return solve_ordered_sat("forall x. exists y. x < y & P(y)", "O", QUICK).certificate


class TestVerify:
    def test_ok(self, cert):
        assert verify_certificate(cert).ok

    def test_deleting_an_interval_tuple(self, cert):
        B = cert.structure
        for s in range(1, cert.gamma.N + 1):
            rel = B.relations[u_sym(s)]
            if rel:
                victim = min(rel)
                broken = FiniteStructure(B.vocab, B.size, {**B.relations, u_sym(s): rel - {victim}})
                rep = verify_certificate(replace(cert, structure=broken))
                assert not rep.ok and rep.failing_axioms and {2, 3} & set(rep.failing_axioms)
                return
        pytest.fail("no interval tuple to delete")

    def test_round_trip(self, cert, tmp_path):
        cert.write(tmp_path / "c")
        again = read_certificate(tmp_path / "c")
        assert again == cert and verify_certificate(again).ok

    def test_wrong_formula(self, cert):
        assert not verify_certificate(replace(cert, formula="forall x. exists y. x < y & ~P(y)")).ok

    def test_unparsable_formula(self, cert):
        rep = verify_certificate(replace(cert, formula="forall x. ("))
        assert not rep.ok and "parse" in rep.problems[0]

    def test_direct_model(self):
        v = brute_force_ordered_sat("exists x y. x < y & P(x)", "Ofin")
        assert verify_certificate(v.certificate).ok
        A = v.certificate.structure
        assert class_membership(A)
        empty = FiniteStructure(A.vocab, A.size, {**A.relations, "P": set()})
        assert not verify_certificate(replace(v.certificate, structure=empty)).ok
