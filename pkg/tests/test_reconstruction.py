import random

import pytest

from uone.formula import parse_formula
from uone.normal_form import to_normal_form
from uone.reconstruction import (
    KINDS,
    IntervalModelDescription,
    ReconstructionError,
    format_address,
    parse_address,
    random_address,
    reconstruct_finite,
    reconstruct_symbolic,
    universals_hold,
    witness_holds,
)
from uone.solver import PROFILES, solve_ordered_sat
from uone.structures import canonical_order, class_membership, model_check

QUICK = PROFILES["quick"]

FINITE = [
    "exists x y. x < y & P(x) & ~P(y)",
    "forall x. exists y. P(y) & x != y",
    "forall x. exists y. (x < y | y < x) & (P(x) <-> ~P(y))",
    "exists x y z. x != y & y != z & x != z & P(y)",
    "forall x. exists y. R(x,y) & x != y",
]

INFINITE = [
    "forall x. exists y. x < y",
    "forall x. exists y. x < y & P(y)",
    "forall x. exists y. x < y & (P(x) <-> ~P(y))",
    "forall x. exists y. x < y & R(x,y)",
]


def pipeline(text, K):
    v = solve_ordered_sat(text, K, QUICK, fast_path=False)
    assert v.sat and v.source == "pipeline", v.message
    cert = v.certificate
    return cert, to_normal_form(parse_formula(text))


@pytest.fixture(scope="module")
def omega():
    out = []
    for text in INFINITE:
        cert, nf = pipeline(text, "O")
        out.append((cert, nf, reconstruct_symbolic(cert.structure, cert.gamma, nf, "O")))
    return out


class TestFinite:
    @pytest.mark.parametrize("text", FINITE)
    def test_rebuilt_structure_is_an_ordered_model(self, text):
        cert, nf = pipeline(text, "Ofin")
        A, desc = reconstruct_finite(cert.structure, cert.gamma, nf)
        assert A.relations["<"] == canonical_order(A.size)
        assert class_membership(A, "<", "Ofin")
        assert model_check(A, parse_formula(text))
        assert A.size == len(desc.finite_addresses())

    def test_addresses_listed_in_order(self):
        cert, nf = pipeline(FINITE[1], "Ofin")
        _, desc = reconstruct_finite(cert.structure, cert.gamma, nf)
        addrs = desc.finite_addresses()
        assert addrs == sorted(addrs) and len(set(addrs)) == len(addrs)

    def test_listing_needs_finite_layout(self, omega):
        with pytest.raises(ReconstructionError):
            omega[0][2].finite_addresses()

    def test_inadmissible_class(self, omega):
        cert, nf, _ = omega[0]
        with pytest.raises(ReconstructionError):
            reconstruct_finite(cert.structure, cert.gamma, nf)


class TestAddresses:
    def test_order_is_strict_and_total(self, omega):
        rng = random.Random(5)
        desc = omega[1][2]
        for _ in range(10_000):
            a, b, c = (random_address(desc, rng) for _ in range(3))
            ab, bc, ac = desc.compare(a, b), desc.compare(b, c), desc.compare(a, c)
            assert ab == -desc.compare(b, a)
            assert (ab == 0) == (a == b)
            if ab < 0 and bc < 0:
                assert ac < 0

    def test_random_addresses_are_valid(self, omega):
        rng = random.Random(6)
        for _, _, desc in omega:
            assert all(desc.valid(random_address(desc, rng, 7)) for _ in range(300))

    @pytest.mark.parametrize("bad", [(0, 0, 0, 0), (1, 0, 99, 0), (1, 0, 0, -1), (1, 0, 0), "1:0:0:0"])
    def test_invalid(self, omega, bad):
        assert not omega[0][2].valid(bad)

    def test_text_round_trip(self):
        assert parse_address("2:-3:0:11") == (2, -3, 0, 11)
        assert format_address((2, -3, 0, 11)) == "2:-3:0:11"

    @pytest.mark.parametrize("text", ["1:2:3", "a:0:0:0", ""])
    def test_malformed_text(self, text):
        with pytest.raises(ValueError):
            parse_address(text)


class TestSymbolic:
    def test_layout_kinds(self, omega):
        for _, _, desc in omega:
            for lay in desc.layouts:
                if not lay.court:
                    assert lay.kinds == KINDS["O"]
        assert KINDS["WO"][0] == "finite" and KINDS["WO"][2] == "omega"

    def test_no_last_element_over_omega(self, omega):
        desc = omega[0][2]
        lay = desc.layout(desc.gamma.N)
        assert lay.has_repetition(10**6) or lay.court

    def test_random_samples(self, omega):
        rng = random.Random(11)
        for _, nf, desc in omega:
            for _ in range(60):
                addrs = sorted({random_address(desc, rng) for _ in range(rng.randint(1, 6))})
                S = desc.sample(addrs)
                assert S.relations["<"] == canonical_order(S.size)
                assert universals_hold(desc, addrs)

    def test_random_witnesses(self, omega):
        rng = random.Random(12)
        for _, nf, desc in omega:
            for _ in range(40):
                a = random_address(desc, rng, 9)
                assert all(witness_holds(desc, a, i) for i in range(nf.m_exists))

    def test_samples_agree_on_overlaps(self, omega):
        rng = random.Random(13)
        _, _, desc = omega[3]
        for _ in range(40):
            addrs = sorted({random_address(desc, rng) for _ in range(5)})
            whole = desc.sample(addrs)
            keep = [j for j in range(len(addrs)) if rng.random() < 0.5] or [0]
            assert desc.sample([addrs[j] for j in keep]) == whole.restrict(keep)

    def test_duplicate_addresses(self, omega):
        desc = omega[0][2]
        a = random_address(desc, random.Random(1))
        with pytest.raises(ReconstructionError):
            desc.sample([a, a])

    def test_well_order_layout(self):
        cert, nf = pipeline(INFINITE[1], "WO")
        desc = IntervalModelDescription(cert.structure, cert.gamma, nf, "WO")
        assert all(not lay.has_repetition(-2) for lay in desc.layouts)
        assert "omega" in desc.render()

    def test_symbolic_rejects_finite_class(self, omega):
        cert, nf, _ = omega[0]
        with pytest.raises(ValueError):
            reconstruct_symbolic(cert.structure, cert.gamma, nf, "Ofin")
