import pytest
from hypothesis import given

from axioms.checker import check_proof
from calculus.syntax import parse
from calculus.terms import BOTTOM, NIL, act, as_guarded_sum, is_basic, is_normal_form
from normalizer.normal_form import NormalForm, normal_form_size
from normalizer.normalize import Normalizer, choice_nf, conj_nf, normalize, par_nf
from refinement.simulation import rs_equiv
from semantics.lts import is_consistent
from tests.strategies import DEEP, WIDE, prefix_chain, terms


def nf_text(text):
    return str(normalize(parse(text))[0])


@pytest.mark.parametrize("text, expected", [
    ("0", "0"),
    ("bot", "bot"),
    ("tau.a.0", "a.0"),
    ("a.bot", "bot"),
    ("tau.bot", "bot"),
    ("a.0 [] a.b.0", "a.(0 \\/ b.0)"),
    ("b.0 [] a.0 [] 0", "a.0 [] b.0"),
    ("a.0 [] bot", "bot"),
    ("b.0 \\/ a.0 \\/ b.0", "a.0 \\/ b.0"),
    ("a.0 \\/ bot", "a.0"),
    ("bot \\/ bot", "bot"),
    ("tau.(a.0 \\/ b.0)", "a.0 \\/ b.0"),
    ("(a.0 \\/ b.0) [] c.0", "a.0 [] c.0 \\/ b.0 [] c.0"),
    ("a.0 /\\ b.0", "bot"),
    ("a.0 /\\ a.0", "a.0"),
    ("(a.b.0 [] b.0) /\\ (a.c.0 [] b.0)", "bot"),
    ("(a.b.0 [] c.0) /\\ (a.(b.0 \\/ c.0) [] c.0)", "a.b.0 [] c.0"),
    ("a.0 |[]| b.0", "a.b.0 [] b.a.0"),
    ("a.0 |[a]| b.0", "b.0"),
    ("a.0 |[a]| a.0", "a.0"),
    ("a.0 |[a]| bot", "bot"),
])
def test_normal_forms(text, expected):
    assert nf_text(text) == expected


class TestNormalForm:
    def test_reading_a_normal_form(self, t):
        nf = NormalForm.from_term(t("a.(0 \\/ b.0) [] c.0 \\/ b.0"))
        assert len(nf.disjuncts) == 2
        assert nf.term == t("a.(0 \\/ b.0) [] c.0 \\/ b.0")
        assert normal_form_size(nf) == 4
        assert not nf.is_canonical()

    def test_bottom(self):
        nf = NormalForm.from_term(BOTTOM)
        assert nf.is_bottom and nf.term == BOTTOM and normal_form_size(nf) == 0

    def test_rejects_other_terms(self, t):
        with pytest.raises(ValueError):
            NormalForm.from_term(t("tau.a.0"))

    def test_nil_is_one_empty_disjunct(self):
        nf = NormalForm.from_term(NIL)
        assert nf.disjuncts == ((),)
        assert nf.is_canonical()


class TestOperations:
    def test_conjunction(self, t):
        nf, eq = conj_nf(NormalForm.from_term(t("a.0 [] b.c.0")), NormalForm.from_term(t("a.0 [] b.(c.0 \\/ 0)")))
        assert nf.term == t("a.0 [] b.c.0")
        assert check_proof(eq.fwd) and check_proof(eq.bwd)

    def test_conjunction_of_mismatched_sums(self, t):
        nf, _ = conj_nf(NormalForm.from_term(t("a.0")), NormalForm.from_term(t("b.0")))
        assert nf.is_bottom

    @pytest.mark.parametrize("left, right", [("bot", "a.0"), ("a.0", "bot")])
    def test_conjunction_rejects_bottom(self, t, left, right):
        with pytest.raises(ValueError):
            conj_nf(NormalForm.from_term(t(left)), NormalForm.from_term(t(right)))
        with pytest.raises(ValueError):
            par_nf(NormalForm.from_term(t(left)), NormalForm.from_term(t(right)), frozenset())

    def test_parallel(self, t):
        nf, eq = par_nf(NormalForm.from_term(t("a.0")), NormalForm.from_term(t("b.0")), frozenset({act("a")}))
        assert nf.term == t("b.0")
        assert check_proof(eq.fwd)
        with pytest.raises(ValueError):
            par_nf(NormalForm.from_term(BOTTOM), NormalForm.from_term(NIL), frozenset())

    def test_choice_merges_equal_actions(self, t):
        merged, eq = choice_nf(as_guarded_sum(t("a.0 [] c.0")), as_guarded_sum(t("b.0 [] a.b.0")))
        assert [a.name for a in merged.actions] == ["a", "b", "c"]
        assert merged.term == t("a.(0 \\/ b.0) [] b.0 [] c.0")
        assert check_proof(eq.fwd) and check_proof(eq.bwd)

    def test_choice_with_empty_sum(self, t):
        merged, _ = choice_nf(as_guarded_sum(NIL), as_guarded_sum(t("a.0")))
        assert merged.term == t("a.0")


class TestNormalizer:
    def test_results_are_cached(self, t):
        normalizer = Normalizer()
        first = normalizer.normalize(t("a.0 [] a.b.0"))
        assert normalizer.normalize(t("a.0 [] a.b.0")) is first

    @given(terms(max_leaves=5))
    def test_result_is_a_canonical_normal_form(self, p):
        nf, eq = normalize(p)
        assert (eq.lhs, eq.rhs) == (p, nf.term)
        assert is_normal_form(nf.term)
        assert nf.is_canonical()

    @given(terms(max_leaves=5))
    def test_both_proofs_check(self, p):
        _, eq = normalize(p)
        forward, backward = check_proof(eq.fwd), check_proof(eq.bwd)
        assert forward and backward
        assert (forward.lhs, forward.rhs) == (backward.rhs, backward.lhs) == (eq.lhs, eq.rhs)

    @given(terms(max_leaves=5))
    def test_normal_form_is_equivalent(self, p):
        assert rs_equiv(p, normalize(p)[0].term)

    @given(terms(max_leaves=5))
    def test_normalizing_twice_changes_nothing(self, p):
        nf, _ = normalize(p)
        again, eq = normalize(nf.term)
        assert again == nf
        assert eq.is_trivial

    @given(terms(max_leaves=5, basic=True))
    def test_basic_terms_never_become_bottom(self, p):
        nf, _ = normalize(p)
        assert not nf.is_bottom
        assert is_basic(nf.term)

    @given(terms(max_leaves=5))
    def test_bottom_exactly_for_inconsistent_terms(self, p):
        assert normalize(p)[0].is_bottom == (not is_consistent(p))


class TestLargeTerms:
    def test_deep_prefix_chain(self, t):
        nf, eq = normalize(t(DEEP))
        assert nf.term == t(DEEP)
        assert eq.is_trivial
        assert nf.is_canonical()
        assert normal_form_size(nf) == 1000

    def test_deep_chain_over_bottom(self, t):
        nf, eq = normalize(t(prefix_chain(1000, end="bot")))
        assert nf.is_bottom
        assert eq.lhs == t(prefix_chain(1000, end="bot"))

    def test_deep_tau_chain(self, t):
        nf, _ = normalize(t(prefix_chain(1000, name="tau", end="a.0")))
        assert str(nf) == "a.0"

    def test_wide_choice(self, t):
        nf, eq = normalize(t(WIDE))
        assert nf.term == t(WIDE)
        assert eq.is_trivial
        assert len(nf.disjuncts[0]) == 1000

    def test_wide_choice_of_one_action(self, t):
        nf, eq = normalize(t(" [] ".join(["a.b.0"] * 1000)))
        assert str(nf) == "a.b.0"
        assert eq.rhs == t("a.b.0")
