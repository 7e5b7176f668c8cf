import json

import pytest
from hypothesis import given, strategies as st

from axioms.checker import check_proof
from axioms.equational import (
    bottom_leq, by_axiom, commute, disjunct_leq, distribute_all, expand, merge_prefixes, reorder_proof,
)
from axioms.proofs import (
    AxiomStep, Context, Direction, Refl, Trans, axiom, equation_to_json, proof_from_json, proof_size,
    proof_to_json, proofs_from_json, refl, trans,
)
from axioms.schemas import AXIOM_NAMES, SCHEMAS, expansion, is_equational, match_axiom, nary_arity, try_match
from calculus.syntax import parse
from calculus.terms import (
    BOTTOM, NIL, Conj, Disj, ExtChoice, Operator, Par, Prefix, act, fold_choice, fold_disj, operator_of,
)
from core.errors import AxiomMismatch, ProofFormatError
from tests.strategies import SYNC, VISIBLE, basic_terms, guarded_sums, small_terms, terms

a, b = act("a"), act("b")
undivided = small_terms.filter(lambda u: not isinstance(u, Disj))


class TestMatchAxiom:
    def test_disjunction_upper_bound(self, t):
        inst = match_axiom("DI5", Direction.L2R, t("a.0"), t("a.0 \\/ b.0"))
        assert inst == {"x": t("a.0"), "y": t("b.0")}

    def test_inequational_axioms_only_go_left_to_right(self, t):
        with pytest.raises(AxiomMismatch) as e:
            match_axiom("DI5", Direction.R2L, t("a.0 \\/ b.0"), t("a.0"))
        assert "right-to-left" in e.value.reason

    def test_equational_axiom_in_both_directions(self, t):
        assert match_axiom("EC4", Direction.L2R, t("a.0 [] 0"), t("a.0")) == {"x": t("a.0")}
        assert match_axiom("EC4", Direction.R2L, t("a.0"), t("a.0 [] 0")) == {"x": t("a.0")}

    def test_metavariables_must_agree(self, t):
        assert try_match("EC3", Direction.L2R, t("a.0 [] a.0"), t("a.0")) is not None
        assert try_match("EC3", Direction.L2R, t("a.0 [] b.0"), t("a.0")) is None

    def test_prefix_schemas(self, t):
        assert match_axiom("PR1", Direction.L2R, t("b.bot"), BOTTOM) == {"a": b}
        assert try_match("PR1", Direction.L2R, t("tau.bot"), BOTTOM) is None
        assert try_match("PR2", Direction.L2R, t("tau.a.0"), t("a.0")) is not None
        assert try_match("PR2", Direction.L2R, t("b.a.0"), t("a.0")) is None

    def test_sync_sets_must_agree(self, t):
        assert try_match("PA1", Direction.L2R, t("a.0 |[a]| b.0"), t("b.0 |[a]| a.0")) is not None
        assert try_match("PA1", Direction.L2R, t("a.0 |[a]| b.0"), t("b.0 |[b]| a.0")) is None

    def test_prefix_distribution_needs_basic_operands(self, t):
        assert try_match("DS4", Direction.L2R, t("a.(b.0 \\/ 0)"), t("a.b.0 [] a.0")) is not None
        with pytest.raises(AxiomMismatch) as e:
            match_axiom("DS4", Direction.L2R, t("a.(bot \\/ 0)"), t("a.bot [] a.0"))
        assert e.value.side_condition == "x, y must be basic terms"

    def test_unknown_axiom(self, t):
        with pytest.raises(AxiomMismatch):
            match_axiom("XX9", Direction.L2R, NIL, NIL)

    def test_arity_is_only_for_nary_axioms(self, t):
        with pytest.raises(AxiomMismatch):
            match_axiom("EC1", Direction.L2R, t("a.0 [] b.0"), t("b.0 [] a.0"), arity=(2,))

    def test_catalogue(self):
        assert len(AXIOM_NAMES) == len(set(AXIOM_NAMES)) == 26
        assert not is_equational("DS1") and is_equational("DI2") and is_equational("ECC1")


class TestNaryAxioms:
    def test_conjunction_of_different_prefix_sets(self, t):
        inst = match_axiom("ECC1", Direction.L2R, t("a.0 /\\ b.0"), BOTTOM)
        assert (inst["n"], inst["m"]) == (1, 1)
        assert nary_arity("ECC1", t("a.0 /\\ b.0"), BOTTOM) == (1, 1)

    def test_conjunction_of_equal_prefix_sets_is_not_bottom(self, t):
        with pytest.raises(AxiomMismatch) as e:
            match_axiom("ECC1", Direction.L2R, t("a.0 [] b.0 /\\ b.0 [] a.c.0"), BOTTOM)
        assert e.value.side_condition == "prefix sets must differ"

    def test_declared_arity_is_checked(self, t):
        lhs = t("a.0 [] b.0 /\\ c.0")
        assert try_match("ECC1", Direction.L2R, lhs, BOTTOM, arity=(2, 1)) is not None
        assert try_match("ECC1", Direction.L2R, lhs, BOTTOM, arity=(1, 1)) is None
        assert try_match("ECC1", Direction.L2R, lhs, BOTTOM, arity=(2,)) is None

    def test_summand_wise_conjunction(self, t):
        zipped, conj = t("a.(0 /\\ b.0) [] b.(0 /\\ 0)"), t("a.0 [] b.0 /\\ a.b.0 [] b.0")
        assert try_match("ECC2", Direction.L2R, zipped, conj) is not None
        assert try_match("ECC3", Direction.L2R, conj, zipped) is not None
        assert try_match("ECC2", Direction.R2L, conj, zipped) is None

    def test_repeated_prefix_blocks_splitting(self, t):
        with pytest.raises(AxiomMismatch) as e:
            match_axiom("ECC3", Direction.L2R, t("a.0 [] a.0 /\\ a.b.0 [] a.0"),
                        t("a.(0 /\\ b.0) [] a.(0 /\\ 0)"))
        assert e.value.side_condition == "left sum must be injective in prefixes"

    def test_expansion(self, t):
        par = t("a.0 |[b]| (b.0 [] a.0)")
        rhs = expansion(par.left, par.right, par.sync)
        assert rhs == ExtChoice(ExtChoice(t("a.(0 |[b]| (b.0 [] a.0))"), t("a.(a.0 |[b]| 0)")), NIL)
        assert nary_arity("EXP1", par, rhs) == (1, 2)
        assert try_match("EXP2", Direction.L2R, rhs, par) is not None

    def test_expansion_synchronises_shared_actions(self, t):
        rhs = expansion(t("a.b.0"), t("a.0"), frozenset({a}))
        assert rhs == ExtChoice(ExtChoice(NIL, NIL), t("a.(b.0 |[a]| 0)"))

    def test_contraction_needs_basic_continuations(self, t):
        par = t("a.bot |[]| b.0")
        rhs = expansion(par.left, par.right, par.sync)
        assert try_match("EXP1", Direction.L2R, par, rhs) is not None
        with pytest.raises(AxiomMismatch) as e:
            match_axiom("EXP2", Direction.L2R, rhs, par)
        assert e.value.side_condition == "continuations must be basic terms"


EQUATIONAL_INSTANCES = [
    ("EC1", "a.0 [] b.0", "b.0 [] a.0"),
    ("EC2", "(a.0 [] b.0) [] c.0", "a.0 [] (b.0 [] c.0)"),
    ("EC5", "a.0 [] bot", "bot"),
    ("DI2", "a.0 \\/ (b.0 \\/ 0)", "a.0 \\/ b.0 \\/ 0"),
    ("DI4", "a.0 \\/ bot", "a.0"),
    ("CO2", "a.0 /\\ a.0", "a.0"),
    ("CO3", "a.0 /\\ bot", "bot"),
    ("PA2", "a.0 |[a]| bot", "bot"),
]


@pytest.mark.parametrize("name, lhs, rhs", EQUATIONAL_INSTANCES)
def test_equational_axioms_are_symmetric(t, name, lhs, rhs):
    assert SCHEMAS[name].equational
    assert try_match(name, Direction.L2R, t(lhs), t(rhs)) is not None
    assert try_match(name, Direction.R2L, t(rhs), t(lhs)) is not None


class TestCheckProof:
    def test_reflexivity(self, t):
        verdict = check_proof(refl(t("a.0")))
        assert verdict.accepted and verdict.lhs == verdict.rhs == t("a.0")

    def test_transitive_chain(self, t):
        pf = trans(axiom("DI5", t("a.0"), t("a.0 \\/ b.0")), axiom("DI1", t("a.0 \\/ b.0"), t("b.0 \\/ a.0")))
        verdict = check_proof(pf)
        assert verdict
        assert (verdict.lhs, verdict.rhs) == (t("a.0"), t("b.0 \\/ a.0"))

    def test_context_must_rebuild_both_sides(self, t):
        pf = Context(t("a.0"), t("a.bot"), operator=Operator(Prefix, action=a), premises=(refl(NIL),))
        verdict = check_proof(pf)
        assert not verdict
        assert verdict.path == ()
        assert "right side" in verdict.reason

    def test_context_premise_count(self, t):
        pf = Context(t("a.0 [] b.0"), t("a.0 [] b.0"), operator=Operator(ExtChoice), premises=(refl(t("a.0")),))
        assert "premise" in check_proof(pf).reason

    def test_first_bad_node_is_located(self, t):
        good = axiom("DI5", t("a.0"), t("a.0 \\/ b.0"))
        bad = axiom("DI1", t("a.0 \\/ b.0"), t("a.0 \\/ b.0"))
        verdict = check_proof(Trans(t("a.0"), t("a.0 \\/ b.0"), left=good, right=bad))
        assert not verdict
        assert verdict.path == (1,)
        assert verdict.reason.startswith("DI1")

    def test_side_condition_is_reported(self, t):
        pf = axiom("DS4", t("a.(bot \\/ 0)"), t("a.bot [] a.0"))
        assert "side condition" in check_proof(pf).reason

    def test_transitivity_needs_a_common_middle(self, t):
        left = axiom("DI5", t("a.0"), t("a.0 \\/ b.0"))
        right = refl(t("a.0 \\/ c.0"))
        pf = Trans(t("a.0"), t("a.0 \\/ c.0"), left=left, right=right)
        assert check_proof(pf).reason == "TRANS: premises do not compose"

    def test_reflexivity_claims_one_term(self, t):
        assert not check_proof(Refl(t("a.0"), t("b.0")))


class TestDerivedLemmas:
    @given(terms(max_leaves=4))
    def test_bottom_is_least(self, p):
        pf = bottom_leq(p)
        assert check_proof(pf)
        assert (pf.lhs, pf.rhs) == (BOTTOM, p)

    @given(st.lists(small_terms, min_size=1, max_size=4), st.data())
    def test_each_disjunct_is_below_the_disjunction(self, items, data):
        index = data.draw(st.integers(0, len(items) - 1))
        pf = disjunct_leq(items, index)
        assert check_proof(pf)
        assert (pf.lhs, pf.rhs) == (items[index], fold_disj(items))

    @given(small_terms, small_terms, SYNC)
    def test_commutation(self, p, q, sync):
        for whole in (ExtChoice(p, q), Disj(p, q), Conj(p, q), Par(p, q, sync)):
            eq = commute(whole)
            assert check_proof(eq.fwd) and check_proof(eq.bwd)
            assert eq.rhs == operator_of(whole).apply([q, p])

    @given(undivided, undivided, undivided, undivided)
    def test_distribution_over_both_operands(self, p, q, r, s):
        eq = distribute_all(Conj(Disj(p, q), Disj(r, s)))
        assert eq.rhs == Disj(Disj(Conj(p, r), Conj(q, r)), Disj(Conj(p, s), Conj(q, s)))
        assert check_proof(eq.fwd) and check_proof(eq.bwd)

    @given(VISIBLE, basic_terms, basic_terms)
    def test_merging_equal_prefixes(self, action, x, y):
        eq = merge_prefixes(action, x, y)
        assert (eq.lhs, eq.rhs) == (ExtChoice(Prefix(action, x), Prefix(action, y)), Prefix(action, Disj(x, y)))
        assert check_proof(eq.fwd) and check_proof(eq.bwd)

    @given(guarded_sums(body=terms(max_leaves=2, basic=True)), guarded_sums(body=terms(max_leaves=2, basic=True)),
           SYNC)
    def test_expansion_lemma(self, s1, s2, sync):
        eq = expand(Par(s1, s2, sync))
        assert eq.rhs == expansion(s1, s2, sync)
        assert check_proof(eq.fwd) and check_proof(eq.bwd)

    def test_unit_axiom_as_equation(self, t):
        eq = by_axiom("EC4", t("a.0 [] 0"), t("a.0"))
        assert eq.fwd.direction is Direction.L2R and eq.bwd.direction is Direction.R2L


class TestReorder:
    def test_rotation(self, t):
        eq = reorder_proof(t("a.0 [] b.0 [] c.0"), t("c.0 [] (a.0 [] b.0)"))
        assert (eq.lhs, eq.rhs) == (t("a.0 [] b.0 [] c.0"), t("c.0 [] (a.0 [] b.0)"))
        assert check_proof(eq.fwd) and check_proof(eq.bwd)

    def test_identical_terms(self, t):
        assert reorder_proof(t("a.0"), t("a.0")).is_trivial

    def test_different_operands(self, t):
        assert reorder_proof(t("a.0 [] b.0"), t("a.0 [] c.0")) is None
        assert reorder_proof(t("a.0 [] a.0"), t("a.0")) is None
        assert reorder_proof(t("a.0 [] b.0"), t("a.0 \\/ b.0")) is None

    @given(st.lists(small_terms, min_size=2, max_size=5), st.randoms(use_true_random=False),
           st.sampled_from([fold_choice, fold_disj]))
    def test_any_permutation(self, items, rng, fold):
        shuffled = list(items)
        rng.shuffle(shuffled)
        src, dst = fold(items), fold(shuffled)
        eq = reorder_proof(src, dst)
        assert (eq.lhs, eq.rhs) == (src, dst)
        assert check_proof(eq.fwd) and check_proof(eq.bwd)


class TestProofDocuments:
    def test_encoding(self, t):
        pf = trans(axiom("DI5", t("a.0"), t("a.0 \\/ b.0")), axiom("DI1", t("a.0 \\/ b.0"), t("b.0 \\/ a.0")))
        doc = json.loads(proof_to_json(pf))
        assert doc["root"] == 0
        root = doc["nodes"][0]
        assert (root["rule"], root["claimLhs"], root["claimRhs"]) == ("TRANS", "a.0", "b.0 \\/ a.0")
        assert doc["nodes"][1] == {"id": 1, "rule": "AXIOM", "axiom": "DI5", "direction": "L2R",
                                   "claimLhs": "a.0", "claimRhs": "a.0 \\/ b.0", "children": []}

    def test_decoding_keeps_the_claim(self, t):
        eq = merge_prefixes(a, t("b.0"), NIL)
        pf = proof_from_json(proof_to_json(eq.fwd))
        assert (pf.lhs, pf.rhs) == (eq.lhs, eq.rhs)
        assert check_proof(pf)

    def test_shared_subproofs_stay_shared(self, t):
        step = axiom("EC4", t("a.0 [] 0"), t("a.0"))
        pf = Context(t("(a.0 [] 0) \\/ (a.0 [] 0)"), t("a.0 \\/ a.0"), operator=Operator(Disj),
                     premises=(step, step))
        assert proof_size(pf) == (2, 3)
        assert len(json.loads(proof_to_json(pf))["nodes"]) == 2
        assert check_proof(proof_from_json(proof_to_json(pf)))

    def test_nary_arity_is_encoded(self, t):
        pf = AxiomStep(t("a.0 /\\ b.0"), BOTTOM, name="ECC1", arity=(1, 1))
        back = proof_from_json(proof_to_json(pf))
        assert back.arity == (1, 1)
        assert check_proof(back)

    def test_context_operators(self, t):
        pf = Context(t("a.(0 [] 0) |[a,b]| c.0"), t("a.0 |[a,b]| c.0"), operator=Operator(Par, sync=frozenset({a, b})),
                     premises=(Context(t("a.(0 [] 0)"), t("a.0"), operator=Operator(Prefix, action=a),
                                       premises=(axiom("EC4", t("0 [] 0"), NIL),)), refl(t("c.0"))))
        doc = json.loads(proof_to_json(pf))
        assert [n.get("operator") for n in doc["nodes"]] == ["|[a,b]|", "a.", None, None]
        assert check_proof(proof_from_json(proof_to_json(pf)))

    def test_equation_document(self, t):
        eq = commute(t("a.0 [] b.0"))
        doc = json.loads(equation_to_json(eq.fwd, eq.bwd))
        assert (doc["lhs"], doc["rhs"]) == ("a.0 [] b.0", "b.0 [] a.0")
        proofs = proofs_from_json(equation_to_json(eq.fwd, eq.bwd))
        assert [(p.lhs, p.rhs) for p in proofs] == [(eq.lhs, eq.rhs), (eq.rhs, eq.lhs)]
        assert len(proofs_from_json(proof_to_json(eq.fwd))) == 1

    def test_cycles_are_rejected(self):
        node = {"rule": "TRANS", "claimLhs": "0", "claimRhs": "0"}
        doc = {"root": 0, "nodes": [{"id": 0, "children": [1, 1], **node}, {"id": 1, "children": [0, 0], **node}]}
        with pytest.raises(ProofFormatError, match="cycle"):
            proof_from_json(json.dumps(doc))

    @pytest.mark.parametrize("doc, message", [
        ({"root": 3, "nodes": [{"id": 0, "rule": "REF", "claimLhs": "0", "claimRhs": "0"}]}, "unknown node"),
        ({"root": 0, "nodes": [{"id": 0, "rule": "REF", "claimLhs": "a.", "claimRhs": "0"}]}, "does not parse"),
        ({"root": 0, "nodes": [{"id": 0, "rule": "MAGIC", "claimLhs": "0", "claimRhs": "0"}]}, "unknown rule"),
        ({"root": 0, "nodes": [{"id": 0, "rule": "AXIOM", "claimLhs": "0", "claimRhs": "0"}]}, "without axiom"),
        ({"root": 0, "nodes": [{"id": 0, "rule": "CONTEXT", "operator": "%", "claimLhs": "0", "claimRhs": "0"}]},
         "unknown operator"),
        ({"root": 0}, "malformed"),
    ])
    def test_malformed_documents(self, doc, message):
        with pytest.raises(ProofFormatError, match=message):
            proof_from_json(json.dumps(doc))
