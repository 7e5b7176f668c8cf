import json

import pytest
from hypothesis import given, strategies as st

from calculus.syntax import parse
from calculus.terms import BOTTOM, NIL, Conj, Disj, ExtChoice, Par, Prefix, act
from refinement.simulation import (
    WitnessKind, check_refinement, is_stable_ready_simulation, largest_stable_sim, refines,
    replay_witness, rs_equiv, stably_simulates, uniform, witness_to_json,
)
from semantics.lts import build_lts, is_consistent
from tests.strategies import SYNC, small_terms, terms

a = act("a")


def sim_of(p, q):
    return largest_stable_sim(build_lts(parse(p)), build_lts(parse(q)))


class TestLargestStableSim:
    def test_identity(self):
        sim = sim_of("a.0", "a.0")
        assert (parse("a.0"), parse("a.0")) in sim
        assert (NIL, NIL) in sim

    def test_ready_sets_must_agree(self):
        sim = sim_of("a.0", "a.0 [] b.0")
        assert (parse("a.0"), parse("a.0 [] b.0")) not in sim
        assert sim.removed[(parse("a.0"), parse("a.0 [] b.0"))].kind is WitnessKind.READY_SET_MISMATCH

    def test_conjunction_below_its_conjunct(self):
        p, q = parse("a.b.0 /\\ a.(b.0 \\/ c.0)"), parse("a.b.0")
        sim = largest_stable_sim(build_lts(p), build_lts(q))
        assert p not in sim.left.inconsistent
        assert (p, q) in sim

    def test_inconsistent_left_states_are_always_related(self):
        sim = sim_of("a.bot", "b.0")
        assert (BOTTOM, parse("b.0")) in sim

    @given(small_terms, small_terms)
    def test_result_is_a_stable_ready_simulation(self, p, q):
        l1, l2 = build_lts(p), build_lts(q)
        assert is_stable_ready_simulation(largest_stable_sim(l1, l2).pairs, l1, l2)

    def test_checker_rejects_a_bad_relation(self):
        l1, l2 = build_lts(parse("a.0")), build_lts(parse("b.0"))
        assert not is_stable_ready_simulation({(parse("a.0"), parse("b.0"))}, l1, l2)


class TestRefines:
    @pytest.mark.parametrize("q", ["0", "a.0", "bot", "a.0 /\\ b.0"])
    def test_bottom_refines_everything(self, q):
        assert refines(BOTTOM, parse(q))

    def test_disjunct_refines_disjunction(self):
        assert refines(parse("a.0"), parse("a.0 \\/ b.0"))
        assert not refines(parse("a.0 \\/ b.0"), parse("a.0"))

    def test_prefix_does_not_distribute_over_inconsistent_disjunct(self):
        result = check_refinement(parse("a.(bot \\/ 0)"), parse("a.bot [] a.0"))
        assert not result.holds
        assert result.witness.kind is WitnessKind.NO_STABLE_MATCH

    def test_internal_choice_is_not_external_choice(self):
        p, q = parse("tau.(a.0 \\/ b.0)"), parse("tau.a.0 [] tau.b.0")
        result = check_refinement(p, q)
        assert not result.holds
        w = result.witness
        assert w.kind is WitnessKind.READY_SET_MISMATCH
        assert (w.left, w.right) == (parse("a.0"), parse("a.0 [] b.0"))
        assert replay_witness(w, build_lts(p), build_lts(q))

    def test_unmatched_step_witness(self):
        p, q = parse("a.b.0"), parse("a.c.0")
        w = check_refinement(p, q).witness
        assert w.kind is WitnessKind.UNMATCHED_WEAK_STEP
        assert w.action == a
        assert w.path[-1].target == parse("b.0")
        assert replay_witness(w, build_lts(p), build_lts(q))

    def test_witness_json(self):
        w = check_refinement(parse("tau.(a.0 \\/ b.0)"), parse("tau.a.0 [] tau.b.0")).witness
        doc = json.loads(witness_to_json(w))
        assert doc["kind"] == "ReadySetMismatch"
        assert doc["path"] == [{"from": "tau.(a.0 \\/ b.0)", "label": "eps", "to": "a.0"}]
        assert doc["detail"] == {"left": "a.0", "right": "a.0 [] b.0"}

    @given(small_terms, small_terms)
    def test_witnesses_replay(self, p, q):
        result = check_refinement(p, q)
        if not result.holds:
            assert replay_witness(result.witness, build_lts(p), build_lts(q), result.sim)

    @given(small_terms)
    def test_reflexive(self, p):
        assert refines(p, p)

    @given(small_terms, small_terms, small_terms)
    def test_transitive(self, p, q, r):
        if refines(p, q) and refines(q, r):
            assert refines(p, r)

    @given(small_terms)
    def test_inconsistency_means_refining_bottom(self, p):
        assert (not is_consistent(p)) == refines(p, BOTTOM)


class TestEquivalence:
    def test_tau_is_invisible(self):
        assert rs_equiv(parse("tau.a.0"), parse("a.0"))

    def test_different_actions(self):
        assert not rs_equiv(parse("a.0"), parse("b.0"))

    @given(small_terms, small_terms, SYNC)
    def test_commutativity(self, p, q, sync):
        assert rs_equiv(ExtChoice(p, q), ExtChoice(q, p))
        assert rs_equiv(Disj(p, q), Disj(q, p))
        assert rs_equiv(Conj(p, q), Conj(q, p))
        assert rs_equiv(Par(p, q, sync), Par(q, p, sync))

    @given(small_terms, small_terms)
    def test_absorption(self, p, q):
        assert rs_equiv(Conj(p, Disj(p, q)), p)
        assert rs_equiv(Disj(p, Conj(p, q)), p)

    @given(terms(max_leaves=2), terms(max_leaves=2), terms(max_leaves=2))
    def test_conjunction_is_a_meet(self, p, q, r):
        assert refines(p, Conj(q, r)) == (refines(p, q) and refines(p, r))


class TestStablePreorder:
    def test_stable_terms(self):
        assert stably_simulates(parse("a.0"), parse("a.0")).holds
        result = stably_simulates(parse("a.0"), parse("a.0 [] b.0"))
        assert not result.holds
        assert result.witness.kind is WitnessKind.READY_SET_MISMATCH

    def test_rejects_unstable_terms(self):
        with pytest.raises(ValueError):
            stably_simulates(parse("tau.a.0"), parse("a.0"))


class TestUniformity:
    def test_uniform(self):
        assert uniform(BOTTOM, parse("a.bot"))
        assert uniform(NIL, parse("a.0"))
        assert not uniform(NIL, BOTTOM)

    @given(small_terms, small_terms)
    def test_prefix_distributes_exactly_for_uniform_terms(self, p, q):
        left = Prefix(a, Disj(p, q))
        right = ExtChoice(Prefix(a, p), Prefix(a, q))
        assert refines(left, right) == uniform(p, q)

    @given(small_terms, small_terms, st.sampled_from(["tau", "a"]))
    def test_choice_of_prefixes_below_prefixed_disjunction(self, p, q, name):
        action = act(name)
        left = ExtChoice(Prefix(action, p), Prefix(action, q))
        right = Prefix(action, Disj(p, q))
        assert refines(left, right)
