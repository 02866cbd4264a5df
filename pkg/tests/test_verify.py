import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from knapexp.errors import EnumerationCapError, ParameterError
from knapexp.model import Instance, random_instance
from knapexp.reductions import reduce_knapsack_decision
from knapexp.verify import (brute_force_optimal_query_set, brute_force_prefix_opt,
                            check_alpha_beta_feasible, check_by_enumeration, check_feasible)

from conftest import instances
from helpers import brute_feasible, minimal_query_sets


def test_querying_everything_is_feasible():
    inst = random_instance(8, 10, seed=3)
    report = check_feasible(inst, inst.ids)
    assert report.feasible and report.violating_packing is None
    assert report.witness_packing is not None


def test_single_wide_item_is_infeasible_until_queried():
    inst = Instance.build(4, [(4, 2, 1, 9)])
    report = check_feasible(inst, ())
    assert not report.feasible and report.violating_packing == {1}
    assert report.max_upper_after == 9 and report.p_star == 2
    assert check_feasible(inst, {1}).feasible


@given(instances(), st.data())
def test_report_invariants(inst, data):
    q = frozenset(data.draw(st.sets(st.sampled_from(list(inst.ids)))) if inst.n else set())
    r = check_feasible(inst, q)
    assert r.feasible == (r.witness_packing is not None and r.violating_packing is None)
    assert r.feasible == (r.max_upper_after <= r.p_star)


def test_random_eight_item_instances_match_covering_constraints():
    rng = random.Random(11)
    for seed in range(40):
        inst = random_instance(8, 12, seed=seed)
        q = frozenset(i for i in inst.ids if rng.random() < 0.5)
        want = brute_feasible(inst, q)
        assert check_feasible(inst, q).feasible == want
        assert check_by_enumeration(inst, q) == want


@given(instances(max_n=6), st.data(), st.sampled_from([(1, 1), (Fraction(4, 3), Fraction(5, 2)), (2, 1), (1, 3)]))
def test_alpha_beta_matches_brute_force(inst, data, ab):
    q = frozenset(data.draw(st.sets(st.sampled_from(list(inst.ids)))) if inst.n else set())
    alpha, beta = ab
    want = brute_feasible(inst, q, alpha, beta)
    assert check_alpha_beta_feasible(inst, q, alpha, beta).feasible == want
    assert check_by_enumeration(inst, q, alpha, beta) == want


@given(instances(max_n=6), st.data())
def test_exact_feasibility_implies_relaxed(inst, data):
    q = frozenset(data.draw(st.sets(st.sampled_from(list(inst.ids)))) if inst.n else set())
    if check_feasible(inst, q).feasible:
        assert check_alpha_beta_feasible(inst, q, 3, Fraction(7, 5)).feasible


def test_unit_factors_agree_with_exact_check():
    for seed in range(15):
        inst = random_instance(7, 9, seed=seed)
        for q in (frozenset(), inst.nontrivial_ids, frozenset(list(inst.nontrivial_ids)[:1])):
            assert check_alpha_beta_feasible(inst, q, 1, 1).feasible == check_feasible(inst, q).feasible


def test_factors_below_one_rejected():
    inst = random_instance(3, 5, seed=0)
    with pytest.raises(ParameterError):
        check_alpha_beta_feasible(inst, (), Fraction(1, 2), 1)
    with pytest.raises(ParameterError):
        brute_force_optimal_query_set(inst, 1, Fraction(9, 10))


def test_knapsack_decision_examples():
    base = Instance.build(6, [(3, 4, None, 4), (4, 5, None, 5), (3, 2, None, 2)])   # p* = 6
    yes = reduce_knapsack_decision(base, 6, 2, Fraction(3, 2))
    assert check_alpha_beta_feasible(yes, (), 2, Fraction(3, 2)).feasible
    no = reduce_knapsack_decision(base, 7, 2, Fraction(3, 2))
    r = check_alpha_beta_feasible(no, (), 2, Fraction(3, 2))
    assert not r.feasible and r.violating_packing == {4}


def test_optimal_query_set_examples():
    trivial = Instance.build(5, [(2, 3, None, 3), (3, 1, None, 1)])
    assert brute_force_optimal_query_set(trivial) == frozenset()
    wide = Instance.build(4, [(4, 2, 1, 9), (1, 1, None, 1)])
    assert brute_force_optimal_query_set(wide) == {1}


def test_optimal_query_set_against_second_enumerator():
    for seed in range(25):
        inst = random_instance(2 + seed % 7, 12, seed=100 + seed)
        got = brute_force_optimal_query_set(inst)
        size, all_min = minimal_query_sets(inst)
        assert len(got) == size and got in all_min
        assert got == min(all_min, key=lambda s: tuple(sorted(s)))


def test_relaxed_optimum_never_larger():
    for seed in range(20):
        inst = random_instance(7, 12, seed=200 + seed)
        exact = brute_force_optimal_query_set(inst)
        for ab in ((Fraction(4, 3), Fraction(5, 2)), (2, 1), (1, 2)):
            assert len(brute_force_optimal_query_set(inst, *ab)) <= len(exact)


def test_oracle_cap():
    inst = random_instance(20, 5, seed=1, trivial_prob=0.0)
    with pytest.raises(EnumerationCapError):
        brute_force_optimal_query_set(inst, cap=16)


def test_prefix_oracle():
    inst = random_instance(6, 10, seed=4)
    from knapexp.prefix import prefix_upper
    top = prefix_upper(inst, ())
    p_star = check_feasible(inst, ()).p_star
    assert brute_force_prefix_opt(inst, max(top, p_star)) == frozenset()
    with pytest.raises(ParameterError):
        brute_force_prefix_opt(inst, p_star - 1)
    q = brute_force_prefix_opt(inst, p_star)
    assert prefix_upper(inst, q) <= p_star
    # exhaustive minimality: no smaller subset works
    from helpers import all_subsets
    assert all(prefix_upper(inst, s) > p_star for s in all_subsets(inst.nontrivial_ids) if len(s) < len(q))
