from fractions import Fraction
from math import sqrt

import pytest
from hypothesis import given, strategies as st

from knapexp.errors import ParameterError
from knapexp.model import Instance, profit, random_instance
from knapexp.pipeline import PipelineParams, run_pipeline, select_packing, sqrt_slack
from knapexp.prefix import prefix_upper
from knapexp.verify import brute_force_optimal_query_set, check_alpha_beta_feasible

from conftest import instances
from helpers import all_packings, brute_p_star


@pytest.mark.parametrize("eps", ["1/100", "1/5", "1/4", "1/2", "99/100"])
def test_sqrt_slack_rounds_down(eps):
    e = Fraction(eps)
    s = sqrt_slack(e)
    assert s.denominator <= 10**6
    exact = 1 - sqrt(1 - float(e))
    assert s <= Fraction(exact) + Fraction(1, 10**12)
    assert s + Fraction(1, 10**6) > Fraction(exact) - Fraction(1, 10**12)
    assert (1 - s) ** 2 >= 1 - e


@given(st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(999, 1000)))
def test_sqrt_slack_squares_back(e):
    s = sqrt_slack(e)
    assert 0 <= s and (1 - s) ** 2 >= 1 - e
    assert (1 - s - Fraction(1, 10**6)) ** 2 < 1 - e


def test_params_validation():
    p = PipelineParams(Fraction(1, 4))
    assert p.alpha == Fraction(4, 3) and p.beta == Fraction(5, 2)
    assert p.inner_epsilon == Fraction(1, 5)
    assert PipelineParams("1/4", mode="poly").beta == 5
    assert PipelineParams("1/4", mode="pseudo").mode == "pseudopolynomial"
    for bad in (0, 1, "3/2", -1):
        with pytest.raises(ParameterError):
            PipelineParams(bad)
    with pytest.raises(ParameterError):
        PipelineParams("1/4", mode="exact")


def test_select_packing_prefers_trivial_items():
    inst = Instance.build(10, [(10, 10, None, 10), (10, 11, 0, 20)])
    packing, limit = select_packing(inst, Fraction(1, 5))
    assert packing == {1} and limit == 0
    packing, _ = select_packing(inst, Fraction(1, 100))
    assert packing == {2}


def test_select_packing_needs_nontrivial_budget():
    inst = Instance.build(6, [(3, 5, 0, 9), (3, 5, 0, 9), (3, 1, None, 1)])
    packing, limit = select_packing(inst, Fraction(1, 10))
    assert packing == {1, 2} and limit == 2


def test_select_packing_guarantees():
    for seed in range(30):
        inst = random_instance(8, 14, seed=seed)
        eps = Fraction(1, 5)
        packing, _ = select_packing(inst, eps)
        p_star = brute_p_star(inst)
        assert inst.is_packing(packing)
        assert profit(inst, packing) >= (1 - eps) * p_star
        q_star = brute_force_optimal_query_set(inst)
        assert len(packing - inst.trivial_ids) <= len(q_star)


def test_all_trivial_instance_needs_no_queries():
    inst = Instance.build(7, [(3, 4, None, 4), (4, 2, None, 2), (5, 6, None, 6)])
    res = run_pipeline(inst, PipelineParams(Fraction(1, 4)))
    assert res.query_set == frozenset()
    assert res.alpha_achieved == 1 and res.beta_achieved == 1


def test_threshold_items_are_needed():
    inst = Instance.build(10, [(10, 10, None, 10), (10, 1, 0, 100)])
    params = PipelineParams(Fraction(1, 4))
    res = run_pipeline(inst, params)
    assert res.D == Fraction(25, 2)
    assert res.components["from_threshold"] == {2}
    assert res.components["from_packing"] == frozenset()
    assert check_alpha_beta_feasible(inst, res.query_set, params.alpha, params.beta).feasible
    assert not check_alpha_beta_feasible(inst, res.query_set - {2}, params.alpha, params.beta).feasible


@pytest.mark.parametrize("mode", ["pseudopolynomial", "polynomial"])
def test_pipeline_components(mode):
    params = PipelineParams(Fraction(1, 4), mode=mode)
    for seed in range(25):
        inst = random_instance(8, 14, seed=500 + seed)
        res = run_pipeline(inst, params)
        c = res.components
        assert res.query_set == c["from_packing"] | c["from_threshold"] | c["from_prefix"]
        assert not c["from_packing"] & c["from_threshold"]
        assert res.query_set <= inst.nontrivial_ids
        assert res.D >= brute_p_star(inst)
        assert all(it.upper <= res.D for it in inst.items if it.id not in c["from_packing"] | c["from_threshold"])
        replaced = inst.with_queried(c["from_packing"] | c["from_threshold"])
        limit = res.D if mode == "pseudopolynomial" else 3 * res.D
        assert prefix_upper(replaced, c["from_prefix"]) <= limit
        assert check_alpha_beta_feasible(inst, res.query_set, params.alpha, params.beta).feasible
        assert res.alpha_achieved <= params.alpha and res.beta_achieved <= params.beta


def test_input_instance_untouched():
    inst = random_instance(7, 10, seed=12)
    before = repr(inst)
    run_pipeline(inst, PipelineParams(Fraction(1, 3)))
    assert repr(inst) == before


@given(instances(max_n=6), st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1, 10)]))
def test_pipeline_is_relaxed_feasible(inst, eps):
    params = PipelineParams(eps)
    res = run_pipeline(inst, params)
    assert check_alpha_beta_feasible(inst, res.query_set, params.alpha, params.beta).feasible
    assert all(inst.is_packing(res.packing) for _ in [0])
    assert len(res.query_set) <= 2 * len(brute_force_optimal_query_set(inst))
