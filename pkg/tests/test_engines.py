from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from knapexp import engines
from knapexp.errors import CapacityError, EnumerationCapError
from knapexp.model import Instance, random_instance

from conftest import instances
from helpers import all_packings, profits, total


def brute(instance, values):
    return max(total(values, s) for s in all_packings(instance))


@given(instances())
def test_knapsack_opt_matches_enumeration(inst):
    value, witness = engines.knapsack_opt(inst)
    assert value == brute(inst, profits(inst))
    assert inst.is_packing(witness) and total(profits(inst), witness) == value


@given(instances())
def test_split_engine_matches_dp(inst):
    assert engines.knapsack_opt_split(inst)[0] == engines.knapsack_opt(inst)[0]


@given(instances(), st.integers(0, 7))
def test_2d_matches_enumeration(inst, limit):
    limit = min(limit, inst.n)
    p = profits(inst)
    want = max(total(p, s) for s in all_packings(inst) if len(s & inst.nontrivial_ids) <= limit)
    value, witness = engines.knapsack_opt_2d(inst, None, limit)
    assert value == want and len(witness & inst.nontrivial_ids) <= limit
    assert engines.knapsack_opt_2d_all(inst)[limit][0] == want


@given(instances())
def test_witness_prefers_fewest_nontrivial_then_lexicographic(inst):
    value, witness = engines.knapsack_opt(inst)
    p = profits(inst)
    optimal = [s for s in all_packings(inst) if total(p, s) == value]
    best = min(optimal, key=lambda s: (len(s & inst.nontrivial_ids), tuple(sorted(s))))
    assert witness == best


@given(instances())
def test_enumerate_packings_is_exact(inst):
    got = list(engines.enumerate_packings(inst))
    assert len(got) == len(set(got))
    assert set(got) == set(all_packings(inst))


def test_max_upper_limit_after_query():
    inst = Instance.build(5, [(5, 2, 1, 9), (3, 1, None, 1), (2, 1, None, 1)])
    assert engines.max_upper_limit(inst) == 9
    assert engines.max_upper_limit(inst, {1}) == 2


def test_empty_instance():
    inst = Instance((), 4)
    assert engines.knapsack_opt(inst) == (0, frozenset())
    assert engines.knapsack_opt_2d_all(inst) == [(0, frozenset())]


def test_caps_refuse():
    inst = Instance.build(10**7, [(10**7, 1, None, 1)])
    with pytest.raises(CapacityError):
        engines.knapsack_opt(inst)
    assert engines.optimum(inst)[0] == 1  # falls back to the split engine
    with pytest.raises(EnumerationCapError):
        list(engines.enumerate_packings(random_instance(12, 5, seed=1), cap=10))


def test_custom_profit_vector_validated():
    inst = Instance.build(4, [(2, 1, None, 1)])
    with pytest.raises(Exception):
        engines.knapsack_opt(inst, [1, 2])
    assert engines.knapsack_opt(inst, [Fraction(7, 3)])[0] == Fraction(7, 3)
