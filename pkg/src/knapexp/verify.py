"""Feasibility checks and brute-force query-set oracles.

A query set Q is feasible when no packing can still beat p* after Q is
queried, i.e. U*(Q) <= p*.  The (alpha, beta) relaxation asks for a packing
inside Q plus the trivial items worth at least p*/alpha and caps every
post-query upper limit at beta * p*.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional

from . import engines
from .errors import EnumerationCapError, ParameterError
from .model import Instance, parse_rational

DEFAULT_QUERY_CAP = 16


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    p_star: Fraction
    witness_packing: Optional[frozenset]
    violating_packing: Optional[frozenset]
    max_upper_after: Fraction
    certified_profit: Fraction


class _Checker:
    """Caches p* so that repeated checks on one instance stay cheap."""

    def __init__(self, instance: Instance, capacity_cap: int = engines.DEFAULT_CAPACITY_CAP):
        self.instance = instance
        self.cap = capacity_cap
        self.p_star, self.opt_packing = engines.optimum(instance, capacity_cap=capacity_cap)

    def certified(self, q: frozenset) -> tuple:
        """Best packing using only Q and trivial items."""
        inst = self.instance
        keep = sorted(q | inst.trivial_ids)
        sub, ids = inst.restricted(keep)
        value, packing = engines.optimum(sub, capacity_cap=self.cap)
        return value, frozenset(ids[i - 1] for i in packing)

    def upper(self, q: frozenset) -> tuple:
        return engines.optimum(self.instance, self.instance.uppers_after(q), capacity_cap=self.cap)

    def check(self, q: frozenset, alpha: Fraction, beta: Fraction) -> FeasibilityReport:
        p = self.p_star
        u_star, u_packing = self.upper(q)
        cond2 = u_star <= beta * p
        value, packing = self.certified(q)
        cond1 = value * alpha >= p
        return FeasibilityReport(
            feasible=cond1 and cond2, p_star=p,
            witness_packing=packing if cond1 else None,
            violating_packing=None if cond2 else u_packing,
            max_upper_after=u_star, certified_profit=value)

    def feasible_only(self, q: frozenset, alpha: Fraction, beta: Fraction) -> bool:
        u_star = self.upper(q)[0]
        if u_star > beta * self.p_star:
            return False
        if alpha == 1 and beta == 1:
            return True
        return self.certified(q)[0] * alpha >= self.p_star


def _factors(alpha, beta) -> tuple:
    alpha, beta = parse_rational(alpha), parse_rational(beta)
    if alpha < 1 or beta < 1:
        raise ParameterError(f"alpha = {alpha} and beta = {beta} must both be >= 1")
    return alpha, beta


def check_feasible(instance: Instance, query_set=(), *,
                   capacity_cap: int = engines.DEFAULT_CAPACITY_CAP) -> FeasibilityReport:
    """Exact feasibility of Q: feasible iff U*(Q) <= p*."""
    q = instance.ids_of(query_set)
    report = _Checker(instance, capacity_cap).check(q, Fraction(1), Fraction(1))
    # the upper-limit condition implies the certification condition
    assert not report.feasible or report.witness_packing is not None
    return report


def check_alpha_beta_feasible(instance: Instance, query_set, alpha, beta, *,
                              capacity_cap: int = engines.DEFAULT_CAPACITY_CAP) -> FeasibilityReport:
    """Both relaxed conditions, checked independently."""
    alpha, beta = _factors(alpha, beta)
    q = instance.ids_of(query_set)
    return _Checker(instance, capacity_cap).check(q, alpha, beta)


def check_by_enumeration(instance: Instance, query_set=(), alpha=1, beta=1, *,
                         cap: int = engines.DEFAULT_ENUMERATION_CAP) -> bool:
    """Same verdict as :func:`check_alpha_beta_feasible`, from the covering
    constraints ``sum_{i in P cap Q} (U_i - p_i) >= U_P - beta p*`` over every
    packing P."""
    alpha, beta = _factors(alpha, beta)
    q = instance.ids_of(query_set)
    packings = list(engines.enumerate_packings(instance, cap=cap))
    profits = {it.id: it.profit for it in instance.items}
    uppers = {it.id: it.upper for it in instance.items}
    p_star = max(sum((profits[i] for i in P), Fraction(0)) for P in packings)
    allowed = q | instance.trivial_ids
    best_inside = max(sum((profits[i] for i in P), Fraction(0)) for P in packings if P <= allowed)
    if best_inside * alpha < p_star:
        return False
    for P in packings:
        gain = sum((uppers[i] - profits[i] for i in P & q), Fraction(0))
        if gain < sum((uppers[i] for i in P), Fraction(0)) - beta * p_star:
            return False
    return True


def brute_force_optimal_query_set(instance: Instance, alpha=1, beta=1, *,
                                  cap: int = DEFAULT_QUERY_CAP,
                                  capacity_cap: int = engines.DEFAULT_CAPACITY_CAP) -> frozenset:
    """Minimum-cardinality (alpha, beta)-feasible set of non-trivial items.

    Subsets are tried by increasing size in lexicographic order, so ties
    resolve to the lexicographically smallest sorted id tuple.
    """
    alpha, beta = _factors(alpha, beta)
    candidates = sorted(instance.nontrivial_ids)
    if len(candidates) > cap:
        raise EnumerationCapError(
            f"{len(candidates)} non-trivial items exceed the oracle cap {cap}", cap=cap)
    checker = _Checker(instance, capacity_cap)
    for size in range(len(candidates) + 1):
        for combo in combinations(candidates, size):
            if checker.feasible_only(frozenset(combo), alpha, beta):
                return frozenset(combo)
    raise AssertionError("querying every non-trivial item must be feasible")


def brute_force_prefix_opt(instance: Instance, threshold, *, cap: int = DEFAULT_QUERY_CAP,
                           capacity_cap: int = engines.DEFAULT_CAPACITY_CAP) -> frozenset:
    """Minimum-cardinality Q with U_{F(Q)}(Q) <= D, by exhaustive search."""
    from .prefix import prefix_upper

    D = parse_rational(threshold)
    p_star = engines.optimum(instance, capacity_cap=capacity_cap)[0]
    if D < p_star:
        raise ParameterError(f"threshold {D} is below p* = {p_star}")
    candidates = sorted(instance.nontrivial_ids)
    if len(candidates) > cap:
        raise EnumerationCapError(
            f"{len(candidates)} non-trivial items exceed the oracle cap {cap}", cap=cap)
    for size in range(len(candidates) + 1):
        for combo in combinations(candidates, size):
            if prefix_upper(instance, combo) <= D:
                return frozenset(combo)
    raise AssertionError("querying every item leaves the prefix at most p*")
