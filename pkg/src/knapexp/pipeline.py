"""Two-part approximation pipeline for offline query minimization.

Part one picks a near-optimal packing using few non-trivial items; part two
queries every item whose upper limit alone exceeds the threshold D and then
solves the prefix problem on the partially queried instance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Optional

from . import engines
from .errors import CapacityError, ParameterError
from .model import Instance, parse_rational, profit
from .prefix import PrefixProblem, solve_prefix_lp, solve_prefix_optimal

MODES = ("pseudopolynomial", "polynomial")
_MODE_ALIASES = {"pseudo": "pseudopolynomial", "poly": "polynomial"}
SQRT_DENOMINATOR = 10**6


def _mode(name: str) -> str:
    name = _MODE_ALIASES.get(name, name)
    if name not in MODES:
        raise ParameterError(f"unknown mode {name!r}; expected one of {MODES}")
    return name


def _open_unit(eps) -> Fraction:
    eps = parse_rational(eps)
    if not 0 < eps < 1:
        raise ParameterError(f"epsilon = {eps} must lie strictly between 0 and 1")
    return eps


@dataclass(frozen=True)
class PipelineParams:
    epsilon: Fraction
    mode: str = "pseudopolynomial"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "epsilon", _open_unit(self.epsilon))
        object.__setattr__(self, "mode", _mode(self.mode))

    @property
    def inner_epsilon(self) -> Fraction:
        """epsilon / (epsilon + 1), used for the packing step."""
        return self.epsilon / (self.epsilon + 1)

    @property
    def alpha(self) -> Fraction:
        return 1 / (1 - self.epsilon)

    @property
    def beta(self) -> Fraction:
        factor = 2 if self.mode == "pseudopolynomial" else 4
        return factor * (1 + self.epsilon)


@dataclass(frozen=True)
class PipelineResult:
    query_set: frozenset
    packing: frozenset
    D: Fraction
    alpha_achieved: Fraction
    beta_achieved: Optional[Fraction]
    components: dict = field(default_factory=dict)


def sqrt_slack(eps) -> Fraction:
    """Largest k / 10^6 not exceeding 1 - sqrt(1 - eps)."""
    eps = _open_unit(eps)
    N = SQRT_DENOMINATOR
    target = (1 - eps) * N * N
    c = -(-target.numerator // target.denominator)     # ceil
    t = isqrt(c)
    if t * t < c:
        t += 1
    return Fraction(N - t, N)


def _best_by_count_enum(instance: Instance) -> list:
    """``[(value, witness)]`` for non-trivial limits 0..n by enumeration."""
    best = {}
    ids = [it.id for it in instance.items]
    nt = [0 if it.trivial else 1 for it in instance.items]
    prof = instance.profits()
    for mask, _ in engines.packing_masks([it.weight for it in instance.items], instance.capacity):
        members = tuple(ids[j] for j in range(instance.n) if mask >> j & 1)
        cnt = sum(nt[i - 1] for i in members)
        val = sum((prof[i - 1] for i in members), Fraction(0))
        cur = best.get(cnt)
        if cur is None or (val, tuple(-i for i in members)) > (cur[0], tuple(-i for i in cur[1])):
            best[cnt] = (val, members)
    out, run = [], (Fraction(-1), ())
    for limit in range(instance.n + 1):
        if limit in best and best[limit][0] > run[0]:
            run = best[limit]
        out.append((run[0], frozenset(run[1])))
    return out


def select_packing(instance: Instance, epsilon, *,
                   capacity_cap: int = engines.DEFAULT_CAPACITY_CAP) -> tuple:
    """Packing with profit >= (1 - eps) p* and at most |Q*| non-trivial items.

    Returns ``(packing, l_star)`` where ``l_star`` is the smallest
    non-trivial budget whose optimum reaches ``(1 - eps'') p'_n``.
    """
    eps = _open_unit(epsilon)
    if instance.n == 0:
        return frozenset(), 0
    slack = sqrt_slack(eps)
    if instance.capacity <= capacity_cap:
        table = engines.knapsack_opt_2d_all(instance, capacity_cap=capacity_cap)
    elif instance.n <= engines.DEFAULT_ENUMERATION_CAP:
        table = _best_by_count_enum(instance)
    else:
        raise CapacityError(
            f"capacity {instance.capacity} exceeds the DP cap {capacity_cap} and "
            f"{instance.n} items exceed the enumeration cap", cap=capacity_cap)
    top = table[instance.n][0]
    for limit in range(instance.n + 1):
        if table[limit][0] >= (1 - slack) * top:
            return table[limit][1], limit
    raise AssertionError("the full budget always qualifies")  # pragma: no cover


def run_pipeline(instance: Instance, params: PipelineParams, *,
                 capacity_cap: int = engines.DEFAULT_CAPACITY_CAP) -> PipelineResult:
    """Query set that is (1/(1-eps), beta)-feasible with |Q| <= 2 |Q*|.

    beta is 2(1+eps) in pseudopolynomial mode and 4(1+eps) in polynomial
    mode.  The input instance is never modified.
    """
    inner = params.inner_epsilon
    packing, _ = select_packing(instance, inner, capacity_cap=capacity_cap)
    D = profit(instance, packing) / (1 - inner)
    from_packing = packing - instance.trivial_ids
    from_threshold = frozenset(it.id for it in instance.items if it.upper > D) - from_packing
    first = from_packing | from_threshold
    replaced = instance.with_queried(first)
    problem = PrefixProblem(replaced, D)
    if params.mode == "pseudopolynomial":
        try:
            from_prefix = solve_prefix_optimal(problem, workers=params.workers,
                                               capacity_cap=capacity_cap)
        except CapacityError as exc:
            raise CapacityError(f"{exc}; rerun in polynomial mode", cap=exc.cap) from None
    else:
        from_prefix = solve_prefix_lp(problem, workers=params.workers, capacity_cap=capacity_cap)
    query_set = first | from_prefix

    p_star = engines.optimum(instance, capacity_cap=capacity_cap)[0]
    u_star = engines.optimum(instance, instance.uppers_after(query_set), capacity_cap=capacity_cap)[0]
    got = profit(instance, packing)
    alpha = p_star / got if got > 0 else Fraction(1)
    if p_star > 0:
        beta = u_star / p_star
    else:
        beta = Fraction(1) if u_star == 0 else None
    return PipelineResult(
        query_set=query_set, packing=packing, D=D, alpha_achieved=alpha, beta_achieved=beta,
        components={"from_packing": from_packing, "from_threshold": from_threshold,
                    "from_prefix": from_prefix})
