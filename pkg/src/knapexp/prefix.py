"""Optimistic density orders, optimistic prefixes and the prefix problem.

The prefix problem asks for a smallest query set Q such that the greedy
prefix of the optimistic density order after querying Q has upper limit at
most a threshold D >= p*.  :func:`solve_prefix_optimal` solves it exactly by
guessing the boundary pair (i1, i2) of the optimal prefix; the subset of the
movable items S1 is chosen by a weight-indexed DP.  :func:`solve_prefix_lp`
swaps that DP for an LP relaxation whose basic optimum has at most two
fractional coordinates.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from . import engines
from .errors import CapacityError, ParameterError
from .model import Instance, common_denominator, parse_rational

VERTEX_ORACLE_CAP = 12


@dataclass(frozen=True)
class DensityOrder:
    ids: tuple
    densities: dict

    def position(self, i: int) -> int:
        return self.ids.index(i)


@dataclass(frozen=True)
class Prefix:
    members: tuple
    weight: int
    upper_after: Fraction


@dataclass(frozen=True)
class GuessContext:
    """One guess of the boundary pair and the induced item partition."""

    i1: int
    i2: int
    i1_queried: bool
    i2_queried: bool
    A: frozenset
    R1: frozenset
    R2: frozenset
    S1: frozenset
    S2: frozenset
    K: int
    H: int
    n1: Optional[int] = None
    n2: Optional[int] = None


@dataclass(frozen=True)
class PrefixProblem:
    instance: Instance
    threshold: Fraction

    def __post_init__(self):
        object.__setattr__(self, "threshold", parse_rational(self.threshold))


def density_order(instance: Instance, query_set=()) -> DensityOrder:
    """Items by optimistic density after Q, non-increasing; ties by id."""
    q = instance.ids_of(query_set)
    dens = {it.id: it.upper_after(it.id in q) / it.weight for it in instance.items}
    order = tuple(sorted(instance.ids, key=lambda i: (-dens[i], i)))
    return DensityOrder(order, dens)


def optimistic_prefix(instance: Instance, query_set=(), capacity=None) -> Prefix:
    """Longest initial segment of the order with weight <= C.

    Stops at the first item that does not fit; later items are never
    considered even if they would fit.
    """
    C = instance.capacity if capacity is None else capacity
    if not 0 <= C <= instance.capacity:
        raise ParameterError(f"prefix capacity {C} must lie in [0, {instance.capacity}]")
    q = instance.ids_of(query_set)
    members, w, u = [], 0, Fraction(0)
    for i in density_order(instance, q).ids:
        it = instance.item(i)
        if w + it.weight > C:
            break
        members.append(i)
        w += it.weight
        u += it.upper_after(i in q)
    return Prefix(tuple(members), w, u)


def prefix_upper(instance: Instance, query_set=()) -> Fraction:
    """U_{F(Q)}(Q)."""
    return optimistic_prefix(instance, query_set).upper_after


# ---------------------------------------------------------------------------
# subproblem on S1: exact DP
# ---------------------------------------------------------------------------

def s1_dp_table(weights: Sequence[int], values: Sequence, H: int, kmax: int) -> list:
    """``T[i][k][b]``: best value of a k-subset of the first i items with
    weight exactly b (None stands for minus infinity)."""
    T = [[[None] * (H + 1) for _ in range(kmax + 1)]]
    T[0][0][0] = 0
    for w, u in zip(weights, values):
        prev = T[-1]
        cur = [row[:] for row in prev]
        for k in range(1, kmax + 1):
            src, dst = prev[k - 1], cur[k]
            for b in range(w, H + 1):
                s = src[b - w]
                if s is not None:
                    v = s + u
                    if dst[b] is None or v > dst[b]:
                        dst[b] = v
        T.append(cur)
    return T


def _s1_pick(T, weights, K: int, H: int, n1: int) -> Optional[list]:
    """Backtrack an optimal n1-subset with K <= weight <= H (positions)."""
    last = T[-1]
    if n1 >= len(last):
        return None
    row = last[n1]
    best_b, best_v = None, None
    for b in range(max(K, 0), H + 1):
        v = row[b]
        if v is not None and (best_v is None or v > best_v):
            best_b, best_v = b, v
    if best_b is None:
        return None
    chosen = []
    b, k = best_b, n1
    for i in range(len(weights), 0, -1):
        if T[i - 1][k][b] == T[i][k][b]:
            continue
        chosen.append(i - 1)
        b -= weights[i - 1]
        k -= 1
    assert k == 0 and b == 0
    return chosen[::-1]


def solve_subproblem_s1_dp(items: Sequence, K: int, H: int, n1: int, *,
                           capacity_cap: int = engines.DEFAULT_CAPACITY_CAP) -> Optional[frozenset]:
    """Best n1-subset of S1 with K <= weight <= H, maximizing the sum of U.

    ``items`` holds ``(id, weight, U)`` triples; returns None when no
    subset meets the constraints.
    """
    if min(K, H, n1) < 0:
        raise ParameterError("K, H and n1 must be non-negative")
    if H > capacity_cap:
        raise CapacityError(f"H = {H} exceeds the DP cap {capacity_cap}", cap=capacity_cap)
    items = list(items)
    if n1 > len(items) or K > H:
        return None
    scale = common_denominator(Fraction(u) for _, _, u in items)
    weights = [w for _, w, _ in items]
    values = [int(Fraction(u) * scale) for _, _, u in items]
    T = s1_dp_table(weights, values, H, n1)
    pick = _s1_pick(T, weights, K, H, n1)
    if pick is None:
        return None
    return frozenset(items[p][0] for p in pick)


# ---------------------------------------------------------------------------
# subproblem on S1: LP relaxation
# ---------------------------------------------------------------------------

def _top_k_value(vals: list, k: int):
    return sum(sorted(vals, reverse=True)[:k])


def solve_subproblem_s1_lp(items: Sequence, H: int, n1: int) -> Optional[tuple]:
    """Basic optimum of max sum U_i x_i s.t. sum w_i x_i <= H, sum x_i = n1,
    0 <= x <= 1, in exact arithmetic.

    Returns ``(assignment, rounded)`` where ``assignment`` maps every id to
    its value and ``rounded`` is the set of ids at value 1; None if the LP
    is infeasible.
    """
    items = [(i, int(w), Fraction(u)) for i, w, u in items]
    k = n1
    if k < 0 or k > len(items):
        return None
    zero = {i: Fraction(0) for i, _, _ in items}
    if k == 0:
        return zero, frozenset()
    if sum(sorted(w for _, w, _ in items)[:k]) > H:
        return None
    greedy = sorted(items, key=lambda t: (-t[2], t[1], t[0]))[:k]
    if sum(w for _, w, _ in greedy) <= H:
        x = dict(zero)
        for i, _, _ in greedy:
            x[i] = Fraction(1)
        return x, frozenset(i for i, _, _ in greedy)

    # weight constraint binds: minimise the Lagrangian dual over its breakpoints
    def dual(lam):
        return lam * H + _top_k_value([u - lam * w for _, w, u in items], k)

    candidates = {Fraction(0)}
    for (_, wa, ua), (_, wb, ub) in combinations(items, 2):
        if wa != wb:
            lam = (ua - ub) / (wa - wb)
            if lam > 0:
                candidates.add(lam)
    lam = min(sorted(candidates), key=dual)
    bound = dual(lam)
    reduced = {i: u - lam * w for i, w, u in items}
    t = sorted(reduced.values(), reverse=True)[k - 1]
    top = [(i, w) for i, w, _ in items if reduced[i] > t]
    ties = sorted(((w, i) for i, w, _ in items if reduced[i] == t))
    need = k - len(top)
    target = H - sum(w for _, w in top) if lam > 0 else None

    x = dict(zero)
    for i, _ in top:
        x[i] = Fraction(1)
    chosen = list(range(need))          # positions in ties, lightest first
    if target is None or sum(ties[p][0] for p in chosen) >= target:
        for p in chosen:
            x[ties[p][1]] = Fraction(1)
    else:
        # walk from the lightest to the heaviest tie selection, one swap at a time
        done = False
        for slot in range(need - 1, -1, -1):
            limit = len(ties) - (need - slot)
            while chosen[slot] < limit:
                cur = sum(ties[p][0] for p in chosen)
                old, new = chosen[slot], chosen[slot] + 1
                nxt = cur - ties[old][0] + ties[new][0]
                if nxt >= target:
                    for p in chosen:
                        x[ties[p][1]] = Fraction(1)
                    if nxt == target:
                        x[ties[old][1]] = Fraction(0)
                        x[ties[new][1]] = Fraction(1)
                    else:
                        frac = Fraction(target - cur, ties[new][0] - ties[old][0])
                        x[ties[old][1]] = 1 - frac
                        x[ties[new][1]] = frac
                    done = True
                    break
                chosen[slot] = new
            if done:
                break
        if not done:  # pragma: no cover - dual optimality guarantees a crossing
            raise AssertionError("LP tie walk failed to meet the weight target")
    value = sum((u * x[i] for i, _, u in items), Fraction(0))
    assert sum((w * x[i] for i, w, _ in items), Fraction(0)) <= H
    assert value == bound, "primal and dual objectives differ"
    return x, frozenset(i for i, v in x.items() if v == 1)


def lp_vertex_oracle(items: Sequence, H: int, n1: int) -> Optional[Fraction]:
    """LP optimum by enumerating every basic solution (small S1 only).

    A basic solution has either no fractional coordinate, or exactly two
    with both constraints tight.
    """
    items = [(i, int(w), Fraction(u)) for i, w, u in items]
    m = len(items)
    if m > VERTEX_ORACLE_CAP:
        raise ParameterError(f"vertex oracle limited to {VERTEX_ORACLE_CAP} items")
    if n1 < 0 or n1 > m:
        return None
    best = None
    for combo in combinations(range(m), n1):
        if sum(items[p][1] for p in combo) <= H:
            v = sum((items[p][2] for p in combo), Fraction(0))
            best = v if best is None or v > best else best
    if n1 >= 1:
        for a, b in combinations(range(m), 2):
            wa, wb = items[a][1], items[b][1]
            if wa == wb:
                continue
            rest = [p for p in range(m) if p not in (a, b)]
            for combo in combinations(rest, n1 - 1):
                left = H - sum(items[p][1] for p in combo)
                xb = Fraction(left - wa, wb - wa)
                if 0 < xb < 1:
                    v = sum((items[p][2] for p in combo), Fraction(0)) \
                        + (1 - xb) * items[a][2] + xb * items[b][2]
                    best = v if best is None or v > best else best
    return best


# ---------------------------------------------------------------------------
# guess loop
# ---------------------------------------------------------------------------

class _Search:
    """Integer-scaled view of a prefix problem shared by both solvers."""

    def __init__(self, instance: Instance, threshold: Fraction, lp: bool, capacity_cap: int):
        self.n = instance.n
        self.B = instance.capacity
        self.lp = lp
        self.cap = capacity_cap
        items = instance.items
        max_u = max((it.upper for it in items), default=Fraction(0))
        limit = threshold + 2 * max_u if lp else threshold
        scale = common_denominator([it.upper for it in items] + [it.profit for it in items] + [limit])
        self.w = [0] + [it.weight for it in items]
        self.U = [0] + [int(it.upper * scale) for it in items]
        self.p = [0] + [int(it.profit * scale) for it in items]
        self.trivial = [True] + [it.trivial for it in items]
        self.limit = int(limit * scale)
        keys = []
        for it in items:
            keys.append((-(it.upper / it.weight), it.id, 0))
            keys.append((-(it.profit / it.weight), it.id, 1))
        rank = {}
        for r, key in enumerate(sorted(set(keys))):
            rank[key] = r
        self.rank = [None] + [
            (rank[(-(it.upper / it.weight), it.id, 0)], rank[(-(it.profit / it.weight), it.id, 1)])
            for it in items]
        # trivial items share one position whatever their query status
        for i in range(1, self.n + 1):
            if self.trivial[i]:
                self.rank[i] = (self.rank[i][0], self.rank[i][0])
        self.trace = []

    def prefix_value(self, q: frozenset) -> int:
        order = sorted(range(1, self.n + 1), key=lambda i: self.rank[i][1 if i in q else 0])
        w = u = 0
        for i in order:
            if w + self.w[i] > self.B:
                break
            w += self.w[i]
            u += self.p[i] if i in q else self.U[i]
        return u

    def classify(self, i1, q1, i2, q2) -> Optional[GuessContext]:
        k1, k2 = self.rank[i1][q1], self.rank[i2][q2]
        if k2 < k1:
            return None
        A, R1, R2, S1, S2 = [], [], [], [], []
        for i in range(1, self.n + 1):
            if i == i1 or i == i2:
                continue
            ku, kq = self.rank[i]
            if k1 < ku < k2:
                if self.trivial[i] or kq < k2:
                    return None
                A.append(i)
            elif ku > k2:
                R1.append(i)
            elif k1 < kq < k2:
                R2.append(i)
            elif kq > k2:
                S1.append(i)
            else:
                S2.append(i)
        wb = sum(self.w[i] for i in S1) + sum(self.w[i] for i in S2) + sum(self.w[i] for i in R2)
        H = wb + self.w[i1] + self.w[i2] - self.B - 1
        K = max(wb + self.w[i1] - self.B, 0)
        if H < 0 or K > H:
            return None
        return GuessContext(i1, i2, bool(q1), bool(q2), frozenset(A), frozenset(R1),
                            frozenset(R2), frozenset(S1), frozenset(S2), K, H)

    def evaluate(self, ctx: GuessContext, best):
        """Best candidate of one (i1, i2) guess, scanning every n1."""
        base = set(ctx.A)
        if ctx.i1_queried:
            base.add(ctx.i1)
        if ctx.i2_queried:
            base.add(ctx.i2)
        if best is not None and len(base) > best[0]:
            return best
        s1 = sorted(ctx.S1)
        gains = sorted(((self.U[i] - self.p[i], i) for i in ctx.S2 if not self.trivial[i]),
                       key=lambda t: (-t[0], t[1]))
        u_i1 = self.p[ctx.i1] if ctx.i1_queried else self.U[ctx.i1]
        u_base = (sum(self.U[i] for i in s1) + sum(self.U[i] for i in ctx.S2)
                  + sum(self.U[i] for i in ctx.R2) + u_i1)
        weights = [self.w[i] for i in s1]
        values = [self.U[i] for i in s1]
        table = None
        if not self.lp and s1:
            if ctx.H > self.cap:
                raise CapacityError(
                    f"S1 weight window {ctx.H} exceeds the DP cap {self.cap}; "
                    "use solve_prefix_lp instead", cap=self.cap)
            table = s1_dp_table(weights, values, ctx.H, len(s1))
        for n1 in range(len(s1) + 1):
            if not self.lp and best is not None and len(base) + n1 > best[0]:
                break
            if self.lp:
                res = solve_subproblem_s1_lp(list(zip(s1, weights, values)), ctx.H, n1)
                if res is None:
                    continue
                x, rounded = res
                self.trace.append(sum(1 for v in x.values() if 0 < v < 1))
                picked = sorted(rounded)
            elif not s1:
                picked = [] if ctx.K == 0 else None
            else:
                pos = _s1_pick(table, weights, ctx.K, ctx.H, n1)
                picked = None if pos is None else [s1[p] for p in pos]
            if picked is None:
                continue
            value = u_base - sum(self.U[i] for i in picked)
            n2, acc = 0, value
            while acc > self.limit and n2 < len(gains):
                acc -= gains[n2][0]
                n2 += 1
            if acc > self.limit:
                continue
            q = frozenset(base) | frozenset(picked) | frozenset(i for _, i in gains[:n2])
            cand = (len(q), tuple(sorted(q)))
            if best is not None and cand >= best:
                continue
            if self.prefix_value(q) <= self.limit:
                best = cand
        return best

    def run(self, i1_values) -> Optional[tuple]:
        best = None
        for i1 in i1_values:
            for q1 in ((0,) if self.trivial[i1] else (0, 1)):
                for i2 in range(1, self.n + 1):
                    if i2 == i1:
                        continue
                    for q2 in ((0,) if self.trivial[i2] else (0, 1)):
                        ctx = self.classify(i1, q1, i2, q2)
                        if ctx is not None:
                            best = self.evaluate(ctx, best)
        return best


def _run_chunk(args):
    search, i1_values = args
    best = search.run(i1_values)
    return best, search.trace


def _all_fit(instance: Instance, limit: Fraction) -> frozenset:
    """Every item fits: the prefix is the whole instance whatever Q is."""
    total = sum((it.upper for it in instance.items), Fraction(0))
    gains = sorted(((it.upper - it.profit, it.id) for it in instance.items if not it.trivial),
                   key=lambda t: (-t[0], t[1]))
    chosen = []
    for g, i in gains:
        if total <= limit:
            break
        total -= g
        chosen.append(i)
    return frozenset(chosen)


def _check_threshold(problem: PrefixProblem, capacity_cap: int) -> None:
    p_star = engines.optimum(problem.instance, capacity_cap=capacity_cap)[0]
    if problem.threshold < p_star:
        raise ParameterError(f"threshold {problem.threshold} is below p* = {p_star}")


def _solve(problem: PrefixProblem, lp: bool, workers: int, capacity_cap: int,
           trace: Optional[list]) -> frozenset:
    _check_threshold(problem, capacity_cap)
    inst, D = problem.instance, problem.threshold
    if inst.n == 0:
        return frozenset()
    if sum(it.weight for it in inst.items) <= inst.capacity:
        limit = D + 2 * max(it.upper for it in inst.items) if lp else D
        return _all_fit(inst, limit)
    search = _Search(inst, D, lp, capacity_cap)
    ids = list(range(1, inst.n + 1))
    if workers and workers > 1:
        chunks = [ids[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, [(search, c) for c in chunks if c]))
        found = [r for r, _ in results if r is not None]
        best = min(found) if found else None
        if trace is not None:
            for _, t in results:
                trace.extend(t)
    else:
        best = search.run(ids)
        if trace is not None:
            trace.extend(search.trace)
    if best is None:  # pragma: no cover - querying everything always qualifies
        raise AssertionError("no guess produced a candidate")
    return frozenset(best[1])


def solve_prefix_optimal(problem: PrefixProblem, *, workers: int = 1,
                         capacity_cap: int = engines.DEFAULT_CAPACITY_CAP) -> frozenset:
    """Minimum-cardinality Q with U_{F(Q)}(Q) <= D (exact, pseudopolynomial)."""
    return _solve(problem, False, workers, capacity_cap, None)


def solve_prefix_lp(problem: PrefixProblem, *, workers: int = 1, trace: Optional[list] = None,
                    capacity_cap: int = engines.DEFAULT_CAPACITY_CAP) -> frozenset:
    """Q with |Q| <= |Q*_F| and U_{F(Q)}(Q) <= D + 2 max_i U_i.

    ``trace``, when given, receives the number of fractional coordinates of
    every LP basic solution computed.
    """
    return _solve(problem, True, workers, capacity_cap, trace)
