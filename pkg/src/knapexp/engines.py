"""Exact 0/1 knapsack engines.

All engines take a *profit vector* (one non-negative rational per item,
position ``id - 1``) so the same code computes p* (profits p_i) and the
largest upper limit U*(Q) (profits U_i(Q)).

Witness rule, shared by the DP engines: among optimal packings prefer the
fewest non-trivial items, then the lexicographically smallest sorted id
tuple.
"""
from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .errors import CapacityError, EnumerationCapError, StructuralError
from .model import Instance, common_denominator

DEFAULT_CAPACITY_CAP = 10**6
DEFAULT_ENUMERATION_CAP = 22
DEFAULT_SPLIT_CAP = 40


def _profit_vector(instance: Instance, profits: Optional[Sequence]) -> list:
    if profits is None:
        return instance.profits()
    vec = [Fraction(v) for v in profits]
    if len(vec) != instance.n:
        raise StructuralError(f"profit vector has {len(vec)} entries for {instance.n} items")
    if any(v < 0 for v in vec):
        raise StructuralError("profit vector entries must be >= 0")
    return vec


def _keys(instance: Instance, vec: list) -> tuple:
    """Integer keys ``scaled_profit * M - nontrivial`` so that maximising the
    key maximises profit first and minimises the non-trivial count second."""
    scale = common_denominator(vec)
    m = instance.n + 1
    nt = [0 if it.trivial else 1 for it in instance.items]
    keys = [int(v * scale) * m - t for v, t in zip(vec, nt)]
    return keys, nt


def _check_capacity(instance: Instance, capacity_cap: int):
    if instance.capacity > capacity_cap:
        raise CapacityError(
            f"capacity {instance.capacity} exceeds the DP cap {capacity_cap}; "
            "use an enumeration engine instead", cap=capacity_cap)


def _value(vec: list, packing) -> Fraction:
    return sum((vec[i - 1] for i in packing), Fraction(0))


def _suffix_table(weights, keys, capacity):
    """best[j][c]: best key using items j.. (0-based) within capacity c."""
    n = len(weights)
    best = [None] * (n + 1)
    best[n] = [0] * (capacity + 1)
    for j in range(n - 1, -1, -1):
        prev = best[j + 1]
        cur = prev[:]
        w, k = weights[j], keys[j]
        for c in range(w, capacity + 1):
            v = prev[c - w] + k
            if v > cur[c]:
                cur[c] = v
        best[j] = cur
    return best


def _lex_smallest(weights, keys, best, capacity) -> frozenset:
    chosen = []
    start, cap = 0, capacity
    remaining = best[0][capacity]
    n = len(weights)
    while remaining != 0:
        for j in range(start, n):
            w = weights[j]
            if w <= cap and keys[j] + best[j + 1][cap - w] == remaining:
                chosen.append(j + 1)
                remaining -= keys[j]
                cap -= w
                start = j + 1
                break
        else:  # pragma: no cover - table invariant
            raise AssertionError("witness reconstruction failed")
    return frozenset(chosen)


def knapsack_opt(instance: Instance, profits: Optional[Sequence] = None, *,
                 capacity_cap: int = DEFAULT_CAPACITY_CAP) -> tuple:
    """Optimal value and witness packing for the given profit vector.

    Weight-indexed DP; refuses capacities above ``capacity_cap``.
    """
    vec = _profit_vector(instance, profits)
    if instance.n == 0:
        return Fraction(0), frozenset()
    _check_capacity(instance, capacity_cap)
    keys, _ = _keys(instance, vec)
    weights = [it.weight for it in instance.items]
    best = _suffix_table(weights, keys, instance.capacity)
    witness = _lex_smallest(weights, keys, best, instance.capacity)
    return _value(vec, witness), witness


def _table_2d(instance: Instance, keys, limit: int):
    """best[j][l][c] over items j.., at most l non-trivial items, capacity c."""
    n, cap = instance.n, instance.capacity
    weights = [it.weight for it in instance.items]
    trivial = [it.trivial for it in instance.items]
    best = [None] * (n + 1)
    best[n] = [[0] * (cap + 1) for _ in range(limit + 1)]
    for j in range(n - 1, -1, -1):
        prev = best[j + 1]
        w, k = weights[j], keys[j]
        layer = []
        for l in range(limit + 1):
            cur = prev[l][:]
            src = prev[l] if trivial[j] else (prev[l - 1] if l > 0 else None)
            if src is not None:
                for c in range(w, cap + 1):
                    v = src[c - w] + k
                    if v > cur[c]:
                        cur[c] = v
            layer.append(cur)
        best[j] = layer
    return best


def _lex_smallest_2d(instance: Instance, keys, best, limit: int) -> frozenset:
    weights = [it.weight for it in instance.items]
    trivial = [it.trivial for it in instance.items]
    n = instance.n
    chosen = []
    start, cap, l = 0, instance.capacity, limit
    remaining = best[0][limit][cap]
    while remaining != 0:
        for j in range(start, n):
            w = weights[j]
            nl = l if trivial[j] else l - 1
            if w <= cap and nl >= 0 and keys[j] + best[j + 1][nl][cap - w] == remaining:
                chosen.append(j + 1)
                remaining -= keys[j]
                cap -= w
                l = nl
                start = j + 1
                break
        else:  # pragma: no cover
            raise AssertionError("witness reconstruction failed")
    return frozenset(chosen)


def knapsack_opt_2d(instance: Instance, profits: Optional[Sequence], limit: int, *,
                    capacity_cap: int = DEFAULT_CAPACITY_CAP) -> tuple:
    """Optimum over packings with at most ``limit`` non-trivial members."""
    if not 0 <= limit <= instance.n:
        raise StructuralError(f"cardinality limit must lie in 0..{instance.n}")
    vec = _profit_vector(instance, profits)
    if instance.n == 0:
        return Fraction(0), frozenset()
    _check_capacity(instance, capacity_cap)
    keys, _ = _keys(instance, vec)
    best = _table_2d(instance, keys, limit)
    witness = _lex_smallest_2d(instance, keys, best, limit)
    return _value(vec, witness), witness


def knapsack_opt_2d_all(instance: Instance, profits: Optional[Sequence] = None, *,
                        capacity_cap: int = DEFAULT_CAPACITY_CAP) -> list:
    """``[(value, witness) for limit in 0..n]`` from a single table."""
    vec = _profit_vector(instance, profits)
    if instance.n == 0:
        return [(Fraction(0), frozenset())]
    _check_capacity(instance, capacity_cap)
    keys, _ = _keys(instance, vec)
    best = _table_2d(instance, keys, instance.n)
    out = []
    for limit in range(instance.n + 1):
        witness = _lex_smallest_2d(instance, keys, best, limit)
        out.append((_value(vec, witness), witness))
    return out


def knapsack_opt_split(instance: Instance, profits: Optional[Sequence] = None, *,
                       cap: int = DEFAULT_SPLIT_CAP) -> tuple:
    """Meet-in-the-middle exact optimum; independent of the capacity.

    Enumerates all subsets of each half (2^(n/2) each), so it serves the
    huge-capacity instances the DP refuses.  Witness: fewest non-trivial
    items among optimal packings, remaining ties resolved deterministically.
    """
    vec = _profit_vector(instance, profits)
    n = instance.n
    if n > cap:
        raise EnumerationCapError(f"{n} items exceed the split-enumeration cap {cap}", cap=cap)
    if n == 0:
        return Fraction(0), frozenset()
    keys, _ = _keys(instance, vec)
    weights = [it.weight for it in instance.items]
    B = instance.capacity
    half = n // 2

    def subsets(lo, hi):
        out = [(0, 0, 0)]
        for j in range(lo, hi):
            w, k, bit = weights[j], keys[j], 1 << j
            out += [(sw + w, sk + k, sm | bit) for sw, sk, sm in out if sw + w <= B]
        return out

    left = subsets(0, half)
    right = sorted(subsets(half, n), key=lambda t: (t[0], t[2]))
    rweights = [t[0] for t in right]
    prefix = []
    top = None
    for t in right:
        if top is None or t[1] > top[1]:
            top = t
        prefix.append(top)
    best_key, best_mask = None, 0
    for lw, lk, lm in left:
        idx = bisect_right(rweights, B - lw) - 1
        if idx < 0:
            continue
        _, rk, rm = prefix[idx]
        if best_key is None or lk + rk > best_key:
            best_key, best_mask = lk + rk, lm | rm
    witness = frozenset(j + 1 for j in range(n) if best_mask >> j & 1)
    return _value(vec, witness), witness


def max_upper_limit(instance: Instance, query_set=(), *,
                    capacity_cap: int = DEFAULT_CAPACITY_CAP) -> Fraction:
    """U*(Q): the largest U_P(Q) over all packings P."""
    return knapsack_opt(instance, instance.uppers_after(query_set),
                        capacity_cap=capacity_cap)[0]


def packing_masks(weights: Sequence[int], capacity: int) -> list:
    """``(mask, weight)`` for every subset of total weight <= capacity.

    Bit j of the mask stands for position j.  Every subset of a packing is
    a packing, so extending item by item reaches exactly the packings.
    """
    out = [(0, 0)]
    for j, w in enumerate(weights):
        bit = 1 << j
        out += [(m | bit, sw + w) for m, sw in out if sw + w <= capacity]
    return out


def enumerate_packings(instance: Instance, *, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[frozenset]:
    """Every packing exactly once, as a frozenset of ids."""
    if instance.n > cap:
        raise EnumerationCapError(
            f"refusing to enumerate packings of {instance.n} items (cap {cap})", cap=cap)
    n = instance.n
    for mask, _ in packing_masks([it.weight for it in instance.items], instance.capacity):
        yield frozenset(j + 1 for j in range(n) if mask >> j & 1)


def optimum(instance: Instance, profits: Optional[Sequence] = None, *,
            capacity_cap: int = DEFAULT_CAPACITY_CAP, split_cap: int = DEFAULT_SPLIT_CAP) -> tuple:
    """DP when the capacity allows it, split enumeration otherwise."""
    if instance.capacity <= capacity_cap:
        return knapsack_opt(instance, profits, capacity_cap=capacity_cap)
    return knapsack_opt_split(instance, profits, cap=split_cap)
