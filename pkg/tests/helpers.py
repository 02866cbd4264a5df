"""Independent brute-force oracles used across the test suite.

They deliberately avoid the package's engines: subsets come from
``itertools`` and all values are summed directly.
"""
import random
from fractions import Fraction
from itertools import combinations

from knapexp.model import random_instance
from knapexp.prefix import prefix_upper


def all_subsets(ids):
    ids = list(ids)
    for r in range(len(ids) + 1):
        yield from (frozenset(c) for c in combinations(ids, r))


def all_packings(instance):
    w = {it.id: it.weight for it in instance.items}
    return [s for s in all_subsets(instance.ids) if sum(w[i] for i in s) <= instance.capacity]


def total(values, members):
    return sum((values[i] for i in members), Fraction(0))


def profits(instance):
    return {it.id: it.profit for it in instance.items}


def uppers_after(instance, q):
    return {it.id: (it.profit if it.id in q else it.upper) for it in instance.items}


def brute_p_star(instance):
    p = profits(instance)
    return max(total(p, s) for s in all_packings(instance))


def brute_feasible(instance, q, alpha=1, beta=1, packings=None):
    packings = all_packings(instance) if packings is None else packings
    p = profits(instance)
    p_star = max(total(p, s) for s in packings)
    allowed = q | instance.trivial_ids
    inside = max(total(p, s) for s in packings if s <= allowed)
    u = uppers_after(instance, q)
    return inside * alpha >= p_star and max(total(u, s) for s in packings) <= beta * p_star


def minimal_query_sets(instance, alpha=1, beta=1):
    """Every minimum-size feasible query set, scanning bitmasks from the top."""
    cand = sorted(instance.nontrivial_ids)
    packings = all_packings(instance)
    best, found = None, []
    for mask in range((1 << len(cand)) - 1, -1, -1):
        q = frozenset(c for k, c in enumerate(cand) if mask >> k & 1)
        if best is not None and len(q) > best:
            continue
        if brute_feasible(instance, q, alpha, beta, packings):
            if best is None or len(q) < best:
                best, found = len(q), [q]
            elif len(q) == best:
                found.append(q)
    return best, found


def prefix_corpus(count, seed, max_n=10, weight_cap=15):
    """Seeded (instance, D) pairs with D uniform on a grid of [p*, U_F(empty)]."""
    rng = random.Random(seed)
    out = []
    for k in range(count):
        n = rng.randint(1, max_n)
        inst = random_instance(n, weight_cap, seed=seed * 100003 + k)
        p_star = brute_p_star(inst)
        top = max(p_star, prefix_upper(inst, ()))
        D = p_star + (top - p_star) * Fraction(rng.randint(0, 24), 24)
        out.append((inst, D))
    return out
