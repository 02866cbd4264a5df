"""Hardness constructions as executable instance generators.

* :func:`reduce_sscover` -- succinct set cover to the offline problem, with
  weights built from decimal blocks of partial weights.
* :func:`reduce_subset_sum` -- subset sum to the prefix problem.
* :func:`reduce_knapsack_decision` -- knapsack decision to "is the empty
  query set (alpha, beta)-feasible?".

:func:`verify_reduction_properties` checks the structural properties of a
succinct-set-cover construction exhaustively over all packings.
"""
from __future__ import annotations

import json
import logging
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from . import engines
from .errors import EnumerationCapError, ParameterError, StructuralError
from .model import Instance, Interval, Item, common_denominator, parse_integer, parse_rational

log = logging.getLogger(__name__)

COVERAGE_ENUMERATION_LIMIT = 20
PROPERTY_ITEM_CAP = 22


# ---------------------------------------------------------------------------
# succinct set cover
# ---------------------------------------------------------------------------

def _satisfies_clause(assignment, clause) -> bool:
    return all((assignment[abs(lit) - 1] == 1) == (lit > 0) for lit in clause)


def _satisfies(assignment, formula) -> bool:
    return any(_satisfies_clause(assignment, c) for c in formula)


@dataclass(frozen=True)
class SuccinctSetCoverInstance:
    """3-DNF formulas over variables ``1..n_vars``; a literal is a signed index."""

    n_vars: int
    formulas: tuple
    k: int

    def __post_init__(self):
        formulas = tuple(tuple(tuple(int(l) for l in clause) for clause in f) for f in self.formulas)
        object.__setattr__(self, "formulas", formulas)
        if self.n_vars < 1:
            raise StructuralError("need at least one variable")
        if not formulas:
            raise StructuralError("need at least one formula")
        if self.k < 0:
            raise StructuralError("budget k must be >= 0")
        seen = set()
        for j, f in enumerate(formulas, start=1):
            if not f:
                raise StructuralError(f"formula {j} has no clause")
            for c, clause in enumerate(f, start=1):
                if len(clause) != 3:
                    raise StructuralError(f"formula {j} clause {c}: need exactly 3 literals")
                variables = [abs(l) for l in clause]
                if 0 in variables or max(variables) > self.n_vars:
                    raise StructuralError(f"formula {j} clause {c}: literal out of range")
                if len(set(variables)) != 3:
                    raise StructuralError(f"formula {j} clause {c}: repeated variable")
                seen.update(variables)
        missing = set(range(1, self.n_vars + 1)) - seen
        if missing:
            raise StructuralError(f"variables {sorted(missing)} occur in no formula")

    @property
    def m(self) -> int:
        return len(self.formulas)

    def assignments(self):
        return product((0, 1), repeat=self.n_vars)

    def satisfying_sets(self) -> list:
        """S_j for every formula, as sets of 0/1 tuples (enumerated)."""
        out = [set() for _ in self.formulas]
        for a in self.assignments():
            for j, f in enumerate(self.formulas):
                if _satisfies(a, f):
                    out[j].add(a)
        return out

    def covers_all(self) -> bool:
        return set().union(*self.satisfying_sets()) == set(self.assignments())

    def min_cover_size(self) -> int:
        """Fewest formulas covering every assignment that some formula covers.

        Equals the textbook optimum whenever the formulas cover {0,1}^n.
        """
        sets = self.satisfying_sets()
        universe = set().union(*sets)
        for size in range(len(sets) + 1):
            for combo in combinations(range(len(sets)), size):
                if set().union(*(sets[j] for j in combo)) == universe:
                    return size
        raise AssertionError("unreachable: all formulas cover the universe")

    @classmethod
    def from_json(cls, text: str) -> "SuccinctSetCoverInstance":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StructuralError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
        try:
            return cls(int(doc["n"]), tuple(doc["formulas"]), int(doc["k"]))
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"malformed succinct set cover document: {exc}") from None

    def to_json(self) -> str:
        return json.dumps({"n": self.n_vars, "k": self.k,
                           "formulas": [[list(c) for c in f] for f in self.formulas]})


@dataclass
class ReducedKnapexInstance:
    """Output of :func:`reduce_sscover` with all construction metadata.

    Blocks are named ``("x",)``, ``("phi", j)`` and ``("rho", j)``;
    ``partials[id][block]`` is the partial weight of an item in that block.
    """

    instance: Instance
    source: SuccinctSetCoverInstance
    roles: dict
    partials: dict
    capacities: dict
    widths: dict
    offsets: dict
    epsilon: Fraction
    ids_by_role: dict = field(default_factory=dict)

    @property
    def blocks(self) -> list:
        return sorted(self.offsets, key=self.offsets.get)

    @property
    def y_ids(self) -> list:
        return [self.ids_by_role[("y", j)] for j in range(1, self.source.m + 1)]

    def combine(self, partial: dict) -> int:
        return sum(partial.get(b, 0) * 10 ** self.offsets[b] for b in self.offsets)

    def split_digits(self, value: int) -> dict:
        """Recover block values from a combined integer by digit offsets."""
        digits = str(value)
        out = {}
        for b, off in self.offsets.items():
            hi = len(digits) - off
            lo = max(hi - self.widths[b], 0)
            chunk = digits[lo:hi] if hi > 0 else ""
            out[b] = int(chunk) if chunk else 0
        return out


def reduce_sscover(ssc: SuccinctSetCoverInstance) -> ReducedKnapexInstance:
    """Build the offline instance whose minimum feasible query set has the
    size of a minimum cover.  Only the ``y_j`` items are non-trivial."""
    n, m = ssc.n_vars, ssc.m
    if n <= COVERAGE_ENUMERATION_LIMIT:
        if not ssc.covers_all():
            log.warning("formulas do not cover {0,1}^%d; covers are taken relative to "
                        "the union of satisfying sets", n)
    else:
        log.warning("coverage of {0,1}^%d not verified (n > %d)", n, COVERAGE_ENUMERATION_LIMIT)

    X, PHI, RHO = ("x",), (lambda j: ("phi", j)), (lambda j: ("rho", j))
    roles = []          # role tuples in id order
    parts = []          # partial-weight dicts in id order

    kj = [len(f) for f in ssc.formulas]
    for i in range(1, n + 1):
        for positive in (True, False):
            p = {X: 10 ** i}
            for j, f in enumerate(ssc.formulas, start=1):
                val = sum(10 ** (kj[j - 1] + k - 1)
                          for k, clause in enumerate(f, start=1)
                          if (i if positive else -i) in clause)
                if val:
                    p[PHI(j)] = val
            roles.append(("v" if positive else "vbar", i))
            parts.append(p)
    for j, f in enumerate(ssc.formulas, start=1):
        for k in range(1, len(f) + 1):
            for t in range(4):
                p = {PHI(j): t * 10 ** (kj[j - 1] + k - 1) + 10 ** (k - 1)}
                if t == 0:
                    p[RHO(j)] = 1
                roles.append(("a", j, k, t))
                parts.append(p)
    for j in range(1, m + 1):
        q = kj[j - 1] ** 2
        roles.append(("y", j))
        parts.append({RHO(j): 10 ** (q + 1)})
        roles.append(("u", j))
        parts.append({RHO(j): 10 ** (q + 1) + 10 ** q + kj[j - 1]})
        for k in range(kj[j - 1]):
            roles.append(("f", j, k))
            parts.append({RHO(j): 10 ** q + k})

    caps = {X: sum(10 ** i for i in range(1, n + 1))}
    for j in range(1, m + 1):
        c = kj[j - 1]
        caps[PHI(j)] = sum(10 ** k for k in range(c)) + sum(3 * 10 ** k for k in range(c, 2 * c))
        caps[RHO(j)] = c + 10 ** (c * c) + 10 ** (c * c + 1)
    # the anchor item i* fills the knapsack alone; its partials are the capacities
    roles.append(("star",))
    parts.append(dict(caps))

    order = [PHI(j) for j in range(1, m + 1)] + [RHO(j) for j in range(1, m + 1)] + [X]
    widths, offsets = {}, {}
    off = 0
    for b in order:
        total = sum(p.get(b, 0) for p in parts)
        widths[b] = len(str(total)) + 1        # one guard digit
        offsets[b] = off
        off += widths[b]

    def combine(p):
        return sum(p.get(b, 0) * 10 ** offsets[b] for b in order)

    capacity = combine(caps)
    eps = Fraction(1, 2 * m)
    items = []
    for pos, (role, p) in enumerate(zip(roles, parts), start=1):
        w = combine(p)
        if role[0] == "y":
            items.append(Item(pos, w, Fraction(w - 1), Interval(w - 2, w + eps)))
        else:
            items.append(Item(pos, w, Fraction(w), Interval.point(w)))
    instance = Instance(tuple(items), capacity)
    return ReducedKnapexInstance(
        instance=instance, source=ssc,
        roles={pos: r for pos, r in enumerate(roles, start=1)},
        partials={pos: p for pos, p in enumerate(parts, start=1)},
        capacities=caps, widths=widths, offsets=offsets, epsilon=eps,
        ids_by_role={r: pos for pos, r in enumerate(roles, start=1)})


def expected_item_count(ssc: SuccinctSetCoverInstance) -> int:
    ks = [len(f) for f in ssc.formulas]
    return 2 * ssc.n_vars + 4 * sum(ks) + sum(k + 2 for k in ks) + 1


# ---------------------------------------------------------------------------
# exhaustive property check
# ---------------------------------------------------------------------------

@dataclass
class PropertyReport:
    """Outcome of :func:`verify_reduction_properties`.

    ``passed[k]`` is the verdict for property ``k`` (1..7); ``failures``
    holds the first few counterexamples as readable strings.
    """

    passed: dict
    failures: list
    packings_checked: int
    p_star: Fraction
    full_weight_packings: int
    represented_full: int
    represented_hot: int
    coverable: int

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def _half_packings(entries, capacity):
    """Subsets of ``entries`` (mask, weight, delta, packed) with weight <= capacity."""
    out = [(0, 0, 0, 0)]
    for m, w, d, p in entries:
        out += [(sm | m, sw + w, sd + d, sp + p) for sm, sw, sd, sp in out if sw + w <= capacity]
    return out


def verify_reduction_properties(reduced: ReducedKnapexInstance, *,
                                cap: int = PROPERTY_ITEM_CAP, max_failures: int = 10) -> PropertyReport:
    """Check properties 1-7 of a succinct-set-cover construction on every packing.

    Block sums are tracked in separate binary slots, independent of the
    decimal concatenation, so property 4 compares two genuinely different
    computations.  Packings containing the anchor item are exempt from
    properties 5-7: its partials equal the capacities, not zero.
    """
    inst, ssc = reduced.instance, reduced.source
    n_items = inst.n
    if n_items > cap:
        raise EnumerationCapError(f"{n_items} items exceed the property-check cap {cap}", cap=cap)
    m = ssc.m
    B = inst.capacity
    blocks = reduced.blocks
    slot_bits = {}
    shift = {}
    pos = 0
    for b in blocks:
        total = sum(p.get(b, 0) for p in reduced.partials.values())
        slot_bits[b] = total.bit_length() + 1
        shift[b] = pos
        pos += slot_bits[b]

    def pack(partial):
        return sum(partial.get(b, 0) << shift[b] for b in blocks)

    p_star = engines.optimum(inst)[0]
    den = common_denominator([it.upper - it.weight for it in inst.items] + [p_star])
    ps = int(p_star * den)

    entries = []
    for it in inst.items:
        bit = 1 << (it.id - 1)
        entries.append((bit, it.weight, int((it.upper - it.weight) * den), pack(reduced.partials[it.id])))
    half = n_items // 2
    left = _half_packings(entries[:half], B)
    right = sorted(_half_packings(entries[half:], B), key=lambda t: t[1])
    rweights = [t[1] for t in right]
    packed_cap = pack(reduced.capacities)

    bid = reduced.ids_by_role
    star_bit = 1 << (bid[("star",)] - 1)
    x_mask = 0
    for i in range(1, ssc.n_vars + 1):
        x_mask |= (1 << (bid[("v", i)] - 1)) | (1 << (bid[("vbar", i)] - 1))
    # X-subsets that represent an assignment
    xrep = {}
    for a in ssc.assignments():
        msk = 0
        for i, val in enumerate(a, start=1):
            msk |= 1 << (bid[("v", i)] - 1) if val else 1 << (bid[("vbar", i)] - 1)
        xrep[msk] = a
    sat_sets = ssc.satisfying_sets()
    coverable = set().union(*sat_sets)

    def slot(packed, b):
        return (packed >> shift[b]) & ((1 << slot_bits[b]) - 1)

    X = ("x",)
    Bx = reduced.capacities[X]
    per_j = []
    for j in range(1, m + 1):
        f = ssc.formulas[j - 1]
        clause_bits = []
        for k in range(1, len(f) + 1):
            bits = [1 << (bid[("a", j, k, t)] - 1) for t in range(4)]
            clause_bits.append(bits)
        a0 = 0
        for bits in clause_bits:
            a0 |= bits[0]
        per_j.append(dict(
            j=j, formula=f, phi=("phi", j), rho=("rho", j),
            Bphi=reduced.capacities[("phi", j)], Brho=reduced.capacities[("rho", j)],
            ybit=1 << (bid[("y", j)] - 1), clause_bits=clause_bits, a0=a0,
            ygap=int((inst.item(bid[("y", j)]).upper - inst.item(bid[("y", j)]).profit) * den)))

    passed = {k: True for k in range(1, 8)}
    failures = []

    def fail(k, msg, mask):
        passed[k] = False
        if len(failures) < max_failures:
            ids = [i + 1 for i in range(n_items) if mask >> i & 1]
            failures.append(f"property {k}: {msg} for packing {ids}")

    represented_full, represented_hot = set(), set()
    checked = 0
    full_count = 0
    for lm, lw, ld, lp in left:
        hi = bisect_right(rweights, B - lw)
        checked += hi
        for idx in range(hi):
            rm, rw, rd, rp = right[idx]
            w = lw + rw
            mask = lm | rm
            pk = lp + rp
            full = w == B
            if full != (pk == packed_cap):
                fail(4, "combined weight and block sums disagree", mask)
            upper = w * den + ld + rd
            if upper >= ps and not full:
                fail(1, "upper limit reaches p* below full weight", mask)
            hot = upper > ps
            assignment = xrep.get(mask & x_mask)
            if full:
                full_count += 1
                if assignment is not None:
                    represented_full.add(assignment)
                if hot:
                    if assignment is None:
                        fail(2, "full-weight packing above p* represents no assignment", mask)
                    else:
                        represented_hot.add(assignment)
            if hot:
                for pj in per_j:
                    y_in = bool(mask & pj["ybit"])
                    sat = assignment is not None and assignment in sat_sets[pj["j"] - 1]
                    if y_in != sat:
                        fail(3, f"y_{pj['j']} membership disagrees with formula {pj['j']}", mask)
                    if y_in and upper - ps > pj["ygap"]:
                        fail(3, f"excess above p* exceeds the gap of y_{pj['j']}", mask)
            if mask & star_bit:
                continue
            x_full = slot(pk, X) == Bx
            if x_full != (assignment is not None):
                fail(5, "x-block equality disagrees with representation", mask)
            for pj in per_j:
                if x_full and slot(pk, pj["phi"]) == pj["Bphi"]:
                    for k, bits in enumerate(pj["clause_bits"]):
                        chosen = sum(1 for b in bits if mask & b)
                        sat = _satisfies_clause(assignment, pj["formula"][k])
                        if chosen != 1 or bool(mask & bits[0]) != sat:
                            fail(6, f"clause {k + 1} of formula {pj['j']} mis-encoded", mask)
                if slot(pk, pj["rho"]) == pj["Brho"]:
                    if bool(mask & pj["ybit"]) != bool(mask & pj["a0"]):
                        fail(7, f"y_{pj['j']} disagrees with the a_0 items", mask)

    all_assignments = set(ssc.assignments())
    if represented_full != all_assignments:
        fail(2, f"only {len(represented_full)} of {len(all_assignments)} assignments fill the knapsack", 0)
    if represented_hot != coverable:
        fail(2, "covered assignments and packings above p* differ", 0)
    if p_star != B:
        fail(1, f"p* = {p_star} differs from the capacity", 0)
    return PropertyReport(passed=passed, failures=failures, packings_checked=checked, p_star=p_star,
                          full_weight_packings=full_count, represented_full=len(represented_full),
                          represented_hot=len(represented_hot), coverable=len(coverable))


def check_concatenation(reduced: ReducedKnapexInstance) -> bool:
    """Digit parsing of every weight (and of B) recovers the partials."""
    for it in reduced.instance.items:
        parsed = reduced.split_digits(it.weight)
        want = reduced.partials[it.id]
        if any(parsed[b] != want.get(b, 0) for b in reduced.offsets):
            return False
    parsed = reduced.split_digits(reduced.instance.capacity)
    return all(parsed[b] == reduced.capacities[b] for b in reduced.offsets)


def check_digit_budget(reduced: ReducedKnapexInstance) -> bool:
    """Each block's full-instance sum fits its allotted width."""
    for b, width in reduced.widths.items():
        total = sum(p.get(b, 0) for p in reduced.partials.values())
        if len(str(total)) > width:
            return False
    return True


# ---------------------------------------------------------------------------
# subset sum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubsetSumInstance:
    values: tuple
    target: int

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "target", int(self.target))
        if not vals or any(v <= 0 for v in vals):
            raise StructuralError("subset sum values must be positive integers")
        if self.target < 0:
            raise StructuralError("subset sum target must be >= 0")

    @property
    def total(self) -> int:
        return sum(self.values)

    def normalized(self) -> "SubsetSumInstance":
        if 2 * self.target > self.total:
            return SubsetSumInstance(self.values, self.total - self.target)
        return self

    def has_solution(self) -> bool:
        reach = 1
        for v in self.values:
            reach |= reach << v
        return bool(reach >> self.target & 1)

    @classmethod
    def from_json(cls, text: str) -> "SubsetSumInstance":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StructuralError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
        try:
            return cls(tuple(parse_integer(v) for v in doc["values"]), parse_integer(doc["target"]))
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"malformed subset sum document: {exc}") from None

    def to_json(self) -> str:
        return json.dumps({"values": [str(v) for v in self.values], "target": str(self.target)})


@dataclass(frozen=True)
class SubsetSumReduction:
    """Prefix-problem instance built from a subset sum instance.

    Ids ``1..n`` are the normal items, ``n+1..2n`` the blocking items.
    """

    instance: Instance
    threshold: Fraction
    source: SubsetSumInstance
    c: Fraction
    epsilon: Fraction
    p_star: Fraction


def reduce_subset_sum(ss: SubsetSumInstance, c=1) -> SubsetSumReduction:
    c = parse_rational(c)
    if c < 1:
        raise ParameterError(f"c = {c} must be >= 1")
    ss = ss.normalized()
    A, H, W = ss.values, ss.target, ss.total
    if W < 3:
        raise StructuralError(f"W = {W} violates W >= 3")
    if not any(2 * a <= W - 2 for a in A):
        raise StructuralError(f"no value is <= W/2 - 1 = {Fraction(W, 2) - 1}")
    eps = min(Fraction(1, W), c * (W - H) / (W + H + 1)) / 2
    B = 2 * W
    items = []
    for i, a in enumerate(A, start=1):
        items.append(Item(i, a, eps * a, Interval(Fraction(0), c * a)))
    n = len(A)
    bw = B - W + H + 1
    bu = c * (W - H)
    bp = Fraction(W - H)
    for j in range(1, n + 1):
        # with c = 1 the profit equals the upper limit, so the item is trivial
        iv = Interval.point(bp) if bu == bp else Interval(Fraction(0), bu)
        items.append(Item(n + j, bw, bp, iv))
    inst = Instance(tuple(items), B)
    p_star = engines.optimum(inst)[0]
    return SubsetSumReduction(inst, c * p_star, ss, c, eps, p_star)


# ---------------------------------------------------------------------------
# knapsack decision
# ---------------------------------------------------------------------------

def reduce_knapsack_decision(knapsack: Instance, D, alpha=1, beta=1) -> Instance:
    """Append one item of weight B with interval (0, beta*D).

    The empty query set is then (alpha, beta)-feasible exactly when the
    original knapsack optimum reaches D.
    """
    D, alpha, beta = parse_rational(D), parse_rational(alpha), parse_rational(beta)
    if D <= 0:
        raise ParameterError("D must be positive")
    if alpha < 1 or beta < 1:
        raise ParameterError("alpha and beta must be >= 1")
    if any(not it.trivial for it in knapsack.items):
        raise StructuralError("knapsack decision input must have trivial intervals only")
    eps = min(D, Fraction(1)) / 2
    extra = Item(knapsack.n + 1, knapsack.capacity, eps, Interval(Fraction(0), beta * D))
    return Instance(knapsack.items + (extra,), knapsack.capacity)
