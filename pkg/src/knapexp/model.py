"""Instances, items and the profit / upper-limit quantities defined on them.

Weights and the capacity are Python ints, every profit-like quantity is a
:class:`fractions.Fraction`.  Item ids are the positions ``1..n``.
"""
from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Optional

from .errors import StructuralError

_RATIONAL = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$")
_INTEGER = re.compile(r"^\s*(\d+)\s*$")


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` (or a bare integer) into a Fraction; q must be >= 1."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise StructuralError(f"expected a 'p/q' string, got {text!r}")
    m = _RATIONAL.match(text)
    if m is None:
        raise StructuralError(f"malformed rational {text!r}")
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den < 1:
        raise StructuralError(f"denominator must be >= 1 in {text!r}")
    return Fraction(int(m.group(1)), den)


def parse_integer(text) -> int:
    if isinstance(text, int) and not isinstance(text, bool):
        return text
    if not isinstance(text, str) or _INTEGER.match(text) is None:
        raise StructuralError(f"expected a decimal integer string, got {text!r}")
    return int(text)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Interval:
    """Open interval ``(lower, upper)`` or the trivial singleton ``{lower}``."""

    lower: Fraction
    upper: Fraction
    trivial: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lower", Fraction(self.lower))
        object.__setattr__(self, "upper", Fraction(self.upper))
        if self.trivial and self.lower != self.upper:
            raise StructuralError("a trivial interval must have lower == upper")
        if not self.trivial and not self.lower < self.upper:
            raise StructuralError("an open interval needs lower < upper")

    @classmethod
    def point(cls, value) -> "Interval":
        return cls(value, value, True)

    def contains(self, x) -> bool:
        if self.trivial:
            return x == self.lower
        return self.lower < x < self.upper


@dataclass(frozen=True)
class Item:
    id: int
    weight: int
    profit: Fraction
    interval: Interval

    def __post_init__(self):
        object.__setattr__(self, "profit", Fraction(self.profit))
        if not isinstance(self.weight, int) or self.weight < 1:
            raise StructuralError(f"item {self.id}: weight must be a positive integer")
        if self.profit < 0:
            raise StructuralError(f"item {self.id}: profit must be >= 0")
        if not self.interval.contains(self.profit):
            raise StructuralError(
                f"item {self.id}: profit {self.profit} outside its uncertainty interval")

    @property
    def upper(self) -> Fraction:
        return self.interval.upper

    @property
    def lower(self) -> Fraction:
        return self.interval.lower

    @property
    def trivial(self) -> bool:
        return self.interval.trivial

    def upper_after(self, queried: bool) -> Fraction:
        """U_i(Q): the profit once queried, the upper limit otherwise."""
        return self.profit if queried else self.interval.upper


@dataclass(frozen=True)
class Instance:
    """Knapsack instance with uncertain profits.  Immutable."""

    items: tuple
    capacity: int
    _nontrivial: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if not isinstance(self.capacity, int) or self.capacity < 1:
            raise StructuralError("capacity must be a positive integer")
        for pos, item in enumerate(self.items, start=1):
            if item.id != pos:
                raise StructuralError(f"item ids must be 1..n without gaps; got {item.id} at {pos}")
            if item.weight > self.capacity:
                raise StructuralError(f"item {item.id}: weight exceeds capacity")
        object.__setattr__(
            self, "_nontrivial", frozenset(it.id for it in self.items if not it.trivial))

    @classmethod
    def build(cls, capacity: int, rows: Iterable) -> "Instance":
        """Build from ``(weight, profit, lower, upper)`` rows; ``lower is None``
        (or lower == upper == profit) makes the item trivial."""
        items = []
        for pos, (w, p, lo, up) in enumerate(rows, start=1):
            p = Fraction(p)
            if lo is None or (Fraction(lo) == Fraction(up) == p):
                interval = Interval.point(p)
            else:
                interval = Interval(lo, up)
            items.append(Item(pos, w, p, interval))
        return cls(tuple(items), capacity)

    def __len__(self):
        return len(self.items)

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def ids(self) -> range:
        return range(1, len(self.items) + 1)

    def item(self, i: int) -> Item:
        if not 1 <= i <= len(self.items):
            raise StructuralError(f"unknown item id {i!r}")
        return self.items[i - 1]

    @property
    def nontrivial_ids(self) -> frozenset:
        return self._nontrivial

    @property
    def trivial_ids(self) -> frozenset:
        return frozenset(self.ids) - self._nontrivial

    def ids_of(self, members: Iterable[int]) -> frozenset:
        """Validate an id collection (query set or item set)."""
        out = frozenset(members)
        for i in out:
            if not isinstance(i, int) or not 1 <= i <= len(self.items):
                raise StructuralError(f"unknown item id {i!r}")
        return out

    def packing(self, members: Iterable[int]) -> frozenset:
        out = self.ids_of(members)
        if weight(self, out) > self.capacity:
            raise StructuralError("not a packing: total weight exceeds the capacity")
        return out

    def is_packing(self, members: Iterable[int]) -> bool:
        return weight(self, self.ids_of(members)) <= self.capacity

    def uppers_after(self, query_set: Iterable[int] = ()) -> list:
        """Vector of U_i(Q) indexed by position (id - 1)."""
        q = self.ids_of(query_set)
        return [it.upper_after(it.id in q) for it in self.items]

    def profits(self) -> list:
        return [it.profit for it in self.items]

    def with_queried(self, query_set: Iterable[int]) -> "Instance":
        """Copy where every queried item's interval becomes ``{p_i}``."""
        q = self.ids_of(query_set)
        items = tuple(
            Item(it.id, it.weight, it.profit, Interval.point(it.profit))
            if it.id in q and not it.trivial else it
            for it in self.items)
        return Instance(items, self.capacity)

    def restricted(self, keep: Iterable[int]) -> tuple:
        """Sub-instance on ``keep`` (renumbered 1..k) and the id map back."""
        keep = sorted(self.ids_of(keep))
        items = tuple(
            Item(pos, self.items[i - 1].weight, self.items[i - 1].profit, self.items[i - 1].interval)
            for pos, i in enumerate(keep, start=1))
        return Instance(items, self.capacity), keep


def profit(instance: Instance, packing: Iterable[int]) -> Fraction:
    """p(P)."""
    return sum((instance.item(i).profit for i in instance.ids_of(packing)), Fraction(0))


def upper_limit(instance: Instance, packing: Iterable[int]) -> Fraction:
    """U_P, the upper limit before any query."""
    return sum((instance.item(i).upper for i in instance.ids_of(packing)), Fraction(0))


def upper_limit_after(instance: Instance, packing: Iterable[int], query_set: Iterable[int]) -> Fraction:
    """U_P(Q) = sum of U_i over P minus Q plus sum of p_i over P and Q."""
    q = instance.ids_of(query_set)
    return sum((instance.item(i).upper_after(i in q) for i in instance.ids_of(packing)),
               Fraction(0))


def weight(instance: Instance, item_set: Iterable[int]) -> int:
    """w(S); no capacity check."""
    return sum(instance.item(i).weight for i in instance.ids_of(item_set))


def common_denominator(values: Iterable[Fraction]) -> int:
    out = 1
    for v in values:
        out = lcm(out, Fraction(v).denominator)
    return out


# ---------------------------------------------------------------------------
# JSON file format
# ---------------------------------------------------------------------------

_TOP_KEYS = {"capacity", "items", "threshold", "meta"}
_ITEM_KEYS = {"id", "weight", "lower", "upper", "profit", "trivial"}


def _item_line(text: str, index: int) -> Optional[int]:
    hits = [m.start() for m in re.finditer(r'"id"\s*:', text)]
    if index < len(hits):
        return text.count("\n", 0, hits[index]) + 1
    return None


def _field(row: dict, key: str, parser):
    try:
        return parser(row[key])
    except StructuralError as exc:
        raise StructuralError(f"field '{key}': {exc}") from None


def loads_instance(text: str) -> tuple:
    """Parse the JSON instance format.

    Returns ``(instance, threshold, meta)``; threshold is None unless the file
    carries one (prefix-problem files do).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise StructuralError("line 1: top level must be an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise StructuralError(f"unknown top-level field(s): {sorted(unknown)}")
    for key in ("capacity", "items"):
        if key not in doc:
            raise StructuralError(f"missing field '{key}'")
    try:
        capacity = parse_integer(doc["capacity"])
    except StructuralError as exc:
        raise StructuralError(f"field 'capacity': {exc}") from None
    if not isinstance(doc["items"], list):
        raise StructuralError("field 'items' must be a list")

    items = []
    for k, row in enumerate(doc["items"]):
        where = f"items[{k}]"
        line = _item_line(text, k)
        if line is not None:
            where = f"line {line}: {where}"
        try:
            if not isinstance(row, dict):
                raise StructuralError("must be an object")
            missing = _ITEM_KEYS - set(row)
            if missing:
                raise StructuralError(f"missing field(s) {sorted(missing)}")
            extra = set(row) - _ITEM_KEYS
            if extra:
                raise StructuralError(f"unknown field(s) {sorted(extra)}")
            if row["id"] != k + 1:
                raise StructuralError(f"field 'id': expected {k + 1}, got {row['id']!r}")
            if not isinstance(row["trivial"], bool):
                raise StructuralError("field 'trivial' must be a boolean")
            w = _field(row, "weight", parse_integer)
            if w > capacity:
                raise StructuralError("field 'weight': exceeds capacity")
            interval = Interval(_field(row, "lower", parse_rational),
                                _field(row, "upper", parse_rational), row["trivial"])
            items.append(Item(k + 1, w, _field(row, "profit", parse_rational), interval))
        except StructuralError as exc:
            raise StructuralError(f"{where}: {exc}") from None

    threshold = None
    if "threshold" in doc:
        try:
            threshold = parse_rational(doc["threshold"])
        except StructuralError as exc:
            raise StructuralError(f"field 'threshold': {exc}") from None
    return Instance(tuple(items), capacity), threshold, doc.get("meta")


def load_instance(path) -> tuple:
    with open(path, encoding="utf-8") as fh:
        return loads_instance(fh.read())


def instance_to_dict(instance: Instance, threshold=None, meta=None) -> dict:
    doc = {
        "capacity": str(instance.capacity),
        "items": [
            {
                "id": it.id,
                "weight": str(it.weight),
                "lower": format_rational(it.lower),
                "upper": format_rational(it.upper),
                "profit": format_rational(it.profit),
                "trivial": it.trivial,
            }
            for it in instance.items
        ],
    }
    if threshold is not None:
        doc["threshold"] = format_rational(threshold)
    if meta is not None:
        doc["meta"] = meta
    return doc


def dumps_instance(instance: Instance, threshold=None, meta=None) -> str:
    return json.dumps(instance_to_dict(instance, threshold, meta), indent=1) + "\n"


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------

_DENOMINATORS = (1, 1, 2, 3, 4, 5, 6)


def random_instance(n: int, weight_cap: int, seed: int = 0, *, upper_cap: int = 50,
                    trivial_prob: float = 0.2) -> Instance:
    """Reproducible random instance: weights in 1..weight_cap, rational
    upper limits in (0, upper_cap], roughly ``trivial_prob`` trivial items."""
    if n < 0 or weight_cap < 1 or upper_cap < 1:
        raise StructuralError("need n >= 0, weight_cap >= 1 and upper_cap >= 1")
    rng = random.Random(seed)
    weights = [rng.randint(1, weight_cap) for _ in range(n)]
    total = sum(weights)
    wmax = max(weights, default=1)
    hi = max(wmax, (3 * total) // 4)
    lo = max(wmax, total // 3)
    capacity = rng.randint(min(lo, hi), hi)
    rows = []
    for w in weights:
        den = rng.choice(_DENOMINATORS)
        up = Fraction(rng.randint(1, upper_cap * den), den)
        if rng.random() < trivial_prob:
            rows.append((w, up, None, up))
            continue
        low = up * Fraction(rng.randint(0, 6), 8)
        p = low + (up - low) * Fraction(rng.randint(1, 9), 10)
        rows.append((w, p, low, up))
    return Instance.build(capacity, rows)
