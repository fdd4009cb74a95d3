"""Integer-interval and four-valued Boolean abstract domains.

These back the analyzer's abstract expression evaluation.  Intervals
have integer endpoints with None standing for an infinite bound; the
Boolean lattice is BOT <= TT, FF <= TOP.  All operations are sound and,
for intervals over the listed arithmetic, optimal; no widening lives
here because the analyzer only iterates on the polyhedral store.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


@dataclass(frozen=True)
class Interval:
    """[lo, hi] with None = unbounded; the empty interval is bottom."""

    lo: int | None
    hi: int | None
    empty: bool = False

    def __post_init__(self):
        if not self.empty and self.lo is not None and self.hi is not None:
            if self.lo > self.hi:
                raise ValueError(f"bad interval [{self.lo}, {self.hi}]")

    @staticmethod
    def bottom() -> Interval:
        return Interval(None, None, empty=True)

    @staticmethod
    def top() -> Interval:
        return Interval(None, None)

    @staticmethod
    def singleton(m: int) -> Interval:
        return Interval(m, m)

    def is_bottom(self) -> bool:
        return self.empty

    def contains(self, m: int) -> bool:
        if self.empty:
            return False
        if self.lo is not None and m < self.lo:
            return False
        if self.hi is not None and m > self.hi:
            return False
        return True

    def join(self, other: Interval) -> Interval:
        if self.empty:
            return other
        if other.empty:
            return self
        lo = None if self.lo is None or other.lo is None else min(self.lo, other.lo)
        hi = None if self.hi is None or other.hi is None else max(self.hi, other.hi)
        return Interval(lo, hi)

    def meet(self, other: Interval) -> Interval:
        if self.empty or other.empty:
            return Interval.bottom()
        lo = self.lo if other.lo is None else (other.lo if self.lo is None else max(self.lo, other.lo))
        hi = self.hi if other.hi is None else (other.hi if self.hi is None else min(self.hi, other.hi))
        if lo is not None and hi is not None and lo > hi:
            return Interval.bottom()
        return Interval(lo, hi)

    def leq(self, other: Interval) -> bool:
        if self.empty:
            return True
        if other.empty:
            return False
        if other.lo is not None and (self.lo is None or self.lo < other.lo):
            return False
        if other.hi is not None and (self.hi is None or self.hi > other.hi):
            return False
        return True


def alpha_int(values) -> Interval:
    """Abstraction of a finite set of integers (or None for all of Int)."""
    if values is None:
        return Interval.top()
    values = list(values)
    if not values:
        return Interval.bottom()
    return Interval(min(values), max(values))


def _add(a: int | None, b: int | None) -> int | None:
    return None if a is None or b is None else a + b


def _neg(a: int | None) -> int | None:
    return None if a is None else -a


def int_add(a: Interval, b: Interval) -> Interval:
    if a.empty or b.empty:
        return Interval.bottom()
    return Interval(_add(a.lo, b.lo), _add(a.hi, b.hi))


def int_sub(a: Interval, b: Interval) -> Interval:
    if a.empty or b.empty:
        return Interval.bottom()
    return Interval(_add(a.lo, _neg(b.hi)), _add(a.hi, _neg(b.lo)))


def _mul_bound(a: int | None, a_sign: int, b: int | None, b_sign: int):
    """Product of two endpoint values, None meaning an infinity.

    a_sign/b_sign give the sign of the infinity (-1 for lo, +1 for hi);
    0 * infinity is 0 because the underlying sets are real subsets.
    """
    if a is None and b is None:
        return None, a_sign * b_sign
    if a is None:
        if b == 0:
            return 0, 0
        return None, a_sign * (1 if b > 0 else -1)
    if b is None:
        if a == 0:
            return 0, 0
        return None, b_sign * (1 if a > 0 else -1)
    return a * b, 0


def int_mul(a: Interval, b: Interval) -> Interval:
    if a.empty or b.empty:
        return Interval.bottom()
    candidates = []
    for av, asign in ((a.lo, -1), (a.hi, 1)):
        for bv, bsign in ((b.lo, -1), (b.hi, 1)):
            candidates.append(_mul_bound(av, asign, bv, bsign))
    finite = [v for v, _ in candidates if v is not None]
    has_neg_inf = any(v is None and s < 0 for v, s in candidates)
    has_pos_inf = any(v is None and s > 0 for v, s in candidates)
    lo = None if has_neg_inf else min(finite)
    hi = None if has_pos_inf else max(finite)
    return Interval(lo, hi)


def int_arith(op: str, a: Interval, b: Interval) -> Interval:
    if op == "+":
        return int_add(a, b)
    if op == "-":
        return int_sub(a, b)
    if op == "*":
        return int_mul(a, b)
    raise ValueError(f"unknown arithmetic operator {op!r}")


class AbstractBool(Enum):
    BOT = "bot"
    TT = "tt"
    FF = "ff"
    TOP = "top"

    def join(self, other: AbstractBool) -> AbstractBool:
        if self is other or other is AbstractBool.BOT:
            return self
        if self is AbstractBool.BOT:
            return other
        return AbstractBool.TOP

    def meet(self, other: AbstractBool) -> AbstractBool:
        if self is other or other is AbstractBool.TOP:
            return self
        if self is AbstractBool.TOP:
            return other
        return AbstractBool.BOT

    def leq(self, other: AbstractBool) -> bool:
        return self.join(other) is other


def gamma_bool(t: AbstractBool) -> frozenset[bool]:
    return {
        AbstractBool.BOT: frozenset(),
        AbstractBool.TT: frozenset([True]),
        AbstractBool.FF: frozenset([False]),
        AbstractBool.TOP: frozenset([True, False]),
    }[t]


def alpha_bool(values) -> AbstractBool:
    s = frozenset(values)
    if not s:
        return AbstractBool.BOT
    if s == {True}:
        return AbstractBool.TT
    if s == {False}:
        return AbstractBool.FF
    return AbstractBool.TOP


def bool_not(t: AbstractBool) -> AbstractBool:
    return alpha_bool({not v for v in gamma_bool(t)})


def bool_or(a: AbstractBool, b: AbstractBool) -> AbstractBool:
    return alpha_bool({x or y for x in gamma_bool(a) for y in gamma_bool(b)})


def bool_and(a: AbstractBool, b: AbstractBool) -> AbstractBool:
    return alpha_bool({x and y for x in gamma_bool(a) for y in gamma_bool(b)})


def int_compare(op: str, a: Interval, b: Interval) -> AbstractBool:
    """Abstract = / < on intervals: TT/FF when the relation is decided."""
    if a.empty or b.empty:
        return AbstractBool.BOT
    if op == "=":
        disjoint = (
            (a.hi is not None and b.lo is not None and a.hi < b.lo)
            or (b.hi is not None and a.lo is not None and b.hi < a.lo)
        )
        if disjoint:
            return AbstractBool.FF
        if a.lo is not None and a.lo == a.hi == b.lo == b.hi:
            return AbstractBool.TT
        return AbstractBool.TOP
    if op == "<":
        if a.hi is not None and b.lo is not None and a.hi < b.lo:
            return AbstractBool.TT
        if b.hi is not None and a.lo is not None and b.hi <= a.lo:
            return AbstractBool.FF
        return AbstractBool.TOP
    raise ValueError(f"unknown comparison {op!r}")
