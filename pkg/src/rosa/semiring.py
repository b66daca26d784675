"""Pluggable value algebras: (add, mult, zero, one) over a value domain.

Values are plain Python scalars: ints/floats for the numeric algebras,
frozensets of strings for the set algebra.  The additive identity of each
algebra doubles as the "absent" marker in sparse arrays, so it is never
stored explicitly.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import DomainError, UnsupportedSemiringError

NEG_INF = float("-inf")
POS_INF = float("inf")

# Value-domain tags.  "number" admits any finite int/float; "nonneg" and
# "positive" restrict the sign (needed so 0 / +inf annihilate under x);
# "set" admits frozensets drawn from the algebra's universe.
_NUMERIC_DOMAINS = ("number", "nonneg", "positive")


@dataclass(frozen=True)
class Semiring:
    name: str
    zero: object
    one: object
    add: Callable
    mult: Callable
    domain: str
    universe: frozenset = field(default=frozenset())

    def in_domain(self, v):
        if self.domain == "set":
            return isinstance(v, frozenset) and v <= self.universe
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            return False
        if v != v:  # NaN
            return False
        if self.domain == "nonneg":
            return v >= 0
        if self.domain == "positive":
            return v > 0
        return True

    def require_domain(self, v):
        if not self.in_domain(v):
            raise DomainError(f"{v!r} outside domain of semiring {self.name}")

    def is_zero(self, v):
        return v == self.zero

    def values_equal(self, x, y, rel_tol=1e-9):
        """Equality used by law checks: exact for ints/sets, relative
        tolerance for non-integral floats."""
        if self.domain == "set":
            return x == y
        if isinstance(x, float) or isinstance(y, float):
            if x == y:
                return True
            if math.isinf(x) or math.isinf(y):
                return x == y
            if float(x).is_integer() and float(y).is_integer():
                return float(x) == float(y)
            return math.isclose(x, y, rel_tol=rel_tol)
        return x == y


def _mk_plus_times():
    return Semiring("plus.times", 0, 1, lambda x, y: x + y, lambda x, y: x * y,
                    "number")


def _mk_max_plus():
    def mult(x, y):
        if x == NEG_INF or y == NEG_INF:
            return NEG_INF
        return x + y

    return Semiring("max.plus", NEG_INF, 0, max, mult, "number")


def _mk_min_plus():
    def mult(x, y):
        if x == POS_INF or y == POS_INF:
            return POS_INF
        return x + y

    return Semiring("min.plus", POS_INF, 0, min, mult, "number")


def _mk_max_times():
    # Restricted to nonnegative numbers so that 0 annihilates under x.
    return Semiring("max.times", 0, 1, max, lambda x, y: x * y, "nonneg")


def _mk_min_times():
    # Positive numbers only: a stored 0 would not be annihilated by +inf.
    def mult(x, y):
        if x == POS_INF or y == POS_INF:
            return POS_INF
        return x * y

    return Semiring("min.times", POS_INF, 1, min, mult, "positive")


def _mk_max_min():
    return Semiring("max.min", NEG_INF, POS_INF, max, min, "number")


def _mk_min_max():
    return Semiring("min.max", POS_INF, NEG_INF, min, max, "number")


def _mk_union_intersection(universe):
    uni = frozenset(universe)
    return Semiring("union.intersection", frozenset(), uni,
                    lambda x, y: x | y, lambda x, y: x & y,
                    "set", universe=uni)


PRESET_NAMES = ("plus.times", "union.intersection", "max.plus", "min.plus",
                "max.times", "min.times", "max.min", "min.max")


def preset(name, universe=None):
    """Build one of the eight stock algebras by name.

    ``union.intersection`` needs an explicit finite ``universe`` of strings;
    its multiplicative identity is the whole universe.
    """
    if name == "plus.times":
        return _mk_plus_times()
    if name == "max.plus":
        return _mk_max_plus()
    if name == "min.plus":
        return _mk_min_plus()
    if name == "max.times":
        return _mk_max_times()
    if name == "min.times":
        return _mk_min_times()
    if name == "max.min":
        return _mk_max_min()
    if name == "min.max":
        return _mk_min_max()
    if name == "union.intersection":
        if universe is None:
            raise UnsupportedSemiringError(
                "union.intersection needs an explicit universe")
        return _mk_union_intersection(universe)
    raise UnsupportedSemiringError(f"unknown semiring {name!r}")


@dataclass
class LawResult:
    law: str
    passed: bool
    counterexample: tuple = None

    def __str__(self):
        if self.passed:
            return f"{self.law}: ok"
        return f"{self.law}: FAIL at {self.counterexample!r}"


# (law name, arity, check) where check(s, x, y, z) returns (lhs, rhs).
_LAWS = [
    ("add-commutativity",
     lambda s, x, y, z: (s.add(x, y), s.add(y, x))),
    ("add-associativity",
     lambda s, x, y, z: (s.add(s.add(x, y), z), s.add(x, s.add(y, z)))),
    ("mult-associativity",
     lambda s, x, y, z: (s.mult(s.mult(x, y), z), s.mult(x, s.mult(y, z)))),
    ("distributivity",
     lambda s, x, y, z: (s.mult(x, s.add(y, z)),
                         s.add(s.mult(x, y), s.mult(x, z)))),
    ("add-identity",
     lambda s, x, y, z: (s.add(x, s.zero), x)),
    ("mult-identity",
     lambda s, x, y, z: (s.mult(x, s.one), x)),
    ("annihilator",
     lambda s, x, y, z: (s.mult(x, s.zero), s.zero)),
]


def check_laws(s, samples):
    """Run the semiring laws over a list of (x, y, z) sample triples.

    Returns a list of LawResult, one per law, carrying the first
    counterexample found (if any).  Raises DomainError if a sample falls
    outside the algebra's domain.
    """
    for triple in samples:
        for v in triple:
            s.require_domain(v)
    results = []
    for law, check in _LAWS:
        failure = None
        for x, y, z in samples:
            lhs, rhs = check(s, x, y, z)
            if not s.values_equal(lhs, rhs):
                failure = (x, y, z)
                break
        results.append(LawResult(law, failure is None, failure))
    return results
