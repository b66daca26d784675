"""Sparse associative arrays over a pluggable semiring.

An array is an immutable sparse mapping (row key, column key) -> value.
Keys are ints or strings; ints sort before strings, ints numerically,
strings bytewise.  A value equal to the semiring's additive identity is
never stored: zero means absent.
"""

import io
import math
import re

from .errors import (AlgebraMismatchError, ArityError, KeyFormatError,
                     NotASelectorError, ParseError)

_INT_RE = re.compile(r"-?\d+")


def key_order(k):
    """Total order over keys: integers first (numeric), then texts (bytewise)."""
    if isinstance(k, str):
        return (1, k)
    return (0, k)


def _check_key(k):
    if isinstance(k, bool) or not isinstance(k, (int, str)):
        raise KeyFormatError(f"key {k!r} is not an integer or text")
    if isinstance(k, str) and ("\t" in k or "\n" in k):
        raise KeyFormatError(f"key {k!r} contains a tab or newline")
    return k


class KeyPattern:
    """Selector pattern: an explicit key list, a text prefix, or everything."""

    __slots__ = ("kind", "arg")

    def __init__(self, kind, arg=None):
        self.kind = kind
        self.arg = arg

    @classmethod
    def all(cls):
        return cls("all")

    @classmethod
    def prefix(cls, text):
        return cls("prefix", text)

    @classmethod
    def keys(cls, keys):
        return cls("keys", frozenset(keys))

    @classmethod
    def parse(cls, text):
        """"*" selects everything, "foo|*" selects by prefix, anything else
        is a literal key (decimal text becomes an integer key)."""
        if text == "*":
            return cls.all()
        if text.endswith("*"):
            return cls.prefix(text[:-1])
        if _INT_RE.fullmatch(text):
            return cls.keys([int(text)])
        return cls.keys([text])

    def matches(self, key):
        if self.kind == "all":
            return True
        if self.kind == "prefix":
            return isinstance(key, str) and key.startswith(self.arg)
        return key in self.arg

    def __repr__(self):
        if self.kind == "all":
            return "KeyPattern.all()"
        if self.kind == "prefix":
            return f"KeyPattern.prefix({self.arg!r})"
        return f"KeyPattern.keys({sorted(self.arg, key=key_order)!r})"


class AssociativeArray:
    """Immutable sparse array; all operations return new arrays."""

    __slots__ = ("semiring", "_entries", "_rows")

    def __init__(self, semiring, entries=None):
        self.semiring = semiring
        self._entries = dict(entries) if entries else {}
        self._rows = None

    @classmethod
    def _wrap(cls, semiring, entries):
        # Internal: entries must already be zero-free with valid keys.
        a = cls.__new__(cls)
        a.semiring = semiring
        a._entries = entries
        a._rows = None
        return a

    # -- interrogation -------------------------------------------------

    def nnz(self):
        return len(self._entries)

    def is_empty(self):
        return not self._entries

    def get(self, row, col, default=None):
        if default is None:
            default = self.semiring.zero
        return self._entries.get((row, col), default)

    def items(self):
        """Entries in sorted coordinate order."""
        return sorted(self._entries.items(),
                      key=lambda kv: (key_order(kv[0][0]), key_order(kv[0][1])))

    def row_keys(self):
        return sorted({r for r, _ in self._entries}, key=key_order)

    def col_keys(self):
        return sorted({c for _, c in self._entries}, key=key_order)

    def _row_index(self):
        if self._rows is None:
            rows = {}
            for (r, c), v in self._entries.items():
                rows.setdefault(r, []).append((c, v))
            self._rows = rows
        return self._rows

    def row(self, r):
        """Entries of one row as a {col: value} dict."""
        return dict(self._row_index().get(r, ()))

    def equals(self, other, rel_tol=1e-12):
        """Coordinate-and-value equality; floats compared at relative
        tolerance, everything else exactly."""
        if self._entries.keys() != other._entries.keys():
            return False
        for k, v in self._entries.items():
            w = other._entries[k]
            if isinstance(v, float) or isinstance(w, float):
                if v == w:
                    continue
                if math.isinf(v) or math.isinf(w):
                    return False
                if not math.isclose(v, w, rel_tol=rel_tol):
                    return False
            elif v != w:
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, AssociativeArray):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __repr__(self):
        return (f"<AssociativeArray {self.semiring.name} "
                f"nnz={len(self._entries)}>")

    # -- algebra -------------------------------------------------------

    def _check_same_algebra(self, other):
        if self.semiring.name != other.semiring.name or \
                self.semiring.universe != other.semiring.universe:
            raise AlgebraMismatchError(
                f"cannot combine {self.semiring.name} with "
                f"{other.semiring.name}")

    def ewise_add(self, other):
        """Element-wise sum: union of coordinates, overlaps combined."""
        self._check_same_algebra(other)
        s = self.semiring
        out = dict(self._entries)
        for k, v in other._entries.items():
            if k in out:
                w = s.add(out[k], v)
                if s.is_zero(w):
                    del out[k]
                else:
                    out[k] = w
            else:
                out[k] = v
        return AssociativeArray._wrap(s, out)

    def ewise_mult(self, other):
        """Element-wise product: intersection of coordinates."""
        self._check_same_algebra(other)
        s = self.semiring
        out = {}
        small, big = (self, other) if self.nnz() <= other.nnz() else (other, self)
        for k, v in small._entries.items():
            w = big._entries.get(k)
            if w is None:
                continue
            if small is self:
                p = s.mult(v, w)
            else:
                p = s.mult(w, v)
            if not s.is_zero(p):
                out[k] = p
        return AssociativeArray._wrap(s, out)

    def array_mult(self, other):
        """Array product: contraction over shared inner keys."""
        self._check_same_algebra(other)
        s = self.semiring
        add, mult, zero = s.add, s.mult, s.zero
        brows = other._row_index()
        out = {}
        for (r, k), v in self._entries.items():
            brow = brows.get(k)
            if brow is None:
                continue
            for c, w in brow:
                p = mult(v, w)
                key = (r, c)
                if key in out:
                    out[key] = add(out[key], p)
                else:
                    out[key] = p
        for key in [k for k, v in out.items() if v == zero]:
            del out[key]
        return AssociativeArray._wrap(s, out)

    def transpose(self):
        out = {(c, r): v for (r, c), v in self._entries.items()}
        return AssociativeArray._wrap(self.semiring, out)

    def remove(self, other):
        """Structural removal: drop every coordinate occupied by ``other``,
        whatever its value there."""
        self._check_same_algebra(other)
        out = {k: v for k, v in self._entries.items()
               if k not in other._entries}
        return AssociativeArray._wrap(self.semiring, out)


def construct(rows, cols, vals, s):
    """Build an array from parallel key/value vectors.

    A scalar ``vals`` is broadcast across all coordinate pairs.  Duplicate
    coordinates combine with the semiring's add; zeros are dropped.
    """
    rows = list(rows)
    cols = list(cols)
    if not isinstance(vals, (list, tuple)):
        vals = [vals] * len(rows)
    else:
        vals = list(vals)
    if not (len(rows) == len(cols) == len(vals)):
        raise ArityError(
            f"length mismatch: {len(rows)} rows, {len(cols)} cols, "
            f"{len(vals)} values")
    out = {}
    for r, c, v in zip(rows, cols, vals):
        _check_key(r)
        _check_key(c)
        s.require_domain(v)
        key = (r, c)
        if key in out:
            v = s.add(out[key], v)
        if s.is_zero(v):
            out.pop(key, None)
        else:
            out[key] = v
    return AssociativeArray._wrap(s, out)


def identity_pairs(rows, cols, s):
    """One-per-row, one-per-column array of multiplicative ones: the
    selector/permutation building block."""
    rows = list(rows)
    cols = list(cols)
    if len(rows) != len(cols):
        raise ArityError(
            f"length mismatch: {len(rows)} rows, {len(cols)} cols")
    if len(set(rows)) != len(rows):
        raise NotASelectorError("duplicate row key among selector pairs")
    if len(set(cols)) != len(cols):
        raise NotASelectorError("duplicate column key among selector pairs")
    out = {}
    for r, c in zip(rows, cols):
        _check_key(r)
        _check_key(c)
        out[(r, c)] = s.one
    return AssociativeArray._wrap(s, out)


def identity(keys, s):
    """Square identity on a key set."""
    keys = list(keys)
    return identity_pairs(keys, keys, s)


def selector(pattern, universe, s):
    """Identity on the subset of ``universe`` matched by ``pattern``."""
    matched = sorted((k for k in universe if pattern.matches(k)),
                     key=key_order)
    return identity_pairs(matched, matched, s)


# -- TSV triple persistence -------------------------------------------


def _format_key(k):
    return str(k) if isinstance(k, int) else k


def _format_value(v):
    if isinstance(v, frozenset):
        return ",".join(sorted(v))
    if isinstance(v, int):
        return str(v)
    return repr(v)


def _parse_key(text):
    if _INT_RE.fullmatch(text):
        return int(text)
    return text


def _parse_value(text, s, lineno):
    if s.domain == "set":
        return frozenset(text.split(","))
    try:
        if _INT_RE.fullmatch(text):
            return int(text)
        return float(text)
    except ValueError:
        raise ParseError(lineno, f"bad numeric value {text!r}") from None


def save_tsv(a, destination):
    """Write the array as sorted `row<TAB>col<TAB>value` lines.

    ``destination`` is a path or a text file object.  Output is
    byte-reproducible for a given array.
    """
    if hasattr(destination, "write"):
        _write_tsv(a, destination)
    else:
        with open(destination, "w", encoding="utf-8", newline="\n") as f:
            _write_tsv(a, f)


def _write_tsv(a, f):
    for (r, c), v in a.items():
        f.write(f"{_format_key(r)}\t{_format_key(c)}\t{_format_value(v)}\n")


def dumps_tsv(a):
    buf = io.StringIO()
    _write_tsv(a, buf)
    return buf.getvalue()


def load_tsv(source, s):
    """Read a triple file back into an array over semiring ``s``.

    Raises ParseError with a 1-based line number on malformed lines and
    DomainError on values outside the semiring's domain.
    """
    if hasattr(source, "read"):
        return _read_tsv(source, s)
    with open(source, "r", encoding="utf-8", newline="\n") as f:
        return _read_tsv(f, s)


def loads_tsv(text, s):
    return _read_tsv(io.StringIO(text), s)


def _read_tsv(f, s):
    out = {}
    for lineno, line in enumerate(f, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(lineno,
                             f"expected 3 tab-separated fields, got "
                             f"{len(fields)}")
        r = _parse_key(fields[0])
        c = _parse_key(fields[1])
        v = _parse_value(fields[2], s, lineno)
        s.require_domain(v)
        key = (r, c)
        if key in out:
            v = s.add(out[key], v)
        if s.is_zero(v):
            out.pop(key, None)
        else:
            out[key] = v
    return AssociativeArray._wrap(s, out)


def empty(s):
    return AssociativeArray._wrap(s, {})
