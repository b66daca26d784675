"""Tabular process/file kernel: system calls as associative-array equations.

The kernel keeps two global tables over the plus.times algebra:

  P — process table: integer process-ID rows, text metadata columns
  F — file table:    integer file-ID rows, text metadata columns

Columns follow a hybrid schema: the numeric fields ``memory`` and
``sleep`` hold positive numbers directly; every string-valued fact is
exploded into an indicator column ``field|value`` holding exactly 1
(e.g. ``parent|7``, ``current|1``, ``cwd|/home``, ``open|1``).  Keeping
the table numeric makes row copies via selector multiplication exact
(1 x v = v) and keeps every fact searchable by prefix.
"""

import random
import threading
import time

from . import array
from .array import KeyPattern, identity_pairs, selector
from .errors import (AllocatorExhaustedError, ArityError, InvalidSizeError,
                     NoSuchFileError, NoSuchProcessError, WaitTimeoutError)
from .semiring import preset

NUMERIC_FIELDS = ("memory", "sleep")
SEPARATOR = "|"


def indicator(field, value):
    return f"{field}{SEPARATOR}{value}"


class CounterAllocator:
    """Monotone ID counter; reproducible across runs."""

    def __init__(self, start=1):
        self._next = start

    def take(self, count):
        ids = list(range(self._next, self._next + count))
        self._next += count
        return ids

    def reserve(self, pid):
        if pid >= self._next:
            self._next = pid + 1


class HashAllocator:
    """Seeded pseudo-random 63-bit IDs, deduplicated against everything
    already issued."""

    MAX_REDRAWS = 64

    def __init__(self, seed):
        self._rng = random.Random(seed)
        self._issued = set()

    def take(self, count):
        ids = []
        for _ in range(count):
            for _ in range(self.MAX_REDRAWS):
                pid = self._rng.getrandbits(63)
                if pid not in self._issued:
                    break
            else:
                raise AllocatorExhaustedError("could not draw a fresh ID")
            self._issued.add(pid)
            ids.append(pid)
        return ids

    def reserve(self, pid):
        self._issued.add(pid)


# -- pure fork equations (shared by the kernel and its equivalence tests) --


def fork_stepwise(P, srcs, new_pids, s):
    """The four array equations of fork, applied one at a time.

    ``srcs`` and ``new_pids`` are aligned: new_pids[i] is cloned from
    srcs[i].  srcs may repeat (fan-out); new_pids may not.
    """
    sel = array.construct(new_pids, srcs, s.one, s)
    P_new = sel.array_mult(P)
    P_new = P_new.ewise_add(array.construct(
        new_pids, [indicator("parent", p) for p in srcs], s.one, s))
    P_new = P_new.ewise_add(array.construct(
        srcs, [indicator("child", q) for q in new_pids], s.one, s))
    return P.ewise_add(P_new)


def fork_compressed(P, srcs, new_pids, s):
    """The same update folded into a single accumulate expression."""
    sel = array.construct(new_pids, srcs, s.one, s)
    delta = sel.array_mult(P) \
        .ewise_add(array.construct(
            new_pids, [indicator("parent", p) for p in srcs], s.one, s)) \
        .ewise_add(array.construct(
            srcs, [indicator("child", q) for q in new_pids], s.one, s))
    return P.ewise_add(delta)


class KernelState:
    """Global tables plus allocator and context bookkeeping.

    Mutating calls are serialized by a lock (single writer); readers see
    immutable array snapshots, so polling from another thread is safe.
    """

    def __init__(self, context=1, pid_allocator=None):
        self.semiring = preset("plus.times")
        self.P = array.empty(self.semiring)
        self.F = array.empty(self.semiring)
        self.file_contents = {}
        self.context = context
        self._pids = pid_allocator or CounterAllocator()
        self._fids = CounterAllocator()
        self._lock = threading.RLock()

    # -- helpers -------------------------------------------------------

    def _one(self):
        return self.semiring.one

    def live_pids(self):
        return self.P.row_keys()

    def _require_live(self, pids):
        live = set(self.P.row_keys())
        for pid in pids:
            if pid not in live:
                raise NoSuchProcessError(f"no live process {pid}")

    def _remove_prefixed(self, table, row_ids, prefix):
        """Drop every column of ``row_ids`` starting with ``prefix``."""
        rows, cols = [], []
        for rid in row_ids:
            for c in table.row(rid):
                if isinstance(c, str) and c.startswith(prefix):
                    rows.append(rid)
                    cols.append(c)
        if not rows:
            return table
        victim = array.construct(rows, cols, self._one(), self.semiring)
        return table.remove(victim)

    # -- process calls -------------------------------------------------

    def spawn(self, pid=None, memory=None):
        """Seed an initial process row: not part of the system-call set,
        only a way to bootstrap a table."""
        with self._lock:
            if pid is None:
                pid = self._pids.take(1)[0]
            else:
                self._pids.reserve(pid)
            rows = [pid]
            cols = [indicator("current", self.context)]
            vals = [self._one()]
            if memory is not None:
                rows.append(pid)
                cols.append("memory")
                vals.append(memory)
            self.P = self.P.ewise_add(
                array.construct(rows, cols, vals, self.semiring))
            return pid

    def allocproc(self, count=1):
        with self._lock:
            return self._pids.take(count)

    def fork(self, pids, fanout=1):
        """Clone each live row of ``pids`` into ``fanout`` fresh rows and
        cross-link parent/child indicators.  Returns the new pids."""
        with self._lock:
            pids = list(pids)
            if not pids:
                return []
            self._require_live(pids)
            srcs = [p for p in pids for _ in range(fanout)]
            new_pids = self.allocproc(len(srcs))
            self.P = fork_stepwise(self.P, srcs, new_pids, self.semiring)
            return new_pids

    def merge_fork(self, groups):
        """One fresh process per group, its row the sum of the group's
        rows; every member gets linked as a parent."""
        with self._lock:
            groups = [list(g) for g in groups]
            if not groups:
                return []
            for g in groups:
                if not g:
                    raise NoSuchProcessError("empty merge group")
                self._require_live(g)
            new_pids = self.allocproc(len(groups))
            sel_rows, sel_cols = [], []
            par_rows, par_cols = [], []
            chi_rows, chi_cols = [], []
            for new, g in zip(new_pids, groups):
                for member in g:
                    sel_rows.append(new)
                    sel_cols.append(member)
                    par_rows.append(new)
                    par_cols.append(indicator("parent", member))
                    chi_rows.append(member)
                    chi_cols.append(indicator("child", new))
            one = self._one()
            s = self.semiring
            delta = array.construct(sel_rows, sel_cols, one, s) \
                .array_mult(self.P) \
                .ewise_add(array.construct(par_rows, par_cols, one, s)) \
                .ewise_add(array.construct(chi_rows, chi_cols, one, s))
            self.P = self.P.ewise_add(delta)
            return new_pids

    def kill(self, pids):
        """Delete the rows of ``pids`` outright; dangling child|/parent|
        indicators in other rows are deliberately retained."""
        with self._lock:
            pids = sorted(set(pids))
            if not pids:
                return
            sel = identity_pairs(pids, pids, self.semiring)
            self.P = self.P.remove(sel.array_mult(self.P))

    def exit(self, pids):
        self.kill(pids)

    def getpid(self):
        """All pids carrying a current| context indicator."""
        P = self.P
        sel = selector(KeyPattern.prefix(indicator("current", "")),
                       P.col_keys(), self.semiring)
        return P.array_mult(sel).row_keys()

    def children_of(self, pids):
        """Child pids recorded on the rows of ``pids``."""
        pids = sorted(set(pids))
        P = self.P
        snap = identity_pairs(pids, pids, self.semiring) \
            .array_mult(P) \
            .array_mult(selector(KeyPattern.prefix(indicator("child", "")),
                                 P.col_keys(), self.semiring))
        prefix = indicator("child", "")
        out = set()
        for c in snap.col_keys():
            out.add(int(c[len(prefix):]))
        return sorted(out)

    def wait_children(self, pids, max_polls=100, poll_interval=0.0):
        """Poll until some recorded child row has left P; returns the
        exited child pids.  Raises WaitTimeoutError after ``max_polls``
        polls with all children still live."""
        if max_polls < 1:
            raise ValueError("max_polls must be >= 1")
        for _ in range(max_polls):
            children = self.children_of(pids)
            if not children:
                return []
            live = set(self.P.row_keys())
            exited = [c for c in children if c not in live]
            if exited:
                return exited
            time.sleep(poll_interval)
        raise WaitTimeoutError(
            f"children {children} still live after {max_polls} polls")

    def sleep(self, pids, seconds):
        if seconds <= 0:
            raise ValueError("sleep duration must be positive")
        with self._lock:
            pids = list(pids)
            self._require_live(pids)
            if pids:
                self.P = self.P.ewise_add(array.construct(
                    pids, ["sleep"] * len(pids), seconds, self.semiring))

    def sbrk(self, pids, nbytes):
        """Accumulate ``nbytes`` onto each memory field; a negative value
        shrinks and is rejected if it would go below zero."""
        if nbytes == 0:
            raise ValueError("sbrk of 0 bytes")
        with self._lock:
            pids = list(pids)
            self._require_live(pids)
            for pid in pids:
                if self.P.get(pid, "memory", 0) + nbytes < 0:
                    raise InvalidSizeError(
                        f"process {pid}: memory would drop below zero")
            if pids:
                self.P = self.P.ewise_add(array.construct(
                    pids, ["memory"] * len(pids), nbytes, self.semiring))

    def chdir(self, pids, directory):
        """Replace the cwd| indicator of each row (remove then add)."""
        with self._lock:
            pids = list(pids)
            self._require_live(pids)
            if not pids:
                return
            self.P = self._remove_prefixed(self.P, pids,
                                           indicator("cwd", ""))
            self.P = self.P.ewise_add(array.construct(
                pids, [indicator("cwd", directory)] * len(pids),
                self._one(), self.semiring))

    # -- file calls ----------------------------------------------------

    def allocfile(self, count=1):
        with self._lock:
            return self._fids.take(count)

    def open(self, new_files):
        """Fold the fragment into F and flag its rows open|1.

        Coordinates already present in F are left untouched so a reopen
        restores the flag without inflating existing metadata.
        """
        with self._lock:
            fids = new_files.row_keys()
            if not fids:
                return []
            for fid in fids:
                if isinstance(fid, int):
                    self._fids.reserve(fid)
            addition = new_files.ewise_add(array.construct(
                fids, [indicator("open", 1)] * len(fids),
                self._one(), self.semiring))
            self.F = self.F.ewise_add(addition.remove(self.F))
            return fids

    def close(self, fids):
        with self._lock:
            fids = sorted(set(fids))
            if not fids:
                return
            flags = array.construct(
                fids, [indicator("open", 1)] * len(fids),
                self._one(), self.semiring)
            self.F = self.F.remove(flags)

    def fstat(self, fids):
        fids = sorted(set(fids))
        if not fids:
            return array.empty(self.semiring)
        return identity_pairs(fids, fids, self.semiring).array_mult(self.F)

    def dup(self, fids):
        """Copy the rows of ``fids`` onto freshly allocated file IDs."""
        with self._lock:
            fids = list(fids)
            if not fids:
                return []
            known = set(self.F.row_keys())
            for f in fids:
                if f not in known:
                    raise NoSuchFileError(f"no file {f}")
            new_fids = self._fids.take(len(fids))
            sel = identity_pairs(new_fids, fids, self.semiring)
            self.F = self.F.ewise_add(sel.array_mult(self.F))
            return new_fids

    def link(self, fragment):
        with self._lock:
            self.F = self.F.ewise_add(fragment)

    def unlink(self, fragment):
        with self._lock:
            self.F = self.F.remove(fragment)

    def create_file_objects(self, kind, fragment):
        """mkdir/mknod/pipe: tag with kind|<kind>, then open and close."""
        if kind not in ("directory", "device-node", "pipe"):
            raise ValueError(f"unknown file-object kind {kind!r}")
        with self._lock:
            fids = fragment.row_keys()
            if not fids:
                return []
            tagged = fragment.ewise_add(array.construct(
                fids, [indicator("kind", kind)] * len(fids),
                self._one(), self.semiring))
            created = self.open(tagged)
            self.close(created)
            return created

    def mkdir(self, fragment):
        return self.create_file_objects("directory", fragment)

    def mknod(self, fragment):
        return self.create_file_objects("device-node", fragment)

    def pipe(self, fragment):
        return self.create_file_objects("pipe", fragment)

    def exec(self, pids, fragment):
        """Open the fragment's files and load each file row into the
        paired process row, replacing its instr| columns."""
        with self._lock:
            pids = list(pids)
            rows = fragment.row_keys()
            if len(pids) != len(rows):
                raise ArityError(
                    f"{len(pids)} processes vs {len(rows)} file rows")
            if not pids:
                return
            self._require_live(pids)
            fids = self.open(fragment)
            self.P = self._remove_prefixed(self.P, pids,
                                           indicator("instr", ""))
            sel = identity_pairs(pids, fids, self.semiring)
            self.P = self.P.ewise_add(sel.array_mult(fragment))

    def read_file(self, fid, row_pattern=None, col_pattern=None):
        """Select a region of a file's contents into a buffer array."""
        contents = self.file_contents.get(fid)
        if contents is None:
            raise NoSuchFileError(f"no contents registered for file {fid}")
        row_pattern = row_pattern or KeyPattern.all()
        col_pattern = col_pattern or KeyPattern.all()
        rsel = selector(row_pattern, contents.row_keys(), contents.semiring)
        csel = selector(col_pattern, contents.col_keys(), contents.semiring)
        return rsel.array_mult(contents).array_mult(csel)

    def write_file(self, fid, buf, row_pattern=None, col_pattern=None):
        """Fold the selected region of ``buf`` into a file's contents;
        an unknown fid gets fresh empty contents first."""
        with self._lock:
            contents = self.file_contents.get(fid)
            if contents is None:
                contents = array.empty(buf.semiring)
            row_pattern = row_pattern or KeyPattern.all()
            col_pattern = col_pattern or KeyPattern.all()
            rsel = selector(row_pattern, buf.row_keys(), buf.semiring)
            csel = selector(col_pattern, buf.col_keys(), buf.semiring)
            region = rsel.array_mult(buf).array_mult(csel)
            self.file_contents[fid] = contents.ewise_add(region)

    # -- maintenance ---------------------------------------------------

    def collect_dangling_indicators(self):
        """Optional sweep: drop child|/parent| indicators that point at
        pids with no live row.  Never invoked implicitly."""
        with self._lock:
            live = set(self.P.row_keys())
            rows, cols = [], []
            for field in ("child", "parent"):
                prefix = indicator(field, "")
                for (r, c), _ in self.P.items():
                    if isinstance(c, str) and c.startswith(prefix):
                        target = c[len(prefix):]
                        if target.isdigit() and int(target) not in live:
                            rows.append(r)
                            cols.append(c)
            if rows:
                victim = array.construct(rows, cols, self._one(),
                                         self.semiring)
                self.P = self.P.remove(victim)
