import random
import threading
import time

import pytest

from rosa import KeyPattern, construct, empty, identity, selector
from rosa.errors import (ArityError, InvalidSizeError, NoSuchFileError,
                         NoSuchProcessError, WaitTimeoutError)
from rosa.kernel import (CounterAllocator, HashAllocator, KernelState,
                         fork_compressed, fork_stepwise, indicator)
from rosa.semiring import preset

PT = preset("plus.times")


def entries(a):
    return dict(a.items())


# -- allocators --------------------------------------------------------

def test_counter_allocator():
    alloc = CounterAllocator()
    assert alloc.take(1) == [1]
    assert alloc.take(3) == [2, 3, 4]


def test_hash_allocator_collision_free():
    alloc = HashAllocator(seed=42)
    seen = set()
    for _ in range(100):
        batch = alloc.take(10_000)
        for pid in batch:
            assert pid not in seen  # set oracle
            seen.add(pid)
    assert len(seen) == 1_000_000


def test_hash_allocator_deterministic():
    assert HashAllocator(7).take(50) == HashAllocator(7).take(50)


# -- fork --------------------------------------------------------------

def test_fork_single_matches_hand_evaluation():
    st = KernelState()
    st.spawn(pid=1, memory=100)
    new = st.fork([1])
    assert new == [2]
    assert entries(st.P) == {
        (1, "current|1"): 1,
        (1, "memory"): 100,
        (1, "child|2"): 1,
        (2, "current|1"): 1,
        (2, "memory"): 100,
        (2, "parent|1"): 1,
    }


def test_fork_empty_is_noop():
    st = KernelState()
    st.spawn(pid=1)
    before = st.P
    assert st.fork([]) == []
    assert st.P == before


def test_fork_unknown_pid():
    st = KernelState()
    with pytest.raises(NoSuchProcessError):
        st.fork([1])


def test_fork_fanout():
    st = KernelState()
    st.spawn(pid=1, memory=10)
    new = st.fork([1], fanout=3)
    assert len(new) == 3
    for pid in new:
        assert st.P.get(pid, "memory") == 10
        assert st.P.get(pid, f"parent|1") == 1
        assert st.P.get(1, f"child|{pid}") == 1


def test_fork_conservation():
    st = KernelState()
    for pid in (1, 2, 3):
        st.spawn(pid=pid, memory=50)
    live_before = len(st.P.row_keys())
    nnz_before = st.P.nnz()
    copied = sum(len(st.P.row(p)) for p in (1, 2))
    st.fork([1, 2])
    assert len(st.P.row_keys()) == live_before + 2
    assert st.P.nnz() == nnz_before + copied + 2 * 2


def _random_state(rng):
    st = KernelState()
    n = rng.randint(1, 8)
    for pid in range(1, n + 1):
        st.spawn(pid=pid, memory=rng.randint(1, 500))
    # sprinkle extra metadata
    for pid in range(1, n + 1):
        if rng.random() < 0.5:
            st.chdir([pid], rng.choice(["/", "/tmp", "/home"]))
        if rng.random() < 0.3:
            st.sleep([pid], rng.randint(1, 9))
    return st


def test_fork_stepwise_equals_compressed_randomized():
    rng = random.Random(2024)
    for _ in range(200):
        st = _random_state(rng)
        live = st.P.row_keys()
        srcs = rng.sample(live, rng.randint(1, len(live)))
        new_pids = st.allocproc(len(srcs))
        a = fork_stepwise(st.P, srcs, new_pids, PT)
        b = fork_compressed(st.P, srcs, new_pids, PT)
        assert a == b


def test_merge_fork_sums_rows():
    st = KernelState()
    st.spawn(pid=1, memory=100)
    st.spawn(pid=2, memory=50)
    new = st.merge_fork([[1, 2]])
    assert len(new) == 1
    merged = new[0]
    assert st.P.get(merged, "memory") == 150
    # both current|1 indicators summed: 1 + 1
    assert st.P.get(merged, "current|1") == 2
    assert st.P.get(merged, "parent|1") == 1
    assert st.P.get(merged, "parent|2") == 1
    assert st.P.get(1, f"child|{merged}") == 1
    assert st.P.get(2, f"child|{merged}") == 1


def test_merge_fork_singletons_equal_fork():
    st1 = KernelState()
    st2 = KernelState()
    for st in (st1, st2):
        st.spawn(pid=1, memory=10)
        st.spawn(pid=2, memory=20)
    st1.fork([1, 2])
    st2.merge_fork([[1], [2]])
    assert st1.P == st2.P


def test_merge_fork_empty_groups():
    st = KernelState()
    st.spawn(pid=1)
    before = st.P
    assert st.merge_fork([]) == []
    assert st.P == before


# -- exit / kill / getpid ----------------------------------------------

def test_kill_only_process_empties_table():
    st = KernelState()
    st.spawn(pid=1, memory=10)
    st.kill([1])
    assert st.P.is_empty()


def test_kill_empty_and_absent_noop():
    st = KernelState()
    st.spawn(pid=1)
    before = st.P
    st.kill([])
    st.kill([99])
    assert st.P == before


def test_kill_child_retains_dangling_indicator():
    st = KernelState()
    st.spawn(pid=1, memory=100)
    child = st.fork([1])[0]
    st.kill([child])
    assert child not in st.P.row_keys()
    assert st.P.get(1, f"child|{child}") == 1


def test_kill_after_fork_restores_nnz_minus_child_links():
    st = KernelState()
    for pid in (1, 2):
        st.spawn(pid=pid, memory=10)
    nnz_before = st.P.nnz()
    new = st.fork([1, 2])
    st.kill(new)
    assert st.P.nnz() == nnz_before + len(new)


def test_getpid():
    st = KernelState()
    assert st.getpid() == []
    st.spawn(pid=1)
    assert st.getpid() == [1]
    st.fork([1])
    assert st.getpid() == [1, 2]
    assert set(st.getpid()) <= set(st.P.row_keys())


# -- wait --------------------------------------------------------------

def test_wait_no_children_immediate():
    st = KernelState()
    st.spawn(pid=1)
    assert st.wait_children([1]) == []


def test_wait_returns_exited_child():
    st = KernelState()
    st.spawn(pid=1, memory=10)
    child = st.fork([1])[0]
    st.kill([child])
    assert st.wait_children([1]) == [child]


def test_wait_timeout_with_live_child():
    st = KernelState()
    st.spawn(pid=1, memory=10)
    st.fork([1])
    with pytest.raises(WaitTimeoutError):
        st.wait_children([1], max_polls=3)


def test_wait_sees_concurrent_kill():
    st = KernelState()
    st.spawn(pid=1, memory=10)
    child = st.fork([1])[0]

    def killer():
        time.sleep(0.05)
        st.kill([child])

    t = threading.Thread(target=killer)
    t.start()
    got = st.wait_children([1], max_polls=1000, poll_interval=0.005)
    t.join()
    assert got == [child]


# -- sleep / sbrk / chdir ----------------------------------------------

def test_sbrk_accumulates():
    st = KernelState()
    st.spawn(pid=1, memory=100)
    st.sbrk([1], 50)
    assert st.P.get(1, "memory") == 150


def test_sbrk_below_zero_rejected_before_applying():
    st = KernelState()
    st.spawn(pid=1, memory=100)
    with pytest.raises(InvalidSizeError):
        st.sbrk([1], -200)
    assert st.P.get(1, "memory") == 100


def test_sbrk_zero_rejected():
    st = KernelState()
    st.spawn(pid=1, memory=1)
    with pytest.raises(ValueError):
        st.sbrk([1], 0)


def test_sleep_accumulates():
    st = KernelState()
    st.spawn(pid=1)
    st.sleep([1], 2)
    st.sleep([1], 2)
    assert st.P.get(1, "sleep") == 4


def test_sleep_nonpositive_rejected():
    st = KernelState()
    st.spawn(pid=1)
    with pytest.raises(ValueError):
        st.sleep([1], 0)


def test_chdir_replaces():
    st = KernelState()
    st.spawn(pid=1)
    st.chdir([1], "/a")
    st.chdir([1], "/b")
    cwd_cols = [c for c in st.P.row(1) if c.startswith("cwd|")]
    assert cwd_cols == ["cwd|/b"]
    assert st.P.get(1, "cwd|/b") == 1


def test_chdir_idempotent():
    st = KernelState()
    st.spawn(pid=1)
    st.chdir([1], "/a")
    before = st.P
    st.chdir([1], "/a")
    assert st.P == before


def test_chdir_empty_identity():
    st = KernelState()
    st.spawn(pid=1)
    before = st.P
    st.chdir([], "/x")
    assert st.P == before


# -- file table --------------------------------------------------------

def _file_fragment(fid, **cols):
    rows, names, vals = [], [], []
    for name, v in cols.items():
        rows.append(fid)
        names.append(name)
        vals.append(v)
    return construct(rows, names, vals, PT)


def test_open_adds_metadata_and_flag():
    st = KernelState()
    frag = _file_fragment(1, **{"size": 42, "name|/etc/hosts": 1})
    fids = st.open(frag)
    assert fids == [1]
    assert entries(st.F) == {
        (1, "size"): 42,
        (1, "name|/etc/hosts"): 1,
        (1, "open|1"): 1,
    }


def test_open_empty():
    st = KernelState()
    assert st.open(empty(PT)) == []
    assert st.F.is_empty()


def test_close_then_reopen_restores_flag():
    st = KernelState()
    frag = _file_fragment(1, **{"size": 42})
    st.open(frag)
    st.close([1])
    assert st.F.get(1, "open|1") == 0
    assert st.F.get(1, "size") == 42
    st.open(frag)
    assert st.F.get(1, "open|1") == 1
    assert st.F.get(1, "size") == 42  # reopen does not inflate metadata


def test_close_never_opened_noop():
    st = KernelState()
    before = st.F
    st.close([9])
    assert st.F == before


def test_fstat():
    st = KernelState()
    st.open(_file_fragment(1, size=10))
    st.open(_file_fragment(2, size=20))
    assert st.fstat(st.F.row_keys()) == st.F
    assert st.fstat([]).is_empty()
    frag = st.fstat([1])
    assert frag.row_keys() == [1]
    assert frag.get(1, "size") == 10


def test_dup_copies_rows():
    st = KernelState()
    st.open(_file_fragment(5, **{"size": 10, "name|/a": 1}))
    nnz_before = st.F.nnz()
    new = st.dup([5])
    assert len(new) == 1
    assert st.F.row(new[0]) == st.F.row(5)
    assert st.F.nnz() == nnz_before + len(st.F.row(5))
    assert st.fstat(new) == identity(new, PT).array_mult(st.F)


def test_dup_unknown_file():
    st = KernelState()
    with pytest.raises(NoSuchFileError):
        st.dup([1])


def test_dup_empty():
    st = KernelState()
    assert st.dup([]) == []


def test_link_unlink_round_trip():
    st = KernelState()
    st.open(_file_fragment(1, size=10))
    before = st.F
    frag = _file_fragment(7, **{"name|/new": 1})
    st.link(frag)
    assert st.F.get(7, "name|/new") == 1
    st.unlink(frag)
    assert st.F == before
    st.unlink(frag)  # absent coordinates: identity
    assert st.F == before


def test_mkdir_leaves_closed_row():
    st = KernelState()
    fids = st.mkdir(_file_fragment(3, **{"name|/data": 1}))
    assert fids == [3]
    assert st.F.get(3, "kind|directory") == 1
    assert st.F.get(3, "name|/data") == 1
    assert st.F.get(3, "open|1") == 0


def test_mknod_and_pipe_differ_only_in_kind():
    st1 = KernelState()
    st2 = KernelState()
    st1.mknod(_file_fragment(1, size=1))
    st2.pipe(_file_fragment(1, size=1))
    assert st1.F.get(1, "kind|device-node") == 1
    assert st2.F.get(1, "kind|pipe") == 1
    assert st1.F.remove(construct([1], ["kind|device-node"], [1], PT)) == \
        st2.F.remove(construct([1], ["kind|pipe"], [1], PT))


def test_create_empty_fragment():
    st = KernelState()
    assert st.mkdir(empty(PT)) == []


def test_exec_loads_instructions():
    st = KernelState()
    st.spawn(pid=1, memory=10)
    st.exec([1], _file_fragment(100, **{"instr|sh": 1}))
    assert st.P.get(1, "instr|sh") == 1
    assert st.F.get(100, "open|1") == 1


def test_exec_replaces_not_accumulates():
    st = KernelState()
    st.spawn(pid=1, memory=10)
    st.exec([1], _file_fragment(100, **{"instr|sh": 1}))
    st.exec([1], _file_fragment(101, **{"instr|ls": 1}))
    instr_cols = [c for c in st.P.row(1) if c.startswith("instr|")]
    assert instr_cols == ["instr|ls"]
    assert st.P.get(1, "instr|ls") == 1


def test_exec_arity_mismatch():
    st = KernelState()
    st.spawn(pid=1)
    with pytest.raises(ArityError):
        st.exec([1], empty(PT))


def test_read_write_round_trip():
    st = KernelState()
    buf = construct([1, 2], ["x", "y"], [10, 20], PT)
    st.write_file(5, buf)
    assert st.read_file(5) == buf
    region = st.read_file(5, KeyPattern.keys([1]), KeyPattern.all())
    assert entries(region) == {(1, "x"): 10}


def test_read_empty_selection():
    st = KernelState()
    st.write_file(5, construct([1], ["x"], [1], PT))
    assert st.read_file(5, KeyPattern.keys([9])).is_empty()


def test_read_unknown_file():
    st = KernelState()
    with pytest.raises(NoSuchFileError):
        st.read_file(1)


# -- schema and searchability ------------------------------------------

def _populated_state():
    st = KernelState()
    st.spawn(pid=1, memory=100)
    st.spawn(pid=2, memory=200)
    st.fork([1])
    st.chdir([1, 2], "/home")
    st.sleep([2], 5)
    st.sbrk([2], 56)
    return st


def test_schema_invariants_hold():
    st = _populated_state()
    for (r, c), v in st.P.items():
        if c in ("memory", "sleep"):
            assert v > 0
        else:
            assert "|" in c and v == 1


def test_every_entry_searchable_by_selectors():
    st = _populated_state()
    for (r, c), v in st.P.items():
        row_sel = selector(KeyPattern.keys([r]), st.P.row_keys(), PT)
        col_sel = selector(KeyPattern.keys([c]), st.P.col_keys(), PT)
        hit = row_sel.array_mult(st.P).array_mult(col_sel)
        assert entries(hit) == {(r, c): v}
        if "|" in c:
            prefix = c.split("|", 1)[0] + "|"
            pref_sel = selector(KeyPattern.prefix(prefix),
                                st.P.col_keys(), PT)
            hits = row_sel.array_mult(st.P).array_mult(pref_sel)
            assert (r, c) in dict(hits.items())


def test_collect_dangling_indicators_sweep():
    st = KernelState()
    st.spawn(pid=1, memory=10)
    child = st.fork([1])[0]
    st.kill([child])
    assert st.P.get(1, f"child|{child}") == 1
    st.collect_dangling_indicators()
    assert st.P.get(1, f"child|{child}") == 0
