import threading

import pytest
from hypothesis import given, strategies as st

from infinilog.harness import RunConfig, explore
from infinilog.checkers import check_consensus
from infinilog.substrate import (
    EMPTY, UNDECIDED, AllocationBudgetExceeded, CasCell, CasConsensusCell, ConsensusCell,
    NativeMemory, SimulatedMemory, Step, drive, propose, read,
)


def test_alloc_register_reads_initial_value():
    mem = SimulatedMemory()
    assert mem.register(0).read() == 0


def test_alloc_consensus_starts_undecided():
    assert SimulatedMemory().consensus().read() is UNDECIDED


def test_first_proposal_decides():
    c = SimulatedMemory().consensus()
    assert c.propose(5) == 5


def test_later_proposal_returns_decided_value():
    c = SimulatedMemory().consensus()
    c.propose(5)
    assert c.propose(7) == 5
    assert c.read() == 5


def test_cas_success_and_failure():
    mem = SimulatedMemory()
    x = mem.cas_cell(EMPTY)
    assert x.cas(EMPTY, "n1") is True
    assert x.read() == "n1"
    y = mem.cas_cell("a")
    assert y.cas("b", "c") is False
    assert y.read() == "a"


def test_handles_compare_by_identity():
    mem = SimulatedMemory()
    a, b = mem.consensus(), mem.consensus()
    assert a != b and a == a
    assert a.cid != b.cid


def test_allocation_budget_is_per_step():
    mem = SimulatedMemory(budget=2)
    mem.begin_local()
    mem.consensus()
    mem.consensus()
    with pytest.raises(AllocationBudgetExceeded):
        mem.consensus()
    mem.begin_local()
    mem.consensus()  # new step, fresh budget
    mem.end_local()
    for _ in range(10):
        mem.consensus()  # outside algorithm steps: unbounded


def test_spine_propose_allocates_two_cells():
    # one append on a fresh consensus log: 2 cells per spine proposal, none elsewhere when solo
    from infinilog.weaklog_consensus import WeakLogCons
    from infinilog.values import AppendedValue
    mem = SimulatedMemory()
    log = WeakLogCons(mem)
    before = mem.allocated
    drive(log.append(AppendedValue("v")))
    assert mem.allocated - before == 2


@pytest.mark.parametrize("via_cas", [False, True])
def test_two_proposers_agree_in_every_interleaving(via_cas):
    cfg = RunConfig(algorithm="consensus", procs=2, consensus_via_cas=via_cas)
    histories = list(explore(cfg))
    # native propose is one step: 2 interleavings; emulated is cas+read: C(4,2)
    assert len(histories) == (6 if via_cas else 2)
    for h in histories:
        v = check_consensus(h)
        assert v.passed, v.failures()
        answers = {e["out"] for e in h.of_kind("respond")}
        assert answers <= {"v0.0", "v1.0"} and len(answers) == 1


def test_emulated_consensus_matches_native_observations():
    def observed(via_cas):
        outs = set()
        for h in explore(RunConfig(algorithm="consensus", procs=2, consensus_via_cas=via_cas)):
            outs.add(tuple(sorted((e["pid"], e["out"]) for e in h.of_kind("respond"))))
        return outs
    assert observed(False) == observed(True)


def test_emulated_propose_is_cas_then_read():
    mem = SimulatedMemory(consensus_via_cas=True)
    c = mem.consensus()
    assert isinstance(c, CasConsensusCell)
    gen = propose(c, "a", "t")
    first = next(gen)
    assert (first.op, first.args) == ("cas", (UNDECIDED, "a"))
    second = gen.send(first.execute())
    assert second.op == "read"
    with pytest.raises(StopIteration) as stop:
        gen.send(second.execute())
    assert stop.value.value == "a"
    assert drive(read(c)) == "a"


@given(st.lists(st.tuples(st.sampled_from(["propose", "read"]), st.integers(0, 5)), max_size=30))
def test_consensus_cell_sticky(ops):
    c = ConsensusCell("c", threading.Lock())
    proposed, seen = [], set()
    for kind, v in ops:
        if kind == "propose":
            proposed.append(v)
            seen.add(c.propose(v))
        elif (r := c.read()) is not UNDECIDED:
            seen.add(r)
    assert len(seen) <= 1
    if seen:
        assert seen.pop() == proposed[0]


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=30))
def test_cas_cell_matches_sequential_model(ops):
    cell, model = CasCell("x", 0, threading.Lock()), 0
    for e, u in ops:
        expected = model == e
        assert cell.cas(e, u) is expected
        if expected:
            model = u
        assert cell.read() == model


def test_native_cas_counter_under_threads():
    # successful cas steps replayed in order must reproduce the final value
    mem = NativeMemory()
    x = mem.cas_cell(0)
    wins = []
    lock = threading.Lock()

    def worker():
        for _ in range(2000):
            while True:
                cur = x.read()
                if x.cas(cur, cur + 1):
                    with lock:
                        wins.append(cur)
                    break

    threads = [threading.Thread(target=worker) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert x.read() == 8000
    assert sorted(wins) == list(range(8000))


def test_native_consensus_single_winner_under_threads():
    mem = NativeMemory()
    c = mem.consensus()
    results = []
    barrier = threading.Barrier(8)

    def worker(i):
        barrier.wait()
        results.append(c.propose(i))

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(results)) == 1 and results[0] in range(8)


def test_step_executes_on_cell():
    mem = SimulatedMemory()
    r = mem.register(1)
    Step(r, "write", (2,)).execute()
    assert Step(r, "read").execute() == 2
