"""Phi placement against a brute-force dominance oracle."""
import pytest
from hypothesis import given, settings, strategies as st

from cascade.ir.interp import interpret_ir
from cascade.ir.nodes import BasicBlock, Imm, Instr, IrFunction, Reg
from cascade.ir.ssa import remove_unreachable, to_ssa
from conftest import equivalence_sources, make_vm


def _reachable(succ, entry, removed=None):
    seen, stack = set(), [entry]
    while stack:
        b = stack.pop()
        if b in seen or b == removed:
            continue
        seen.add(b)
        stack.extend(succ[b])
    return seen


def brute_dominators(f):
    succ = {b.id: list(b.successors) for b in f.blocks}
    entry = f.blocks[0].id
    nodes = _reachable(succ, entry)
    # d dominates b when deleting d cuts every path from entry to b
    return {b: {d for d in nodes if d == b or b not in _reachable(succ, entry, removed=d)}
            for b in nodes}


def brute_frontiers(f, dom):
    preds = {b: [] for b in dom}
    for blk in f.blocks:
        if blk.id in dom:
            for s in blk.successors:
                preds[s].append(blk.id)
    return {x: {y for y in dom for p in preds[y]
                if x in dom[p] and not (x in dom[y] and x != y)}
            for x in dom}


def brute_phis(f):
    """Expected variables with a phi at each block (semi-pruned placement)."""
    dom = brute_dominators(f)
    df = brute_frontiers(f, dom)
    blocks = [b for b in f.blocks if b.id in dom]
    upward = set()
    for b in blocks:
        written = set()
        for ins in b.instrs + [b.term]:
            upward |= {a.name for a in ins.args if isinstance(a, Reg) and a.name not in written}
            if ins.dest:
                written.add(ins.dest)
    defs = {}
    for name in [f.receiver, *f.params]:
        defs.setdefault(name, set()).add(blocks[0].id)
    for b in blocks:
        for ins in b.instrs:
            if ins.dest:
                defs.setdefault(ins.dest, set()).add(b.id)
    expected = {b.id: set() for b in blocks}
    for var in upward:
        frontier = set()
        while True:
            grown = set().union(*(df[x] for x in defs.get(var, set()) | frontier)) if defs.get(var) else set()
            if grown == frontier:
                break
            frontier = grown
        for y in frontier:
            expected[y].add(var)
    return expected


def actual_phis(ssa):
    return {b.id: {p.dest.rsplit(".", 1)[0] for p in b.phis} for b in ssa.blocks}


def assert_single_definition(ssa):
    defined = [ssa.receiver, *ssa.params]
    for b in ssa.blocks:
        defined += [p.dest for p in b.phis]
        defined += [i.dest for i in b.instrs if i.dest]
    assert len(defined) == len(set(defined))
    known = set(defined)
    for b in ssa.blocks:
        for i in b.instrs + [b.term]:
            assert set(i.uses()) <= known
        for p in b.phis:
            assert {v.name for v in p.incoming.values() if isinstance(v, Reg)} <= known
            assert set(p.incoming) == {q.id for q in ssa.blocks if b.id in q.successors}


def corpus_functions():
    vm = make_vm()
    sels = [vm.define(s) for s in equivalence_sources()]
    for sel in sels:
        yield sel, vm.prepare(sel, native=False).tac[sel]


@pytest.mark.parametrize("sel, tac", list(corpus_functions()), ids=lambda x: x if isinstance(x, str) else "")
def test_corpus_ssa_structure(sel, tac):
    import copy
    ssa = to_ssa(tac)
    assert_single_definition(ssa)
    assert actual_phis(ssa) == brute_phis(remove_unreachable(copy.deepcopy(tac)))


def test_loop_gets_phi_at_header():
    vm = make_vm()
    sel = vm.define("f: k\n\t| s n |\n\ts := 0.\n\tn := k.\n\t[n > 0] whileTrue: [s := s + n. n := n - 1].\n\t^ s")
    ssa = vm.prepare(sel, native=False).ssa[sel]
    bases = set().union(*actual_phis(ssa).values())
    assert {"s", "n"} <= bases


# -- random control-flow graphs ------------------------------------------------------

VARS = ["x", "y", "z"]


@st.composite
def cfgs(draw):
    n = draw(st.integers(1, 7))
    blocks = []
    for bid in range(n):
        instrs = []
        for _ in range(draw(st.integers(0, 3))):
            src = draw(st.one_of(st.sampled_from(VARS).map(Reg), st.integers(0, 9).map(Imm)))
            other = draw(st.one_of(st.sampled_from(VARS).map(Reg), st.integers(0, 9).map(Imm)))
            instrs.append(Instr("add", draw(st.sampled_from(VARS)), [src, other]))
        kind = draw(st.sampled_from(["ret", "jump", "branch"]))
        if kind == "ret" or n == 1:
            term = Instr("ret", None, [Reg(draw(st.sampled_from(VARS)))])
        elif kind == "jump":
            term = Instr("jump", targets=(draw(st.integers(1, n - 1)),))
        else:
            # the entry block never has predecessors
            a, b = draw(st.integers(1, n - 1)), draw(st.integers(1, n - 1))
            term = Instr("branch_if", None, [Reg(draw(st.sampled_from(VARS)))], targets=(a, b))
        blocks.append(BasicBlock(bid, [], instrs, term))
    return IrFunction("g:", ["x"], blocks)


@settings(max_examples=300, deadline=None)
@given(cfgs())
def test_random_cfg_phi_placement_matches_oracle(f):
    import copy
    ssa = to_ssa(f)
    assert_single_definition(ssa)
    assert actual_phis(ssa) == brute_phis(remove_unreachable(copy.deepcopy(f)))


def _terminates(f):
    """Acyclic graphs only, so both interpreters finish."""
    succ = {b.id: b.successors for b in f.blocks}
    state = {}

    def visit(b):
        if state.get(b) == 1:
            return False
        if state.get(b) == 2:
            return True
        state[b] = 1
        ok = all(visit(s) for s in succ[b])
        state[b] = 2
        return ok
    return visit(f.blocks[0].id)


@settings(max_examples=200, deadline=None)
@given(cfgs(), st.integers(0, 5))
def test_random_acyclic_cfg_ssa_preserves_result(f, x):
    from hypothesis import assume
    assume(_terminates(f))
    assert interpret_ir(f, [x]) == interpret_ir(to_ssa(f), [x])


def test_entry_block_that_is_a_loop_header():
    body = [Instr("add", "x", [Reg("x"), Imm(1)]), Instr("cmp_lt", "c", [Reg("x"), Imm(5)])]
    f = IrFunction("h:", ["x"], [
        BasicBlock(0, [], body, Instr("branch_if", None, [Reg("c")], targets=(0, 1))),
        BasicBlock(1, [], [], Instr("ret", None, [Reg("x")]))])
    ssa = to_ssa(f)
    assert_single_definition(ssa)
    assert ssa.predecessors()[ssa.blocks[0].id] == []
    assert interpret_ir(ssa, [0]) == interpret_ir(f, [0]) == 5
