"""TAC -> SSA: dominators, dominance frontiers, phi insertion, renaming."""
from __future__ import annotations

import copy

from .nodes import BasicBlock, Imm, Instr, IrFunction, Phi, Reg


def remove_unreachable(f: IrFunction) -> IrFunction:
    bmap = f.block_map()
    seen, stack = set(), [f.blocks[0].id]
    while stack:
        b = stack.pop()
        if b in seen:
            continue
        seen.add(b)
        stack.extend(bmap[b].successors)
    f.blocks = [b for b in f.blocks if b.id in seen]
    return f


def reverse_postorder(f: IrFunction):
    bmap = f.block_map()
    order, seen = [], set()
    stack = [(f.blocks[0].id, iter(bmap[f.blocks[0].id].successors))]
    seen.add(f.blocks[0].id)
    while stack:
        node, it = stack[-1]
        for s in it:
            if s not in seen:
                seen.add(s)
                stack.append((s, iter(bmap[s].successors)))
                break
        else:
            stack.pop()
            order.append(node)
    return order[::-1]


def immediate_dominators(f: IrFunction):
    """Cooper/Harvey/Kennedy iterative algorithm; entry maps to itself."""
    rpo = reverse_postorder(f)
    index = {b: i for i, b in enumerate(rpo)}
    preds = f.predecessors()
    entry = rpo[0]
    idom = {entry: entry}

    def intersect(a, b):
        while a != b:
            while index[a] > index[b]:
                a = idom[a]
            while index[b] > index[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for b in rpo[1:]:
            done = [p for p in preds[b] if p in idom]
            if not done:
                continue
            new = done[0]
            for p in done[1:]:
                new = intersect(p, new)
            if idom.get(b) != new:
                idom[b] = new
                changed = True
    return idom


def dominator_tree(idom):
    children = {b: [] for b in idom}
    for b, d in idom.items():
        if b != d:
            children[d].append(b)
    return children


def dominance_frontiers(f: IrFunction, idom=None):
    idom = idom or immediate_dominators(f)
    preds = f.predecessors()
    df = {b: set() for b in idom}
    for b, ps in preds.items():
        if len(ps) < 2:
            continue
        for p in ps:
            runner = p
            while runner != idom[b]:
                df[runner].add(b)
                runner = idom[runner]
    return df


def global_names(f: IrFunction):
    """Variables read in some block before being written there."""
    names = set()
    for b in f.blocks:
        killed = set()
        for instr in b.instrs + [b.term]:
            for u in instr.uses():
                if u not in killed:
                    names.add(u)
            if instr.dest:
                killed.add(instr.dest)
    return names


def def_blocks(f: IrFunction):
    defs = {}
    entry = f.blocks[0].id
    for name in [f.receiver, *f.params]:
        defs.setdefault(name, set()).add(entry)
    for b in f.blocks:
        for instr in b.instrs:
            if instr.dest:
                defs.setdefault(instr.dest, set()).add(b.id)
    return defs


def phi_placement(f: IrFunction, df):
    """Map block id -> sorted list of variables needing a phi there."""
    placement = {b.id: [] for b in f.blocks}
    defs = def_blocks(f)
    for var in sorted(global_names(f)):
        work = list(defs.get(var, ()))
        has_phi = set()
        ever = set(work)
        while work:
            x = work.pop()
            for y in df[x]:
                if y not in has_phi:
                    has_phi.add(y)
                    placement[y].append(var)
                    if y not in ever:
                        ever.add(y)
                        work.append(y)
    for v in placement.values():
        v.sort()
    return placement


def to_ssa(f: IrFunction) -> IrFunction:
    """Semi-pruned SSA copy of f."""
    f = remove_unreachable(copy.deepcopy(f))
    entry = f.blocks[0].id
    if f.predecessors()[entry]:
        # params are defined on function entry, which must not be a join point
        fresh_id = max(b.id for b in f.blocks) + 1
        f.blocks.insert(0, BasicBlock(fresh_id, [], [], Instr("jump", targets=(entry,))))
    idom = immediate_dominators(f)
    df = dominance_frontiers(f, idom)
    placement = phi_placement(f, df)
    bmap = f.block_map()
    for bid, variables in placement.items():
        bmap[bid].phis = [Phi(v) for v in variables]

    counters = {}
    stacks = {name: [name] for name in [f.receiver, *f.params]}
    origin = {}

    def fresh(base):
        counters[base] = counters.get(base, 0) + 1
        name = f"{base}.{counters[base]}"
        origin[name] = base
        return name

    def current(base):
        s = stacks.get(base)
        return Reg(s[-1]) if s else Imm(0)

    def rename_operand(op):
        return current(op.name) if isinstance(op, Reg) else op

    children = dominator_tree(idom)
    phi_base = {}
    pushed = {}

    # iterative walk over the dominator tree
    work = [("enter", f.blocks[0].id)]
    while work:
        action, bid = work.pop()
        block = bmap[bid]
        if action == "exit":
            for base in pushed.pop(bid):
                stacks[base].pop()
            continue
        mine = []
        for phi in block.phis:
            base = phi.dest
            phi.dest = fresh(base)
            phi_base[(bid, phi.dest)] = base
            stacks.setdefault(base, []).append(phi.dest)
            mine.append(base)
        for instr in block.instrs:
            instr.args = [rename_operand(a) for a in instr.args]
            if instr.dest:
                base = instr.dest
                instr.dest = fresh(base)
                stacks.setdefault(base, []).append(instr.dest)
                mine.append(base)
        block.term.args = [rename_operand(a) for a in block.term.args]
        for s in block.successors:
            for phi in bmap[s].phis:
                base = phi_base.get((s, phi.dest), phi.dest)
                phi.incoming[bid] = current(base)
        pushed[bid] = mine
        work.append(("exit", bid))
        for c in reversed(children[bid]):
            work.append(("enter", c))

    f.types = {**f.types, **{n: f.types.get(b) for n, b in origin.items() if b in f.types}}
    f.vreg_scope = {**f.vreg_scope, **{n: f.vreg_scope[b] for n, b in origin.items() if b in f.vreg_scope}}
    f.form = "ssa"
    f.frame_hint = len(f.vregs())
    return f

