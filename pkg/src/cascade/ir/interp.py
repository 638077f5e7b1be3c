"""Reference interpreter for IR functions (TAC or SSA form)."""
from __future__ import annotations

from ..env import SymbolEnv
from ..errors import (DivisionByZero, PrimitiveFailure, StepBudgetExceeded,
                      UnresolvedVmFunction, UnknownSelector)
from ..words import MASK, signed as as_signed
from .nodes import Imm, IrFunction, Reg, Sym


def _trunc_div(a, b):
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def binop(op, a, b, signed):
    """Word semantics of the binary opcodes; a and b are unsigned words."""
    if op == "add":
        return (a + b) & MASK
    if op == "sub":
        return (a - b) & MASK
    if op == "mul":
        return (a * b) & MASK
    if op == "band":
        return a & b
    if op == "bor":
        return a | b
    if op == "bxor":
        return a ^ b
    if op == "shl":
        return (a << (b & 63)) & MASK
    if op == "shr":
        if signed:
            return (as_signed(a) >> (b & 63)) & MASK
        return a >> (b & 63)
    if op == "cmp_eq":
        return int(a == b)
    if op in ("cmp_lt", "cmp_le"):
        x, y = (as_signed(a), as_signed(b)) if signed else (a, b)
        return int(x < y) if op == "cmp_lt" else int(x <= y)
    if op in ("div", "mod"):
        if b == 0:
            raise DivisionByZero(op)
        if not signed:
            return a // b if op == "div" else a % b
        x, y = as_signed(a), as_signed(b)
        q = _trunc_div(x, y)
        return (q & MASK) if op == "div" else ((x - q * y) & MASK)
    raise ValueError(f"not a binary opcode: {op}")


class _Run:
    def __init__(self, env: SymbolEnv):
        self.env = env
        self.steps = 0

    def call(self, f: IrFunction, receiver, args, depth):
        if depth > self.env.max_depth:
            raise StepBudgetExceeded(f"activation depth above {self.env.max_depth}")
        if len(args) != len(f.params):
            raise ValueError(f"{f.name} takes {len(f.params)} arguments, got {len(args)}")
        regs = {f.receiver: receiver & MASK}
        regs.update({p: a & MASK for p, a in zip(f.params, args)})
        env = self.env
        bmap = f.block_map()
        bid, pred = f.blocks[0].id, None

        def val(op):
            if isinstance(op, Reg):
                return regs.get(op.name, 0)
            if isinstance(op, Imm):
                return op.value & MASK
            if isinstance(op, Sym):
                if op.name not in env.globals:
                    raise UnresolvedVmFunction(op.name)
                return env.globals[op.name]
            raise TypeError(op)

        while True:
            block = bmap[bid]
            if block.phis:
                incoming = [(p.dest, val(p.incoming[pred])) for p in block.phis]
                regs.update(incoming)
            for ins in block.instrs:
                self.steps += 1
                if self.steps > env.step_budget:
                    raise StepBudgetExceeded(f"more than {env.step_budget} IR steps")
                op = ins.op
                if op == "move":
                    regs[ins.dest] = val(ins.args[0])
                elif op == "load_word":
                    regs[ins.dest] = env.memory.load(val(ins.args[0]))
                elif op == "store_word":
                    env.memory.store(val(ins.args[0]), val(ins.args[1]))
                elif op == "arg_slot_read":
                    regs[ins.dest] = env.arg_slot(val(ins.args[0])) & MASK
                elif op == "call_vm":
                    fn = env.vm_functions.get(ins.target)
                    if fn is None:
                        raise UnresolvedVmFunction(ins.target)
                    regs[ins.dest] = fn(*[val(a) for a in ins.args]) & MASK
                elif op == "call_internal":
                    callee = env.functions.get(ins.target)
                    if callee is None:
                        raise UnknownSelector(ins.target, f.name)
                    values = [val(a) for a in ins.args]
                    regs[ins.dest] = self.call(callee, values[0], values[1:], depth + 1)
                else:
                    regs[ins.dest] = binop(op, val(ins.args[0]), val(ins.args[1]), ins.signed)
            term = block.term
            self.steps += 1
            if term.op == "ret":
                if term.fail:
                    raise PrimitiveFailure(f.name)
                return val(term.args[0])
            pred = bid
            if term.op == "jump":
                bid = term.targets[0]
            else:
                bid = term.targets[0] if val(term.args[0]) else term.targets[1]


def interpret_ir(f: IrFunction, args, env: SymbolEnv | None = None, receiver=0):
    return _Run(env or SymbolEnv()).call(f, receiver, list(args), 0)
