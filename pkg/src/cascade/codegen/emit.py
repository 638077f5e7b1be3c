"""IR (SSA form) to x86-64 machine code."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..abi import (CALLEE_SAVED, MAX_ARGS, PINNED_ARGS, PINNED_RECEIVER, PINNED_RESULT,
                   PINNED_SAVED_SP, PINNED_SYMBOL, STATUS_FAILED, STATUS_OK, VM_ARG_REGS)
from ..errors import ArityMismatch, SymbolNotFound, UnresolvedSymbol, UnsupportedInstr
from ..frontend.nodes import BasicType
from ..ir.nodes import BINARY_OPCODES, Imm, IrFunction, Reg, Sym
from .frames import WORD, FrameContext, context_of, layout_frames
from .link import link, patch_absolute
from .sends import TEMPLATES, load_operand
from .x86 import ABS64, REL32, Assembler

ENTRY_LABEL = "primitive_entry"
FAIL_LABEL = "primitive_failure"
EXIT_LABEL = "primitive_exit"


@dataclass(frozen=True)
class NativeArtifact:
    code: bytes
    entry_offset: int
    relocations: tuple            # every Relocation record emitted
    frame_size: int               # local words of the entry function
    selector: str
    listing: str = ""
    pending: tuple = ()           # absolute relocations not yet patched
    functions: dict = field(default_factory=dict)   # selector -> code offset
    returns_oop: bool = False
    param_types: tuple = ()


def function_label(name):
    return f"fn:{name}"


def _needs_untag(basic_type):
    return basic_type in (BasicType.WORD, BasicType.SIGNED_WORD)


def emit_entry(asm: Assembler, f: IrFunction):
    """C-callable entry: reads the pinned slot, calls the body, stores the result.

    Returns the status word in rax. The failure stub unwinds to the saved
    stack pointer so native code never raises.
    """
    n = len(f.params)
    asm.label(ENTRY_LABEL)
    asm.push("rbp")
    asm.mov_rr("rbp", "rsp")
    for reg in CALLEE_SAVED:
        asm.push(reg)
    asm.sub_imm("rsp", 8)
    asm.mov_sym("rbx", PINNED_SYMBOL)
    asm.store("rbx", PINNED_SAVED_SP, "rsp")
    asm.load("rax", "rbx", PINNED_RECEIVER)
    asm.push("rax")
    for i, p in enumerate(f.params):
        asm.load("rax", "rbx", PINNED_ARGS + WORD * i)
        if _needs_untag(f.type_of(p)):
            # immediates are untagged; heap references pass through unchanged
            skip = asm.new_label("raw")
            asm.mov_rr("rcx", "rax")
            asm.and_imm("rcx", 1)
            asm.jcc("e", skip)
            asm.sar_imm("rax", 1)
            asm.label(skip)
        asm.push("rax")
    asm.call_label(function_label(f.name))
    asm.store("rbx", PINNED_RESULT, "rax")
    asm.mov_imm("rax", STATUS_OK)
    asm.label(EXIT_LABEL)
    asm.load("rsp", "rbx", PINNED_SAVED_SP)
    asm.add_imm("rsp", 8)
    for reg in reversed(CALLEE_SAVED):
        asm.pop(reg)
    asm.pop("rbp")
    asm.ret()
    asm.label(FAIL_LABEL)
    asm.mov_sym("rbx", PINNED_SYMBOL)
    asm.mov_imm("rax", STATUS_FAILED)
    asm.jmp(EXIT_LABEL)


class _FunctionEmitter:
    def __init__(self, asm: Assembler, f: IrFunction, ctx: FrameContext):
        self.asm, self.f, self.ctx = asm, f, ctx
        self.fn = function_label(f.name)
        self.stubs = []

    def block_label(self, bid):
        return f"{self.fn}.L{bid}"

    def displacement(self, var):
        return context_of(self.ctx, self.f, var).displacement(var)

    def load(self, reg, operand):
        if isinstance(operand, Reg):
            self.asm.load(reg, "rbp", self.displacement(operand.name))
        else:
            load_operand(self.asm, reg, operand)

    def store(self, dest, reg="rax"):
        self.asm.store("rbp", self.displacement(dest), reg)

    def emit(self):
        asm, f = self.asm, self.f
        asm.label(self.fn)
        asm.push("rbp")
        asm.mov_rr("rbp", "rsp")
        locals_ = sorted(v for v in self.ctx.all_slots().values() if v < 0)
        if self.ctx.size:
            asm.sub_imm("rsp", WORD * self.ctx.size)
            # unassigned values read as zero, matching the interpreters
            asm.mov_imm("rax", 0)
            for off in locals_:
                asm.store("rbp", off * WORD, "rax")
        self.bmap = f.block_map()
        for block in f.blocks:
            asm.label(self.block_label(block.id))
            for ins in block.instrs:
                self.instr(ins)
            self.terminator(block)
            for label, pred, succ in self.stubs:
                asm.label(label)
                self.edge_moves(pred, succ)
                asm.jmp(self.block_label(succ))
            self.stubs = []

    def edge_target(self, pred, succ):
        if not self.bmap[succ].phis:
            return self.block_label(succ)
        label = f"{self.fn}.E{pred}.{succ}"
        self.stubs.append((label, pred, succ))
        return label

    def edge_moves(self, pred, succ):
        # parallel copy: read every source before writing any destination
        phis = self.bmap[succ].phis
        for p in phis:
            self.load("rax", p.incoming[pred])
            self.asm.push("rax")
        for p in reversed(phis):
            self.asm.pop("rax")
            self.store(p.dest)

    def terminator(self, block):
        asm, term = self.asm, block.term
        if term.op == "ret":
            if term.fail:
                asm.jmp(FAIL_LABEL)
                return
            self.load("rax", term.args[0])
            asm.mov_rr("rsp", "rbp")
            asm.pop("rbp")
            asm.ret()
        elif term.op == "jump":
            succ = term.targets[0]
            if self.bmap[succ].phis:
                self.edge_moves(block.id, succ)
            asm.jmp(self.block_label(succ))
        elif term.op == "branch_if":
            t, e = term.targets
            t_label = self.edge_target(block.id, t)
            e_label = self.edge_target(block.id, e) if e != t else t_label
            self.load("rax", term.args[0])
            asm.test("rax", "rax")
            asm.jcc("ne", t_label)
            asm.jmp(e_label)
        else:
            raise UnsupportedInstr(term.op)

    def instr(self, ins):
        asm, op = self.asm, ins.op
        if op == "move":
            self.load("rax", ins.args[0])
            self.store(ins.dest)
        elif op in BINARY_OPCODES:
            self.load("rax", ins.args[0])
            self.load("rcx", ins.args[1])
            TEMPLATES[op].emitter(asm, ins.signed, FAIL_LABEL)
            self.store(ins.dest)
        elif op == "load_word":
            self.load("rax", ins.args[0])
            asm.load("rax", "rax", 0)
            self.store(ins.dest)
        elif op == "store_word":
            self.load("rax", ins.args[0])
            self.load("rcx", ins.args[1])
            asm.store("rax", 0, "rcx")
        elif op == "arg_slot_read":
            # index 0 is the receiver, i >= 1 argument i-1: both at slot+8+8*i
            self.load("rcx", ins.args[0])
            asm.shl_imm("rcx", 3)
            asm.mov_sym("rax", PINNED_SYMBOL)
            asm.add("rax", "rcx")
            asm.load("rax", "rax", PINNED_RECEIVER)
            self.store(ins.dest)
        elif op == "call_vm":
            if len(ins.args) > len(VM_ARG_REGS):
                raise UnsupportedInstr(f"call_vm with {len(ins.args)} arguments")
            for reg, arg in zip(VM_ARG_REGS, ins.args):
                self.load(reg, arg)
            asm.mov_rr("r12", "rsp")
            asm.and_imm("rsp", -16)
            asm.mov_sym("rax", ins.target)
            asm.call_reg("rax")
            asm.mov_rr("rsp", "r12")
            self.store(ins.dest)
        elif op == "call_internal":
            for arg in ins.args:
                self.load("rax", arg)
                asm.push("rax")
            asm.call_sym(ins.target)
            asm.add_imm("rsp", WORD * len(ins.args))
            self.store(ins.dest)
        else:
            raise UnsupportedInstr(op)


def emit_native(f: IrFunction, ctx: FrameContext, symbols, callees=(), patch=True) -> NativeArtifact:
    """Emit f plus its internal callees as one blob with a C-callable entry.

    callees: (IrFunction, FrameContext) pairs for every internal call target.
    With patch=False the absolute relocations are left pending.
    """
    if f.form != "ssa":
        raise UnsupportedInstr(f"{f.name} is in {f.form} form; SSA required")
    if len(f.params) > MAX_ARGS:
        raise ArityMismatch(f"{f.name} has {len(f.params)} parameters, at most {MAX_ARGS} supported")
    asm = Assembler()
    emit_entry(asm, f)
    units = [(f, ctx)] + [(g, c) for g, c in callees if g.name != f.name]
    for g, c in units:
        if c is None:
            c = layout_frames(g)
        _FunctionEmitter(asm, g, c).emit()
    asm.finish()
    functions = {g.name: asm.labels[function_label(g.name)] for g, _ in units}
    code = link(bytearray(asm.code), asm.relocations, functions)
    addresses = {}
    for r in asm.relocations:
        if r.kind == ABS64 and r.symbol not in addresses:
            try:
                addresses[r.symbol] = symbols.resolve(r.symbol)
            except (KeyError, SymbolNotFound):
                raise UnresolvedSymbol(r.symbol) from None
    pending = tuple(r for r in asm.relocations if r.kind == ABS64)
    artifact = NativeArtifact(
        code=bytes(code), entry_offset=asm.labels[ENTRY_LABEL], relocations=tuple(asm.relocations),
        frame_size=ctx.size, selector=f.name, listing=asm.text(), pending=pending,
        functions=functions, returns_oop=f.returns_oop,
        param_types=tuple(f.type_of(p) for p in f.params))
    return relocate(artifact, symbols) if patch else artifact


def relocate(artifact: NativeArtifact, symbols) -> NativeArtifact:
    code = bytearray(artifact.code)
    for r in artifact.pending:
        try:
            address = symbols.resolve(r.symbol)
        except (KeyError, SymbolNotFound):
            raise UnresolvedSymbol(r.symbol) from None
        patch_absolute(code, r, address)
    return replace(artifact, code=bytes(code), pending=())


__all__ = ["NativeArtifact", "emit_native", "relocate", "function_label", "ABS64", "REL32"]
