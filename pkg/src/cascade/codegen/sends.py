"""Send classification and the inlined primitive templates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

from ..errors import ArityMismatch, UnknownSelector
from ..frontend.nodes import selector_arity
from ..ir.nodes import Imm, Sym
from ..templates import BINARY_OPS, TEMPLATE_SELECTORS, vm_send_name
from .x86 import Assembler


@dataclass(frozen=True)
class InternalCall:
    selector: str


@dataclass(frozen=True)
class VmFunctionCall:
    name: str


@dataclass(frozen=True)
class InlinedTemplate:
    template_id: str


SendKind = Union[InternalCall, VmFunctionCall, InlinedTemplate]


def classify_send(selector, table, nargs=None) -> SendKind:
    if nargs is None:
        nargs = selector_arity(selector)
    if selector in TEMPLATE_SELECTORS:
        return InlinedTemplate(TEMPLATE_IDS.get(selector, selector))
    vm = vm_send_name(selector, nargs, table.vm_functions)
    if vm is not None:
        return VmFunctionCall(vm)
    if selector in table.methods:
        return InternalCall(selector)
    raise UnknownSelector(selector, None)


# Template emitters work on rax (first operand, result) and rcx (second
# operand); rdx is clobbered by division. fail_label is the primitive-failure exit.

def _alu(method):
    def emit(asm: Assembler, signed, fail_label):
        getattr(asm, method)("rax", "rcx")
    return emit


def _compare(signed_cc, unsigned_cc, swap=False, negate=False):
    def emit(asm: Assembler, signed, fail_label):
        if swap:
            asm.cmp("rcx", "rax")
        else:
            asm.cmp("rax", "rcx")
        cc = signed_cc if signed else unsigned_cc
        asm.setcc(cc, "rax")
        asm.movzx8("rax", "rax")
    return emit


def _mod_signed(asm: Assembler, fail_label):
    n = asm.new_label("mod")
    normal, done = n + ".normal", n + ".done"
    asm.test("rcx", "rcx")
    asm.jcc("e", fail_label)
    asm.cmp_imm("rcx", -1)
    asm.jcc("ne", normal)
    asm.mov_imm("rax", 0)
    asm.jmp(done)
    asm.label(normal)
    asm.cqo()
    asm.idiv("rcx")
    asm.mov_rr("rax", "rdx")
    asm.label(done)


def _emit_div(asm: Assembler, signed, fail_label):
    asm.test("rcx", "rcx")
    asm.jcc("e", fail_label)
    if not signed:
        asm.xor("rdx", "rdx")
        asm.div("rcx")
        return
    n = asm.new_label("div")
    normal, done = n + ".normal", n + ".done"
    asm.cmp_imm("rcx", -1)
    asm.jcc("ne", normal)
    asm.neg("rax")
    asm.jmp(done)
    asm.label(normal)
    asm.cqo()
    asm.idiv("rcx")
    asm.label(done)


def _emit_mod(asm: Assembler, signed, fail_label):
    if signed:
        _mod_signed(asm, fail_label)
        return
    asm.test("rcx", "rcx")
    asm.jcc("e", fail_label)
    asm.xor("rdx", "rdx")
    asm.div("rcx")
    asm.mov_rr("rax", "rdx")


def _emit_shl(asm, signed, fail_label):
    asm.shl_cl("rax")


def _emit_shr(asm, signed, fail_label):
    if signed:
        asm.sar_cl("rax")
    else:
        asm.shr_cl("rax")


def _emit_bitshift(asm: Assembler, signed, fail_label):
    # positive count shifts left, negative shifts right by the magnitude
    n = asm.new_label("shift")
    right, done = n + ".right", n + ".done"
    asm.cmp_imm("rcx", 0)
    asm.jcc("l", right)
    asm.shl_cl("rax")
    asm.jmp(done)
    asm.label(right)
    asm.neg("rcx")
    _emit_shr(asm, signed, fail_label)
    asm.label(done)


def _emit_load(asm: Assembler, signed, fail_label):
    asm.load("rax", "rax", 0)


def _emit_store(asm: Assembler, signed, fail_label):
    asm.store("rax", 0, "rcx")
    asm.mov_rr("rax", "rcx")


def _emit_test_branch(asm: Assembler, signed, fail_label):
    # control templates: branch on the condition in rax; targets bound by the caller
    asm.test("rax", "rax")


@dataclass(frozen=True)
class PrimitiveTemplate:
    template_id: str
    selector: str
    operand_count: int
    emitter: Callable


_T = PrimitiveTemplate
TEMPLATES = {t.template_id: t for t in [
    _T("add", "+", 2, _alu("add")),
    _T("sub", "-", 2, _alu("sub")),
    _T("mul", "*", 2, _alu("imul")),
    _T("div", "//", 2, _emit_div),
    _T("mod", "\\\\", 2, _emit_mod),
    _T("band", "bitAnd:", 2, _alu("and_")),
    _T("bor", "bitOr:", 2, _alu("or_")),
    _T("bxor", "bitXor:", 2, _alu("xor")),
    _T("shl", "<<", 2, _emit_shl),
    _T("shr", ">>", 2, _emit_shr),
    _T("bitShift:", "bitShift:", 2, _emit_bitshift),
    _T("cmp_eq", "=", 2, _compare("e", "e")),
    _T("cmp_ne", "~=", 2, _compare("ne", "ne")),
    _T("cmp_lt", "<", 2, _compare("l", "b")),
    _T("cmp_le", "<=", 2, _compare("le", "be")),
    _T("cmp_gt", ">", 2, _compare("l", "b", swap=True)),
    _T("cmp_ge", ">=", 2, _compare("le", "be", swap=True)),
    _T("longAt:", "longAt:", 1, _emit_load),
    _T("longAt:put:", "longAt:put:", 2, _emit_store),
    *[_T(sel, sel, 1, _emit_test_branch) for sel in
      ("ifTrue:", "ifFalse:", "ifTrue:ifFalse:", "ifFalse:ifTrue:", "and:", "or:",
       "whileTrue:", "whileFalse:", "whileTrue", "whileFalse", "to:do:", "to:by:do:")],
]}

TEMPLATE_IDS = {**BINARY_OPS, "=": "cmp_eq", "==": "cmp_eq", "~=": "cmp_ne", "~~": "cmp_ne",
                "<": "cmp_lt", "<=": "cmp_le", ">": "cmp_gt", ">=": "cmp_ge"}


def template_for(selector_or_id) -> PrimitiveTemplate:
    key = TEMPLATE_IDS.get(selector_or_id, selector_or_id)
    return TEMPLATES[key]


def load_operand(asm: Assembler, reg, operand, ctx=None):
    """Materialize an IR operand (or a raw frame displacement) into reg."""
    if isinstance(operand, Imm):
        asm.mov_imm(reg, operand.value)
    elif isinstance(operand, Sym):
        asm.mov_sym(reg, operand.name)
    elif isinstance(operand, int):
        asm.load(reg, "rbp", operand)
    else:
        asm.load(reg, "rbp", ctx.displacement(operand.name))


def inline_template(t: PrimitiveTemplate, operands, signed=False, fail_label="primitive_failure",
                    asm: Assembler | None = None, ctx=None) -> Assembler:
    """Emit t over operands (Imm, Reg with ctx, or rbp displacements); result in rax."""
    if len(operands) != t.operand_count:
        raise ArityMismatch(f"{t.selector} takes {t.operand_count} operands, got {len(operands)}")
    asm = asm if asm is not None else Assembler()
    if t.template_id == "bitShift:" and isinstance(operands[1], Imm):
        count = operands[1].value
        load_operand(asm, "rax", operands[0], ctx)
        asm.mov_imm("rcx", abs(count))
        (_emit_shl if count >= 0 else _emit_shr)(asm, signed, fail_label)
        return asm
    for reg, op in zip(("rax", "rcx"), operands):
        load_operand(asm, reg, op, ctx)
    t.emitter(asm, signed, fail_label)
    return asm
