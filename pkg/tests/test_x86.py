"""Assembler output checked against objdump's disassembly."""
import re
import subprocess

import pytest
from hypothesis import given, settings, strategies as st

from cascade.codegen.x86 import ABS64, CC, PLACEHOLDER64, REGS, REL32, Assembler
from conftest import HAVE_OBJDUMP

MASK = (1 << 64) - 1
LOW = ["rax", "rcx", "rdx", "rbx"]

regs = st.sampled_from(REGS)
disps = st.one_of(st.integers(-(1 << 31), (1 << 31) - 1), st.integers(-128, 128))
imm32 = st.one_of(st.integers(-128, 127), st.integers(-(1 << 31), (1 << 31) - 1))
imm64 = st.one_of(imm32, st.integers(0, MASK))

INSTRUCTIONS = st.one_of(
    st.tuples(st.sampled_from(["mov_rr", "add", "sub", "and_", "or_", "xor", "cmp", "test", "imul"]),
              regs, regs),
    st.tuples(st.just("load"), regs, regs, disps),
    st.tuples(st.just("store"), regs, disps, regs),
    st.tuples(st.just("mov_imm"), regs, imm64),
    st.tuples(st.sampled_from(["add_imm", "sub_imm", "and_imm", "cmp_imm"]), regs, imm32),
    st.tuples(st.sampled_from(["push", "pop", "neg", "div", "idiv", "shl_cl", "shr_cl", "sar_cl",
                               "call_reg"]), regs),
    st.tuples(st.sampled_from(["shl_imm", "sar_imm"]), regs, st.integers(0, 63)),
    st.tuples(st.just("setcc"), st.sampled_from(sorted(CC)), st.sampled_from(LOW)),
    st.tuples(st.just("movzx8"), regs, st.sampled_from(LOW)),
    st.tuples(st.just("mov_sym"), regs, st.just("someSymbol")),
    st.tuples(st.sampled_from(["cqo", "ret"])),
)


def objdump(code, tmp_path):
    blob = tmp_path / "code.bin"
    blob.write_bytes(code)
    out = subprocess.run(["objdump", "-D", "-b", "binary", "-m", "i386:x86-64", "-M", "intel",
                          "--no-show-raw-insn", str(blob)], check=True, capture_output=True, text=True)
    lines = []
    for line in out.stdout.splitlines():
        m = re.match(r"^\s*([0-9a-f]+):\t(.*)$", line)
        if m:
            lines.append((int(m.group(1), 16), m.group(2)))
    return lines


def _operand(text, labels):
    text = text.strip().replace("QWORD PTR ", "")
    m = re.match(r"^\[(\w+)(?:([+-])(\w+))?\]$", text)
    if m:
        disp = int(m.group(3), 0) if m.group(3) else 0
        return ("mem", m.group(1), -disp if m.group(2) == "-" else disp)
    if text.startswith("@"):
        return int.from_bytes(PLACEHOLDER64, "little")
    if text in labels:
        return labels[text]
    if re.match(r"^-?(0x)?[0-9a-f]+$", text):
        return int(text, 0) & MASK
    return text


def normalize(text, labels=None):
    text = re.sub(r"\s*<.*>$", "", text.strip())
    mnemonic, _, rest = text.partition(" ")
    operands = [_operand(o, labels or {}) for o in rest.split(",")] if rest.strip() else []
    return mnemonic, operands


def ours(asm):
    return [(off, normalize(t, asm.labels)) for off, t, is_label in asm.listing if not is_label]


pytestmark = pytest.mark.skipif(not HAVE_OBJDUMP, reason="objdump not installed")


@settings(max_examples=60, deadline=None)
@given(st.lists(INSTRUCTIONS, min_size=1, max_size=40))
def test_random_programs_disassemble_identically(tmp_path_factory, program):
    asm = Assembler()
    for name, *args in program:
        getattr(asm, name)(*args)
    code = asm.finish()
    theirs = [(off, normalize(t)) for off, t in objdump(code, tmp_path_factory.mktemp("x"))]
    assert theirs == ours(asm)


def test_branches_resolve_to_label_offsets(tmp_path):
    asm = Assembler()
    top = asm.new_label("top")
    done = asm.new_label("done")
    asm.label(top)
    asm.cmp_imm("rax", 10)
    for cc in sorted(CC):
        asm.jcc(cc, done)
    asm.add_imm("rax", 1)
    asm.jmp(top)
    asm.call_label(done)
    asm.label(done)
    asm.ret()
    code = asm.finish()
    assert [(o, normalize(t)) for o, t in objdump(code, tmp_path)] == ours(asm)


def test_relocations_point_at_placeholders():
    asm = Assembler()
    asm.mov_sym("r11", "printOop")
    asm.call_sym("fn:foo")
    code = asm.finish()
    (abs_r, rel_r) = asm.relocations
    assert abs_r.kind == ABS64 and code[abs_r.offset:abs_r.offset + 8] == PLACEHOLDER64
    assert rel_r.kind == REL32 and code[rel_r.offset - 1] == 0xE8


def test_undefined_label_is_reported():
    asm = Assembler()
    asm.jmp(".nowhere")
    with pytest.raises(ValueError):
        asm.finish()
