"""Minimal x86-64 assembler: the instruction subset the emitter needs.

Every instruction is appended to a textual listing alongside its bytes.
Labels are local to one Assembler; external references become relocations.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

REGS = ["rax", "rcx", "rdx", "rbx", "rsp", "rbp", "rsi", "rdi",
        "r8", "r9", "r10", "r11", "r12", "r13", "r14", "r15"]
R = {name: i for i, name in enumerate(REGS)}
LOW8 = {0: "al", 1: "cl", 2: "dl", 3: "bl"}

# condition code nibbles
CC = {"o": 0, "no": 1, "b": 2, "ae": 3, "e": 4, "ne": 5, "be": 6, "a": 7,
      "s": 8, "ns": 9, "l": 0xC, "ge": 0xD, "le": 0xE, "g": 0xF}

ABS64 = "absolute64"
REL32 = "relative32"
PLACEHOLDER64 = b"\xef\xbe\xad\xde\xef\xbe\xad\xde"
PLACEHOLDER32 = b"\xef\xbe\xad\xde"


@dataclass(frozen=True)
class Relocation:
    offset: int
    symbol: str
    kind: str


@dataclass
class Assembler:
    code: bytearray = field(default_factory=bytearray)
    listing: list = field(default_factory=list)
    relocations: list = field(default_factory=list)
    labels: dict = field(default_factory=dict)
    _fixups: list = field(default_factory=list)
    _counter: int = 0

    def _emit(self, data, text):
        self.listing.append((len(self.code), text, False))
        self.code += bytes(data)

    # ---- encoding helpers -------------------------------------------------
    @staticmethod
    def _rex(w, reg, base, force=False):
        byte = 0x40 | (8 if w else 0) | (4 if reg & 8 else 0) | (1 if base & 8 else 0)
        return [byte] if byte != 0x40 or force else []

    @staticmethod
    def _mem(reg, base, disp):
        # always disp32; rsp/r12 bases need a SIB byte
        out = [0x80 | ((reg & 7) << 3) | (base & 7)]
        if base & 7 == 4:
            out.append(0x24)
        return out + list(struct.pack("<i", disp))

    @staticmethod
    def _rr(reg, rm):
        return [0xC0 | ((reg & 7) << 3) | (rm & 7)]

    def _op_rr(self, opcode, dst, src, text):
        # opcode r/m64, r64 form: rm = dst, reg = src
        d, s = R[dst], R[src]
        self._emit(self._rex(1, s, d) + [opcode] + self._rr(s, d), text)

    # ---- data movement ----------------------------------------------------
    def mov_rr(self, dst, src):
        self._op_rr(0x89, dst, src, f"mov {dst}, {src}")

    def load(self, dst, base, disp):
        d, b = R[dst], R[base]
        self._emit(self._rex(1, d, b) + [0x8B] + self._mem(d, b, disp), f"mov {dst}, [{base}{disp:+d}]")

    def store(self, base, disp, src):
        s, b = R[src], R[base]
        self._emit(self._rex(1, s, b) + [0x89] + self._mem(s, b, disp), f"mov [{base}{disp:+d}], {src}")

    def mov_imm(self, dst, value):
        """Load a 64-bit constant using the shortest exact encoding."""
        d = R[dst]
        value &= (1 << 64) - 1
        sv = value - (1 << 64) if value >> 63 else value
        if -(1 << 31) <= sv < (1 << 31):
            self._emit(self._rex(1, 0, d) + [0xC7] + self._rr(0, d) + list(struct.pack("<i", sv)),
                       f"mov {dst}, {sv}")
        else:
            self._emit(self._rex(1, 0, d) + [0xB8 + (d & 7)] + list(struct.pack("<Q", value)),
                       f"movabs {dst}, {value:#x}")

    def mov_sym(self, dst, symbol):
        """movabs with an absolute64 relocation against symbol."""
        d = R[dst]
        head = self._rex(1, 0, d) + [0xB8 + (d & 7)]
        self.relocations.append(Relocation(len(self.code) + len(head), symbol, ABS64))
        self._emit(head + list(PLACEHOLDER64), f"movabs {dst}, @{symbol}")

    def push(self, reg):
        r = R[reg]
        self._emit(([0x41] if r & 8 else []) + [0x50 + (r & 7)], f"push {reg}")

    def pop(self, reg):
        r = R[reg]
        self._emit(([0x41] if r & 8 else []) + [0x58 + (r & 7)], f"pop {reg}")

    # ---- arithmetic ---------------------------------------------------------
    def add(self, dst, src):
        self._op_rr(0x01, dst, src, f"add {dst}, {src}")

    def sub(self, dst, src):
        self._op_rr(0x29, dst, src, f"sub {dst}, {src}")

    def and_(self, dst, src):
        self._op_rr(0x21, dst, src, f"and {dst}, {src}")

    def or_(self, dst, src):
        self._op_rr(0x09, dst, src, f"or {dst}, {src}")

    def xor(self, dst, src):
        self._op_rr(0x31, dst, src, f"xor {dst}, {src}")

    def cmp(self, a, b):
        self._op_rr(0x39, a, b, f"cmp {a}, {b}")

    def test(self, a, b):
        self._op_rr(0x85, a, b, f"test {a}, {b}")

    def imul(self, dst, src):
        d, s = R[dst], R[src]
        self._emit(self._rex(1, d, s) + [0x0F, 0xAF] + self._rr(d, s), f"imul {dst}, {src}")

    def _group_imm(self, ext, reg, imm, name):
        r = R[reg]
        if -128 <= imm < 128:
            self._emit(self._rex(1, 0, r) + [0x83] + self._rr(ext, r) + [imm & 0xFF], f"{name} {reg}, {imm}")
        else:
            self._emit(self._rex(1, 0, r) + [0x81] + self._rr(ext, r) + list(struct.pack("<i", imm)),
                       f"{name} {reg}, {imm}")

    def add_imm(self, reg, imm):
        self._group_imm(0, reg, imm, "add")

    def sub_imm(self, reg, imm):
        self._group_imm(5, reg, imm, "sub")

    def and_imm(self, reg, imm):
        self._group_imm(4, reg, imm, "and")

    def cmp_imm(self, reg, imm):
        self._group_imm(7, reg, imm, "cmp")

    def _f7(self, ext, reg, name):
        r = R[reg]
        self._emit(self._rex(1, 0, r) + [0xF7] + self._rr(ext, r), f"{name} {reg}")

    def neg(self, reg):
        self._f7(3, reg, "neg")

    def div(self, reg):
        self._f7(6, reg, "div")

    def idiv(self, reg):
        self._f7(7, reg, "idiv")

    def cqo(self):
        self._emit([0x48, 0x99], "cqo")

    def _shift_cl(self, ext, reg, name):
        r = R[reg]
        self._emit(self._rex(1, 0, r) + [0xD3] + self._rr(ext, r), f"{name} {reg}, cl")

    def shl_cl(self, reg):
        self._shift_cl(4, reg, "shl")

    def shr_cl(self, reg):
        self._shift_cl(5, reg, "shr")

    def sar_cl(self, reg):
        self._shift_cl(7, reg, "sar")

    def shl_imm(self, reg, n):
        r = R[reg]
        self._emit(self._rex(1, 0, r) + [0xC1] + self._rr(4, r) + [n], f"shl {reg}, {n}")

    def sar_imm(self, reg, n):
        r = R[reg]
        self._emit(self._rex(1, 0, r) + [0xC1] + self._rr(7, r) + [n], f"sar {reg}, {n}")

    def setcc(self, cc, reg):
        r = R[reg]
        assert r < 4, "setcc only on legacy low-byte registers"
        self._emit([0x0F, 0x90 | CC[cc]] + self._rr(0, r), f"set{cc} {LOW8[r]}")

    def movzx8(self, dst, src):
        d, s = R[dst], R[src]
        assert s < 4
        self._emit(self._rex(1, d, s) + [0x0F, 0xB6] + self._rr(d, s), f"movzx {dst}, {LOW8[s]}")

    # ---- control flow -------------------------------------------------------
    def new_label(self, stem):
        self._counter += 1
        return f".{stem}{self._counter}"

    def label(self, name):
        if name in self.labels:
            raise ValueError(f"duplicate label {name}")
        self.labels[name] = len(self.code)
        self.listing.append((len(self.code), f"{name}:", True))

    def _rel32_to_label(self, head, label, text):
        self._fixups.append((len(self.code) + len(head), label))
        self._emit(head + [0, 0, 0, 0], text)

    def jmp(self, label):
        self._rel32_to_label([0xE9], label, f"jmp {label}")

    def jcc(self, cc, label):
        self._rel32_to_label([0x0F, 0x80 | CC[cc]], label, f"j{cc} {label}")

    def call_label(self, label):
        self._rel32_to_label([0xE8], label, f"call {label}")

    def call_sym(self, symbol):
        """call rel32 to another function, resolved at link time."""
        self.relocations.append(Relocation(len(self.code) + 1, symbol, REL32))
        self._emit([0xE8] + list(PLACEHOLDER32), f"call {symbol}")

    def call_reg(self, reg):
        r = R[reg]
        self._emit(([0x41] if r & 8 else []) + [0xFF] + self._rr(2, r), f"call {reg}")

    def ret(self):
        self._emit([0xC3], "ret")

    def finish(self):
        """Resolve local label fixups; returns the code bytes."""
        for pos, label in self._fixups:
            if label not in self.labels:
                raise ValueError(f"undefined label {label}")
            self.code[pos:pos + 4] = struct.pack("<i", self.labels[label] - (pos + 4))
        self._fixups.clear()
        return bytes(self.code)

    def text(self):
        return "\n".join(t if is_label else f"{off:06x}  {t}" for off, t, is_label in self.listing) + "\n"
