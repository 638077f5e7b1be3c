"""TAC/SSA-hybrid IR data structures and the textual dump format."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..frontend.nodes import BasicType


@dataclass(frozen=True)
class Reg:
    name: str

    def __str__(self):
        return f"%{self.name}"


@dataclass(frozen=True)
class Imm:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Sym:
    name: str

    def __str__(self):
        return f"@{self.name}"


Operand = Union[Reg, Imm, Sym]

BINARY_OPCODES = {"add", "sub", "mul", "div", "mod", "band", "bor", "bxor",
                  "shl", "shr", "cmp_eq", "cmp_lt", "cmp_le"}
# opcode -> fixed operand count (None: variable, checked elsewhere)
OPERAND_COUNTS = {
    **{op: 2 for op in BINARY_OPCODES},
    "load_word": 1, "store_word": 2, "move": 1, "arg_slot_read": 1,
    "call_internal": None, "call_vm": None,
    "ret": None, "jump": 0, "branch_if": 1,
}
TERMINATORS = {"ret", "jump", "branch_if"}
SIGNEDNESS_MATTERS = {"div", "mod", "shr", "cmp_lt", "cmp_le"}


@dataclass
class Instr:
    op: str
    dest: Optional[str] = None
    args: list = field(default_factory=list)
    signed: bool = False
    target: Optional[str] = None      # callee selector or VM function name
    targets: tuple = ()               # successor block ids for jump/branch_if
    fail: bool = False                # ret that signals primitive failure

    def __post_init__(self):
        n = OPERAND_COUNTS.get(self.op, "?")
        if n == "?":
            raise ValueError(f"unknown opcode {self.op!r}")
        if n is not None and len(self.args) != n:
            raise ValueError(f"{self.op} takes {n} operands, got {len(self.args)}")

    def uses(self):
        return [a.name for a in self.args if isinstance(a, Reg)]

    def __str__(self):
        name = self.op + (".s" if self.signed and self.op in SIGNEDNESS_MATTERS else "")
        parts = []
        if self.target is not None:
            parts.append(f"@{self.target}" if self.op == "call_vm" else self.target)
        parts.extend(str(a) for a in self.args)
        if self.op == "jump":
            parts = [f"L{self.targets[0]}"]
        elif self.op == "branch_if":
            parts = [str(self.args[0]), f"L{self.targets[0]}", f"L{self.targets[1]}"]
        elif self.op == "ret" and self.fail:
            parts = ["fail"]
        text = " ".join([name] + parts)
        return f"%{self.dest} = {text}" if self.dest else text


@dataclass
class Phi:
    dest: str
    incoming: dict = field(default_factory=dict)   # pred block id -> Operand

    def __str__(self):
        inc = " ".join(f"[L{p}: {v}]" for p, v in sorted(self.incoming.items()))
        return f"%{self.dest} = phi {inc}"


@dataclass
class BasicBlock:
    id: int
    phis: list = field(default_factory=list)
    instrs: list = field(default_factory=list)
    term: Optional[Instr] = None

    @property
    def successors(self):
        return list(self.term.targets) if self.term else []


@dataclass
class Scope:
    id: int
    parent: Optional[int]
    name: str
    variables: list = field(default_factory=list)


@dataclass
class IrFunction:
    name: str
    params: list                       # declared argument vregs, receiver excluded
    blocks: list
    receiver: str = "self"
    frame_hint: int = 0
    types: dict = field(default_factory=dict)        # vreg -> BasicType
    scopes: list = field(default_factory=list)
    vreg_scope: dict = field(default_factory=dict)   # vreg -> scope id
    returns_oop: bool = False
    form: str = "tac"

    def block(self, bid) -> BasicBlock:
        for b in self.blocks:
            if b.id == bid:
                return b
        raise KeyError(bid)

    def block_map(self):
        return {b.id: b for b in self.blocks}

    def predecessors(self):
        preds = {b.id: [] for b in self.blocks}
        for b in self.blocks:
            for s in b.successors:
                if s in preds and b.id not in preds[s]:
                    preds[s].append(b.id)
        return preds

    def vregs(self):
        names = [self.receiver, *self.params]
        for b in self.blocks:
            names.extend(p.dest for p in b.phis)
            names.extend(i.dest for i in b.instrs if i.dest)
            for i in b.instrs + ([b.term] if b.term else []):
                names.extend(i.uses())
            for p in b.phis:
                names.extend(v.name for v in p.incoming.values() if isinstance(v, Reg))
        return list(dict.fromkeys(names))

    def type_of(self, vreg):
        return self.types.get(vreg, BasicType.WORD)

    def dump(self):
        params = ", ".join(f"%{p}" for p in self.params)
        lines = [f"function {self.name} (%{self.receiver}; {params}) form={self.form} frame={self.frame_hint}"]
        for b in self.blocks:
            lines.append(f"L{b.id}:")
            lines.extend(f"  {p}" for p in b.phis)
            lines.extend(f"  {i}" for i in b.instrs)
            lines.append(f"  {b.term}" if b.term else "  <no terminator>")
        return "\n".join(lines) + "\n"
