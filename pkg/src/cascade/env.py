"""Execution environment shared by the IR and AST interpreters."""
from __future__ import annotations

import ctypes
from dataclasses import dataclass, field
from typing import Callable, Optional

DEFAULT_STEP_BUDGET = 10 ** 8
DEFAULT_MAX_DEPTH = 100


class RawMemory:
    """Word access to real process memory (the VM heap lives there)."""

    def load(self, address):
        return ctypes.c_uint64.from_address(address).value

    def store(self, address, value):
        ctypes.c_uint64.from_address(address).value = value


@dataclass
class SymbolEnv:
    vm_functions: dict = field(default_factory=dict)    # name -> callable(*words) -> word
    vm_arities: dict = field(default_factory=dict)      # name -> declared argument count
    globals: dict = field(default_factory=dict)         # name -> address of the word
    functions: dict = field(default_factory=dict)       # selector -> IrFunction
    methods: dict = field(default_factory=dict)         # selector -> MethodNode
    memory: RawMemory = field(default_factory=RawMemory)
    arg_slot: Optional[Callable[[int], int]] = None
    step_budget: int = DEFAULT_STEP_BUDGET
    max_depth: int = DEFAULT_MAX_DEPTH
