"""TAC/SSA-hybrid IR: lowering, SSA construction, interpretation."""
from .chain import Converter, ConverterChain, run_chain, standard_converters
from .interp import interpret_ir
from .lower import lower
from .nodes import BasicBlock, Imm, Instr, IrFunction, Phi, Reg, Sym
from .ssa import to_ssa

__all__ = ["BasicBlock", "Converter", "ConverterChain", "Imm", "Instr", "IrFunction", "Phi",
           "Reg", "Sym", "interpret_ir", "lower", "run_chain", "standard_converters", "to_ssa"]
