"""Exception hierarchy shared by every stage of the toolchain."""


class CascadeError(Exception):
    """Base class for all errors raised by this package."""


class UserError(CascadeError):
    """Errors caused by bad input rather than by a defect in the toolchain."""


# -- frontend ---------------------------------------------------------------

class ParseError(UserError):
    def __init__(self, line, column, message):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class PragmaPlacementError(ParseError):
    pass


class UnsupportedIdiom(UserError):
    def __init__(self, name):
        super().__init__(f"no substitution for inlined C idiom {name!r}")
        self.name = name


class UnknownVariableInPragma(UserError):
    def __init__(self, name):
        super().__init__(f"type pragma names unknown variable {name!r}")
        self.name = name


# -- reachability / lowering ------------------------------------------------

class UnknownSelector(UserError):
    def __init__(self, selector, caller=None):
        where = f" (sent from {caller})" if caller else ""
        super().__init__(f"unknown selector {selector!r}{where}")
        self.selector = selector
        self.caller = caller


class BlockMisuse(UserError):
    pass


class StageError(CascadeError):
    def __init__(self, stage, inner):
        super().__init__(f"stage {stage!r} failed: {inner}")
        self.stage = stage
        self.inner = inner


# -- execution --------------------------------------------------------------

class DivisionByZero(CascadeError):
    pass


class PrimitiveFailure(CascadeError):
    """Raised by the interpreters when Slang code executes ``primitiveFail``."""


class UnresolvedVmFunction(CascadeError):
    def __init__(self, name):
        super().__init__(f"no implementation for VM function {name!r}")
        self.name = name


class StepBudgetExceeded(CascadeError):
    pass


# -- codegen ----------------------------------------------------------------

class UnresolvedSymbol(CascadeError):
    def __init__(self, name):
        super().__init__(f"unresolved symbol {name!r}")
        self.name = name


class UnsupportedInstr(CascadeError):
    def __init__(self, opcode):
        super().__init__(f"no native lowering for opcode {opcode!r}")
        self.opcode = opcode


class ArityMismatch(CascadeError):
    pass


# -- runtime ----------------------------------------------------------------

class OutOfMemory(CascadeError):
    pass


class CompileError(UserError):
    def __init__(self, stage, detail):
        super().__init__(f"compilation failed in {stage}: {detail}")
        self.stage = stage
        self.detail = detail


class PrimitiveFailed(CascadeError):
    def __init__(self, selector):
        super().__init__(f"primitive {selector!r} failed")
        self.selector = selector


class SymbolNotFound(CascadeError):
    def __init__(self, name):
        super().__init__(f"symbol {name!r} not found")
        self.name = name


class MapParseError(UserError):
    def __init__(self, line_no, text=""):
        super().__init__(f"malformed symbol map line {line_no}: {text!r}")
        self.line_no = line_no


class ActivationReentered(CascadeError):
    pass


class ActivationContractError(CascadeError):
    pass


class UndefinedVariable(UserError):
    def __init__(self, name, where=None):
        super().__init__(f"undefined variable {name!r}" + (f" in {where}" if where else ""))
        self.name = name
