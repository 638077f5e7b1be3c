"""Names the compiler treats specially: inlined templates and VM functions.

Shared by reachability, lowering, send classification and the interpreters.
"""

# selector -> IR opcode for binary arithmetic/bit templates
BINARY_OPS = {
    "+": "add", "-": "sub", "*": "mul", "//": "div", "\\\\": "mod",
    "bitAnd:": "band", "bitOr:": "bor", "bitXor:": "bxor",
    "<<": "shl", ">>": "shr",
}

COMPARISONS = {"=", "==", "~=", "~~", "<", "<=", ">", ">="}

MEMORY_TEMPLATES = {
    "longAt:", "longAt:put:",
    "fetchWord:ofObject:", "storeWord:ofObject:withValue:",
    "integerValueOf:", "integerObjectOf:",
    "stackAt:", "primitiveFail",
}

SHIFT_TEMPLATES = {"bitShift:"}

CONTROL_TEMPLATES = {
    "ifTrue:", "ifFalse:", "ifTrue:ifFalse:", "ifFalse:ifTrue:",
    "and:", "or:", "whileTrue:", "whileFalse:", "whileTrue", "whileFalse",
    "to:do:", "to:by:do:",
}

TEMPLATE_SELECTORS = frozenset(BINARY_OPS) | COMPARISONS | MEMORY_TEMPLATES | SHIFT_TEMPLATES | CONTROL_TEMPLATES

# reflective facilities understood only by the AST interpreter
REFLECTIVE_INTRINSICS = frozenset({"ifStackContains:do:"})


def vm_send_name(selector, nargs, vm_functions):
    """Return the VM function a plain send resolves to, or None.

    A send resolves to VM function ``f`` when its selector is ``f`` (no
    arguments) or starts with the keyword ``f:`` and the argument count
    matches the declared arity.
    """
    base = selector.split(":", 1)[0]
    if base not in vm_functions:
        return None
    if selector != base and not selector.startswith(base + ":"):
        return None
    arity = vm_functions[base]
    if arity is not None and arity != nargs:
        return None
    return base
