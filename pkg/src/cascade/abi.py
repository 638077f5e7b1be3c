"""Fixed layout shared by native code and the runtime."""

PINNED_SYMBOL = "pinned_arg_slot"
MAX_ARGS = 8
PINNED_ARGC = 0
PINNED_RECEIVER = 8
PINNED_ARGS = 16
PINNED_RESULT = PINNED_ARGS + 8 * MAX_ARGS
PINNED_SAVED_SP = PINNED_RESULT + 8
PINNED_BYTES = PINNED_SAVED_SP + 8

STATUS_OK = 0
STATUS_FAILED = 1

# platform convention for VM function calls
VM_ARG_REGS = ("rdi", "rsi", "rdx", "rcx", "r8", "r9")
CALLEE_SAVED = ("rbx", "r12", "r13", "r14", "r15")
