"""Word layout of the VM region: state block, pinned slot, statics, globals, roots, sink, semispaces."""

# state word indices
S_SPACE_SIZE = 0
S_SPACE_A = 1
S_SPACE_B = 2
S_FROM = 3          # start of the space currently allocated into
S_CURSOR = 4
S_LIMIT = 5
S_PINNED = 6
S_NIL = 7
S_TORTURE = 8
S_COLLECTIONS = 9
S_ROOTS = 10
S_NROOTS = 11
S_ROOTS_CAP = 12
S_SINK = 13
S_SINK_CAP = 14
S_SINK_LEN = 15
S_SINK_MODE = 16    # 0 buffer, 1 file descriptor
S_SINK_FD = 17
S_SINK_DROPPED = 18
S_LAST_LIVE = 19
S_LAST_FWD = 20
S_ALLOCS = 21
S_OOM = 22
S_COLLECTING = 23
S_STATIC_LO = 24
S_STATIC_HI = 25
S_GLOBALS = 26
S_NGLOBALS = 27
STATE_WORDS = 32

HEADER_BYTES = 16
BYTES_FLAG = 1 << 32
FORWARDED_FLAG = 1 << 62
CLASS_MASK = 0xFFFFFFFF

SINK_BUFFER = 0
SINK_FD = 1

# class ids
NIL_CLASS = 1
TRUE_CLASS = 2
FALSE_CLASS = 3
CLASS_CLASS = 4
BYTES_CLASS = 5
FIRST_USER_CLASS = 16
