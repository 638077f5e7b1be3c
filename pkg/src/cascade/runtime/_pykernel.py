"""Pure-Python VM kernel; same contract as the compiled one, via ctypes."""
from __future__ import annotations

import ctypes
import os

from .layout import (BYTES_FLAG, CLASS_CLASS, FORWARDED_FLAG, S_ALLOCS, S_COLLECTING,
                     S_COLLECTIONS, S_CURSOR, S_FROM, S_GLOBALS, S_LAST_FWD, S_LAST_LIVE,
                     S_LIMIT, S_NGLOBALS, S_NIL, S_NROOTS, S_OOM, S_PINNED, S_ROOTS, S_SINK,
                     S_SINK_CAP, S_SINK_DROPPED, S_SINK_FD, S_SINK_LEN, S_SINK_MODE, S_SPACE_A,
                     S_SPACE_B, S_SPACE_SIZE, S_TORTURE, STATE_WORDS)

KIND = "python"
MASK = (1 << 64) - 1
MAX_ARGS = 8

_S = None


def _words(address, count):
    return (ctypes.c_uint64 * count).from_address(address)


def set_current(state):
    global _S
    _S = _words(state, STATE_WORDS)


def _forward(w, ctx):
    S = _S
    lo = S[S_FROM]
    if w & 7 or not lo <= w < lo + S[S_SPACE_SIZE]:
        return w
    head = _words(w, 2)
    if head[0] & FORWARDED_FLAG:
        return head[1]
    size = 16 + 8 * head[1]
    dst = ctx[0]
    ctypes.memmove(dst, w, size)
    ctx[0] = dst + size
    ctx[1] += 1
    head[0] |= FORWARDED_FLAG
    head[1] = dst
    return dst


def _collect():
    S = _S
    if S[S_COLLECTING]:
        return
    S[S_COLLECTING] = 1
    to_space = S[S_SPACE_B] if S[S_FROM] == S[S_SPACE_A] else S[S_SPACE_A]
    ctx = [to_space, 0]
    pinned = _words(S[S_PINNED], 2 + MAX_ARGS)
    pinned[1] = _forward(pinned[1], ctx)
    for i in range(min(pinned[0], MAX_ARGS)):
        pinned[2 + i] = _forward(pinned[2 + i], ctx)
    for base, count in ((S[S_ROOTS], S[S_NROOTS]), (S[S_GLOBALS], S[S_NGLOBALS])):
        if count:
            roots = _words(base, count)
            for i in range(count):
                roots[i] = _forward(roots[i], ctx)
    scan = to_space
    while scan < ctx[0]:
        head = _words(scan, 2)
        n = head[1]
        if not head[0] & BYTES_FLAG and n:
            slots = _words(scan + 16, n)
            for i in range(n):
                slots[i] = _forward(slots[i], ctx)
        scan += 16 + 8 * n
    S[S_FROM] = to_space
    S[S_CURSOR] = ctx[0]
    S[S_LIMIT] = to_space + S[S_SPACE_SIZE]
    S[S_LAST_LIVE] = ctx[0] - to_space
    S[S_LAST_FWD] = ctx[1]
    S[S_COLLECTIONS] += 1
    S[S_COLLECTING] = 0


def _allocate(cls, n):
    S = _S
    if n > S[S_SPACE_SIZE] >> 3 or 16 + 8 * n > S[S_SPACE_SIZE]:
        S[S_OOM] = 1
        return 0
    size = 16 + 8 * n
    if S[S_TORTURE]:
        _collect()
    if S[S_CURSOR] + size > S[S_LIMIT]:
        _collect()
        if S[S_CURSOR] + size > S[S_LIMIT]:
            S[S_OOM] = 1
            return 0
    addr = S[S_CURSOR]
    S[S_CURSOR] = addr + size
    S[S_ALLOCS] += 1
    obj = _words(addr, 2 + n)
    obj[0] = cls
    obj[1] = n
    nil = S[S_NIL]
    for i in range(n):
        obj[2 + i] = nil
    return addr


def _signed(w):
    return w - (1 << 64) if w >> 63 else w


def _class_new(class_oop):
    if class_oop == 0 or class_oop & 7:
        return 0
    cls = _words(class_oop, 4)
    if cls[0] & 0xFFFFFFFF != CLASS_CLASS:
        return 0
    return _allocate(_signed(cls[2]) >> 1 & MASK, _signed(cls[3]) >> 1 & MASK)


def _primitive_new():
    return _class_new(_words(_S[S_PINNED], 2)[1])


def _sink(data: bytes):
    S = _S
    if S[S_SINK_MODE] == 1:
        os.write(S[S_SINK_FD], data)
        return
    used = S[S_SINK_LEN]
    if used + len(data) > S[S_SINK_CAP]:
        S[S_SINK_DROPPED] += len(data)
        return
    ctypes.memmove(S[S_SINK] + used, data, len(data))
    S[S_SINK_LEN] = used + len(data)


def _print_oop(oop):
    _sink(b"%x\n" % oop)
    return oop


def _write_byte(b):
    _sink(bytes([b & 0xFF]))
    return b


def _hash_mix(a, b):
    return ((a * 0x9E3779B97F4A7C15) ^ (b + (a >> 7))) & MASK


def _collect_fn():
    _collect()
    return _S[S_LAST_LIVE]


_F0 = ctypes.CFUNCTYPE(ctypes.c_uint64)
_F1 = ctypes.CFUNCTYPE(ctypes.c_uint64, ctypes.c_uint64)
_F2 = ctypes.CFUNCTYPE(ctypes.c_uint64, ctypes.c_uint64, ctypes.c_uint64)
_CALLBACKS = {
    "allocate": _F2(_allocate),
    "primitiveNew": _F0(_primitive_new),
    "printOop": _F1(_print_oop),
    "writeByte": _F1(_write_byte),
    "hashMix": _F2(_hash_mix),
    "collectGarbage": _F0(_collect_fn),
}


def allocate(cls, n):
    return _allocate(cls, n)


def collect():
    _collect()
    return _S[S_LAST_LIVE], _S[S_LAST_FWD]


def basic_new(class_oop):
    return _class_new(class_oop)


def print_oop(oop):
    return _print_oop(oop)


def write_byte(b):
    return _write_byte(b)


def hash_mix(a, b):
    return _hash_mix(a, b)


_entries: dict = {}


def invoke(entry):
    fn = _entries.get(entry)
    if fn is None:
        fn = _entries[entry] = _F0(entry)
    return fn()


def vm_function_addresses():
    return {name: ctypes.cast(cb, ctypes.c_void_p).value for name, cb in _CALLBACKS.items()}


def write_pinned(receiver, args):
    if len(args) > MAX_ARGS:
        raise ValueError("too many arguments")
    pinned = _words(_S[S_PINNED], 2 + MAX_ARGS)
    pinned[0] = len(args)
    pinned[1] = receiver
    for i, a in enumerate(args):
        pinned[2 + i] = a


def pinned_result():
    return _words(_S[S_PINNED], 3 + MAX_ARGS)[2 + MAX_ARGS]


def take_oom():
    flag = _S[S_OOM]
    _S[S_OOM] = 0
    return bool(flag)
