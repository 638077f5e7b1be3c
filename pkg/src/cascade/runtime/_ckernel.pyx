# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled VM kernel: allocation, copying collection, VM functions, native invoke."""
from libc.stdint cimport uint64_t, int64_t, uintptr_t
from libc.string cimport memcpy

cdef extern from "unistd.h":
    ssize_t write(int fd, const void *buf, size_t count) nogil



cdef enum:
    S_SPACE_SIZE = 0
    S_SPACE_A = 1
    S_SPACE_B = 2
    S_FROM = 3
    S_CURSOR = 4
    S_LIMIT = 5
    S_PINNED = 6
    S_NIL = 7
    S_TORTURE = 8
    S_COLLECTIONS = 9
    S_ROOTS = 10
    S_NROOTS = 11
    S_SINK = 13
    S_SINK_CAP = 14
    S_SINK_LEN = 15
    S_SINK_MODE = 16
    S_SINK_FD = 17
    S_SINK_DROPPED = 18
    S_LAST_LIVE = 19
    S_LAST_FWD = 20
    S_ALLOCS = 21
    S_OOM = 22
    S_COLLECTING = 23
    S_GLOBALS = 26
    S_NGLOBALS = 27
    CLASS_CLASS = 4
    PINNED_ARGC = 0
    PINNED_RECEIVER = 1
    PINNED_ARGS = 2
    MAX_ARGS = 8

cdef uint64_t BYTES_FLAG = (<uint64_t>1) << 32
cdef uint64_t FORWARDED_FLAG = (<uint64_t>1) << 62

KIND = "compiled"

cdef uint64_t *S = NULL

ctypedef uint64_t (*entry_fn)() noexcept nogil


def set_current(uintptr_t state):
    global S
    S = <uint64_t *>state


cdef inline uint64_t forward(uint64_t w, uint64_t *free_ptr, uint64_t *count) noexcept nogil:
    cdef uint64_t lo = S[S_FROM]
    cdef uint64_t *obj
    cdef uint64_t size, dst
    if (w & 7) != 0 or w < lo or w >= lo + S[S_SPACE_SIZE]:
        return w
    obj = <uint64_t *>w
    if obj[0] & FORWARDED_FLAG:
        return obj[1]
    size = 16 + 8 * obj[1]
    dst = free_ptr[0]
    memcpy(<void *>dst, <void *>w, size)
    free_ptr[0] = dst + size
    count[0] += 1
    obj[0] |= FORWARDED_FLAG
    obj[1] = dst
    return dst


cdef void c_collect() noexcept nogil:
    cdef uint64_t to_space, free_ptr, scan, count = 0, n, i, header
    cdef uint64_t *pinned
    cdef uint64_t *roots
    cdef uint64_t *obj
    cdef uint64_t argc
    if S[S_COLLECTING]:
        return
    S[S_COLLECTING] = 1
    to_space = S[S_SPACE_B] if S[S_FROM] == S[S_SPACE_A] else S[S_SPACE_A]
    free_ptr = to_space
    pinned = <uint64_t *>S[S_PINNED]
    pinned[PINNED_RECEIVER] = forward(pinned[PINNED_RECEIVER], &free_ptr, &count)
    argc = pinned[PINNED_ARGC]
    if argc > MAX_ARGS:
        argc = MAX_ARGS
    for i in range(argc):
        pinned[PINNED_ARGS + i] = forward(pinned[PINNED_ARGS + i], &free_ptr, &count)
    roots = <uint64_t *>S[S_ROOTS]
    for i in range(S[S_NROOTS]):
        roots[i] = forward(roots[i], &free_ptr, &count)
    roots = <uint64_t *>S[S_GLOBALS]
    for i in range(S[S_NGLOBALS]):
        roots[i] = forward(roots[i], &free_ptr, &count)
    scan = to_space
    while scan < free_ptr:
        obj = <uint64_t *>scan
        n = obj[1]
        if not (obj[0] & BYTES_FLAG):
            for i in range(n):
                obj[2 + i] = forward(obj[2 + i], &free_ptr, &count)
        scan += 16 + 8 * n
    S[S_FROM] = to_space
    S[S_CURSOR] = free_ptr
    S[S_LIMIT] = to_space + S[S_SPACE_SIZE]
    S[S_LAST_LIVE] = free_ptr - to_space
    S[S_LAST_FWD] = count
    S[S_COLLECTIONS] += 1
    S[S_COLLECTING] = 0


cdef uint64_t c_allocate(uint64_t cls, uint64_t n) noexcept nogil:
    cdef uint64_t size, addr, nil, i
    cdef uint64_t *obj
    if n > (S[S_SPACE_SIZE] >> 3):
        S[S_OOM] = 1
        return 0
    size = 16 + 8 * n
    if size > S[S_SPACE_SIZE]:
        S[S_OOM] = 1
        return 0
    if S[S_TORTURE]:
        c_collect()
    if S[S_CURSOR] + size > S[S_LIMIT]:
        c_collect()
        if S[S_CURSOR] + size > S[S_LIMIT]:
            S[S_OOM] = 1
            return 0
    addr = S[S_CURSOR]
    S[S_CURSOR] = addr + size
    S[S_ALLOCS] += 1
    obj = <uint64_t *>addr
    obj[0] = cls
    obj[1] = n
    nil = S[S_NIL]
    for i in range(n):
        obj[2 + i] = nil
    return addr


cdef uint64_t c_class_new(uint64_t class_oop) noexcept nogil:
    cdef uint64_t *cls = <uint64_t *>class_oop
    if class_oop == 0 or (class_oop & 7) != 0 or <unsigned int>cls[0] != CLASS_CLASS:
        return 0
    return c_allocate(<uint64_t>((<int64_t>cls[2]) >> 1), <uint64_t>((<int64_t>cls[3]) >> 1))


cdef uint64_t c_primitive_new() noexcept nogil:
    cdef uint64_t *pinned = <uint64_t *>S[S_PINNED]
    return c_class_new(pinned[PINNED_RECEIVER])


cdef inline void sink_bytes(const char *data, uint64_t length) noexcept nogil:
    cdef uint64_t used
    if S[S_SINK_MODE] == 1:
        write(<int>S[S_SINK_FD], data, length)
        return
    used = S[S_SINK_LEN]
    if used + length > S[S_SINK_CAP]:
        S[S_SINK_DROPPED] += length
        return
    memcpy(<void *>(S[S_SINK] + used), data, length)
    S[S_SINK_LEN] = used + length


cdef uint64_t c_print_oop(uint64_t oop) noexcept nogil:
    cdef char buf[20]
    cdef int i = 18, start
    cdef uint64_t v = oop
    cdef const char *digits = b"0123456789abcdef"
    buf[19] = 10
    if v == 0:
        buf[i] = 48
        i -= 1
    while v:
        buf[i] = digits[v & 15]
        v >>= 4
        i -= 1
    start = i + 1
    sink_bytes(&buf[start], 20 - start)
    return oop


cdef uint64_t c_write_byte(uint64_t b) noexcept nogil:
    cdef char c = <char>(b & 0xFF)
    sink_bytes(&c, 1)
    return b


cdef uint64_t c_hash_mix(uint64_t a, uint64_t b) noexcept nogil:
    return (a * <uint64_t>0x9E3779B97F4A7C15) ^ (b + (a >> 7))


cdef uint64_t c_collect_fn() noexcept nogil:
    c_collect()
    return S[S_LAST_LIVE]


def allocate(uint64_t cls, uint64_t n):
    return c_allocate(cls, n)


def collect():
    c_collect()
    return S[S_LAST_LIVE], S[S_LAST_FWD]


def basic_new(uint64_t class_oop):
    return c_class_new(class_oop)


def print_oop(uint64_t oop):
    return c_print_oop(oop)


def write_byte(uint64_t b):
    return c_write_byte(b)


def hash_mix(uint64_t a, uint64_t b):
    return c_hash_mix(a, b)


def invoke(uintptr_t entry):
    cdef entry_fn fn = <entry_fn>entry
    return fn()


def vm_function_addresses():
    return {
        "allocate": <uintptr_t>&c_allocate,
        "primitiveNew": <uintptr_t>&c_primitive_new,
        "printOop": <uintptr_t>&c_print_oop,
        "writeByte": <uintptr_t>&c_write_byte,
        "hashMix": <uintptr_t>&c_hash_mix,
        "collectGarbage": <uintptr_t>&c_collect_fn,
    }


def write_pinned(uint64_t receiver, args):
    cdef uint64_t *pinned = <uint64_t *>S[S_PINNED]
    cdef Py_ssize_t i, n = len(args)
    if n > MAX_ARGS:
        raise ValueError("too many arguments")
    pinned[PINNED_ARGC] = n
    pinned[PINNED_RECEIVER] = receiver
    for i in range(n):
        pinned[PINNED_ARGS + i] = <uint64_t>args[i]


def pinned_result():
    return (<uint64_t *>S[S_PINNED])[PINNED_ARGS + MAX_ARGS]


def take_oom():
    cdef uint64_t flag = S[S_OOM]
    S[S_OOM] = 0
    return flag != 0
