"""The VM heap: one mapped region holding state, pinned slot, statics, globals, roots, sink and semispaces."""
from __future__ import annotations

import ctypes
import os
from contextlib import contextmanager
from dataclasses import dataclass

from .. import abi
from ..errors import OutOfMemory
from ..words import MASK, tag
from . import kernel as kernel_select
from .codemem import map_anonymous
from .layout import (BYTES_CLASS, BYTES_FLAG, CLASS_CLASS, CLASS_MASK, FALSE_CLASS,
                     FORWARDED_FLAG, HEADER_BYTES, NIL_CLASS, S_ALLOCS, S_COLLECTIONS, S_CURSOR,
                     S_FROM, S_GLOBALS, S_LAST_FWD, S_LAST_LIVE, S_LIMIT, S_NGLOBALS, S_NIL,
                     S_NROOTS, S_OOM, S_PINNED, S_ROOTS, S_ROOTS_CAP, S_SINK, S_SINK_CAP,
                     S_SINK_DROPPED, S_SINK_FD, S_SINK_LEN, S_SINK_MODE, S_SPACE_A, S_SPACE_B,
                     S_SPACE_SIZE, S_STATIC_HI, S_STATIC_LO, S_TORTURE, SINK_BUFFER, SINK_FD,
                     STATE_WORDS, TRUE_CLASS)

DEFAULT_SPACE_BYTES = 8 * 1024 * 1024
STATIC_BYTES = 64 * 1024
GLOBAL_WORDS = 64
ROOT_WORDS = 4096
SINK_BYTES = 1 << 20


def _align(n, a=16):
    return -(-n // a) * a


def torture_from_env():
    return os.environ.get("CASCADE_GC_TORTURE") == "1"


@dataclass(frozen=True)
class CollectStats:
    live_bytes: int
    forwarded_count: int


# kernel module -> Heap whose state it currently points at
_current: dict = {}


class Heap:
    def __init__(self, space_bytes=DEFAULT_SPACE_BYTES, torture=None, kernel=None,
                 sink_bytes=SINK_BYTES):
        self.kernel = kernel if kernel is not None else kernel_select.load()
        space_bytes = _align(space_bytes, 8)
        offsets = {}
        cursor = 0
        for name, size in (("state", 8 * STATE_WORDS), ("pinned", abi.PINNED_BYTES),
                           ("static", STATIC_BYTES), ("globals", 8 * GLOBAL_WORDS),
                           ("roots", 8 * ROOT_WORDS), ("sink", sink_bytes),
                           ("space_a", space_bytes), ("space_b", space_bytes)):
            offsets[name] = cursor
            cursor = _align(cursor + size, 64)
        self.base, self.size = map_anonymous(cursor)
        self.addr = {name: self.base + off for name, off in offsets.items()}
        self.state = self.addr["state"]
        self.pinned = self.addr["pinned"]
        self._S = (ctypes.c_uint64 * STATE_WORDS).from_address(self.state)
        self._P = (ctypes.c_uint64 * (abi.PINNED_BYTES // 8)).from_address(self.pinned)
        S = self._S
        S[S_SPACE_SIZE] = space_bytes
        S[S_SPACE_A] = self.addr["space_a"]
        S[S_SPACE_B] = self.addr["space_b"]
        S[S_FROM] = self.addr["space_a"]
        S[S_CURSOR] = self.addr["space_a"]
        S[S_LIMIT] = self.addr["space_a"] + space_bytes
        S[S_PINNED] = self.pinned
        S[S_ROOTS] = self.addr["roots"]
        S[S_ROOTS_CAP] = ROOT_WORDS
        S[S_SINK] = self.addr["sink"]
        S[S_SINK_CAP] = sink_bytes
        S[S_SINK_MODE] = SINK_BUFFER
        S[S_GLOBALS] = self.addr["globals"]
        S[S_STATIC_LO] = self.addr["static"]
        S[S_STATIC_HI] = self.addr["static"] + STATIC_BYTES
        self._static_cursor = self.addr["static"]
        self.global_index: dict[str, int] = {}
        self.nil = self.allocate_static(NIL_CLASS, 0)
        S[S_NIL] = self.nil
        self.true = self.allocate_static(TRUE_CLASS, 0)
        self.false = self.allocate_static(FALSE_CLASS, 0)
        self.define_global("nilObject", self.nil)
        self.define_global("trueObject", self.true)
        self.define_global("falseObject", self.false)
        self.torture = torture_from_env() if torture is None else torture

    # -- lifecycle ------------------------------------------------------------

    def activate(self):
        if _current.get(self.kernel) is not self:
            self.kernel.set_current(self.state)
            _current[self.kernel] = self

    @property
    def torture(self):
        return bool(self._S[S_TORTURE])

    @torture.setter
    def torture(self, on):
        self._S[S_TORTURE] = 1 if on else 0

    @property
    def space_bytes(self):
        return self._S[S_SPACE_SIZE]

    @property
    def collections(self):
        return self._S[S_COLLECTIONS]

    @property
    def allocations(self):
        return self._S[S_ALLOCS]

    def space_range(self):
        lo = self._S[S_FROM]
        return lo, lo + self._S[S_SPACE_SIZE]

    def used_bytes(self):
        return self._S[S_CURSOR] - self._S[S_FROM]

    def take_oom(self):
        """Return and clear the out-of-memory flag raised inside the kernel."""
        flag = self._S[S_OOM]
        self._S[S_OOM] = 0
        return bool(flag)

    # -- allocation -------------------------------------------------------------

    def allocate_static(self, class_id, n_slots, slots=()):
        """Never-moving object outside the semispaces; slots must not reference heap objects."""
        size = HEADER_BYTES + 8 * n_slots
        addr = self._static_cursor
        if addr + size > self.addr["static"] + STATIC_BYTES:
            raise OutOfMemory("static area exhausted")
        self._static_cursor += size
        words = (ctypes.c_uint64 * (2 + n_slots)).from_address(addr)
        words[0] = class_id
        words[1] = n_slots
        fill = list(slots) + [self._S[S_NIL]] * (n_slots - len(slots))
        for i, v in enumerate(fill):
            words[2 + i] = v & MASK
        return addr

    def make_class(self, instance_class_id, instance_slots):
        """Static class object: slots hold the tagged instance class id and size."""
        return self.allocate_static(CLASS_CLASS, 2, (tag(instance_class_id), tag(instance_slots)))

    def allocate(self, class_id, n_slots):
        if n_slots < 0:
            raise ValueError("negative slot count")
        self.activate()
        oop = self.kernel.allocate(class_id & MASK, n_slots)
        if self.take_oom() or oop == 0:
            raise OutOfMemory(f"cannot allocate {n_slots} slots")
        return oop

    def basic_new(self, class_oop):
        self.activate()
        oop = self.kernel.basic_new(class_oop)
        if self.take_oom() or oop == 0:
            raise OutOfMemory("basicNew")
        return oop

    def new_bytes(self, data: bytes):
        n = 1 + -(-len(data) // 8)
        oop = self.allocate(BYTES_CLASS | BYTES_FLAG, n)
        ctypes.c_uint64.from_address(oop + HEADER_BYTES).value = len(data)
        ctypes.memmove(oop + HEADER_BYTES + 8, data, len(data))
        return oop

    def bytes_of(self, oop):
        length = ctypes.c_uint64.from_address(oop + HEADER_BYTES).value
        return ctypes.string_at(oop + HEADER_BYTES + 8, length)

    def collect(self) -> CollectStats:
        self.activate()
        live, fwd = self.kernel.collect()
        return CollectStats(live, fwd)

    @property
    def last_collect(self):
        return CollectStats(self._S[S_LAST_LIVE], self._S[S_LAST_FWD])

    # -- object access --------------------------------------------------------------

    def header(self, oop):
        return ctypes.c_uint64.from_address(oop).value

    def class_id(self, oop):
        return self.header(oop) & CLASS_MASK

    def is_bytes(self, oop):
        return bool(self.header(oop) & BYTES_FLAG)

    def is_forwarded(self, oop):
        return bool(self.header(oop) & FORWARDED_FLAG)

    def slot_count(self, oop):
        return ctypes.c_uint64.from_address(oop + 8).value

    def slot(self, oop, i):
        return ctypes.c_uint64.from_address(oop + HEADER_BYTES + 8 * i).value

    def set_slot(self, oop, i, value):
        ctypes.c_uint64.from_address(oop + HEADER_BYTES + 8 * i).value = value & MASK

    def is_heap_ref(self, word):
        lo, hi = self.space_range()
        return word & 7 == 0 and lo <= word < hi

    def is_static(self, word):
        return word & 7 == 0 and self.addr["static"] <= word < self._static_cursor

    def objects(self):
        """Walk the active space in address order."""
        addr = self._S[S_FROM]
        end = self._S[S_CURSOR]
        while addr < end:
            yield addr
            addr += HEADER_BYTES + 8 * self.slot_count(addr)

    # -- roots ------------------------------------------------------------------------

    def define_global(self, name, value=0):
        if name not in self.global_index:
            if len(self.global_index) >= GLOBAL_WORDS:
                raise OutOfMemory("global table full")
            self.global_index[name] = len(self.global_index)
            self._S[S_NGLOBALS] = len(self.global_index)
        address = self.global_address(name)
        ctypes.c_uint64.from_address(address).value = value & MASK
        return address

    def global_address(self, name):
        return self.addr["globals"] + 8 * self.global_index[name]

    def global_value(self, name):
        return ctypes.c_uint64.from_address(self.global_address(name)).value

    def push_root(self, oop):
        n = self._S[S_NROOTS]
        if n >= ROOT_WORDS:
            raise OutOfMemory("root table full")
        ctypes.c_uint64.from_address(self.addr["roots"] + 8 * n).value = oop & MASK
        self._S[S_NROOTS] = n + 1
        return n

    def root(self, index):
        return ctypes.c_uint64.from_address(self.addr["roots"] + 8 * index).value

    def pop_root(self):
        n = self._S[S_NROOTS] - 1
        value = self.root(n)
        self._S[S_NROOTS] = n
        return value

    def roots(self):
        return [self.root(i) for i in range(self._S[S_NROOTS])]

    @contextmanager
    def rooted(self, *oops):
        """Keep oops alive across collections; yields a getter for their current addresses."""
        base = self._S[S_NROOTS]
        for o in oops:
            self.push_root(o)
        try:
            yield lambda i: self.root(base + i)
        finally:
            self._S[S_NROOTS] = base

    # -- pinned argument slot ----------------------------------------------------------

    def write_pinned(self, receiver, args):
        if len(args) > abi.MAX_ARGS:
            raise ValueError(f"at most {abi.MAX_ARGS} arguments")
        P = self._P
        P[abi.PINNED_ARGC // 8] = len(args)
        P[abi.PINNED_RECEIVER // 8] = receiver & MASK
        for i, a in enumerate(args):
            P[abi.PINNED_ARGS // 8 + i] = a & MASK

    def pinned_word(self, index):
        """0 is the receiver, i >= 1 argument i-1."""
        return self._P[abi.PINNED_RECEIVER // 8 + index]

    @property
    def pinned_receiver(self):
        return self._P[abi.PINNED_RECEIVER // 8]

    def pinned_args(self):
        n = self._P[abi.PINNED_ARGC // 8]
        return [self._P[abi.PINNED_ARGS // 8 + i] for i in range(n)]

    @property
    def pinned_result(self):
        return self._P[abi.PINNED_RESULT // 8]

    # -- print sink -----------------------------------------------------------------

    def sink_to_buffer(self):
        self._S[S_SINK_MODE] = SINK_BUFFER

    def sink_to_fd(self, fd):
        self._S[S_SINK_FD] = fd
        self._S[S_SINK_MODE] = SINK_FD

    def sink_contents(self):
        return ctypes.string_at(self.addr["sink"], self._S[S_SINK_LEN])

    def drain_sink(self):
        data = self.sink_contents()
        self._S[S_SINK_LEN] = 0
        self._S[S_SINK_DROPPED] = 0
        return data

    @property
    def sink_dropped(self):
        return self._S[S_SINK_DROPPED]
