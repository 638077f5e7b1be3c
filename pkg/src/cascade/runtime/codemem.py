"""Executable code regions: mapped writable, filled, then flipped to read+execute."""
from __future__ import annotations

import ctypes
import ctypes.util
import mmap

_libc = ctypes.CDLL(ctypes.util.find_library("c") or None, use_errno=True)
_libc.mmap.restype = ctypes.c_void_p
_libc.mmap.argtypes = [ctypes.c_void_p, ctypes.c_size_t, ctypes.c_int, ctypes.c_int,
                       ctypes.c_int, ctypes.c_long]
_libc.mprotect.argtypes = [ctypes.c_void_p, ctypes.c_size_t, ctypes.c_int]
_libc.munmap.argtypes = [ctypes.c_void_p, ctypes.c_size_t]

PAGE = mmap.PAGESIZE
_MAP_FAILED = ctypes.c_void_p(-1).value


def map_anonymous(size, prot=mmap.PROT_READ | mmap.PROT_WRITE):
    size = -(-size // PAGE) * PAGE
    addr = _libc.mmap(None, size, prot, mmap.MAP_PRIVATE | mmap.MAP_ANONYMOUS, -1, 0)
    if addr in (None, _MAP_FAILED):
        raise OSError(ctypes.get_errno(), "mmap failed")
    return addr, size


class CodeRegion:
    """One immutable block of machine code."""

    def __init__(self, code: bytes):
        self.size_requested = len(code)
        self.address, self.size = map_anonymous(max(1, len(code)))
        ctypes.memmove(self.address, code, len(code))
        if _libc.mprotect(self.address, self.size, mmap.PROT_READ | mmap.PROT_EXEC) != 0:
            raise OSError(ctypes.get_errno(), "mprotect failed")
        self.executable = True

    def read(self):
        return ctypes.string_at(self.address, self.size_requested)

    def release(self):
        if self.address:
            _libc.munmap(self.address, self.size)
            self.address = 0

    def __del__(self):
        try:
            self.release()
        except Exception:
            pass


def load_code(code: bytes) -> CodeRegion:
    return CodeRegion(code)
