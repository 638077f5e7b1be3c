"""Patching relocation sites in emitted code."""
from __future__ import annotations

import struct

from ..errors import UnresolvedSymbol
from .x86 import ABS64, PLACEHOLDER32, PLACEHOLDER64, REL32


def link(code: bytearray, relocations, functions):
    """Resolve relative32 calls between functions of one blob."""
    for r in relocations:
        if r.kind != REL32:
            continue
        if r.symbol not in functions:
            raise UnresolvedSymbol(r.symbol)
        code[r.offset:r.offset + 4] = struct.pack("<i", functions[r.symbol] - (r.offset + 4))
    return code


def patch_absolute(code: bytearray, r, address):
    assert r.kind == ABS64
    code[r.offset:r.offset + 8] = struct.pack("<Q", address)


def unpatched_sites(code: bytes, relocations):
    """Relocation sites still holding placeholder bytes."""
    out = []
    for r in relocations:
        width, marker = (8, PLACEHOLDER64) if r.kind == ABS64 else (4, PLACEHOLDER32)
        if bytes(code[r.offset:r.offset + width]) == marker:
            out.append(r)
    return out
