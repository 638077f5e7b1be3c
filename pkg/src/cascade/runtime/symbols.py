"""Symbol resolution: internal VM registrations first, then nm-style map files."""
from __future__ import annotations

from ..errors import MapParseError, SymbolNotFound

ACCEPTED_TYPES = frozenset("TtDd")


def parse_symbol_map(text):
    """Parse `hexaddr type name` lines; returns name -> address."""
    out = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) == 2 and parts[0] in ("U", "w", "v"):
            continue  # undefined symbols carry no address
        if len(parts) != 3:
            raise MapParseError(line_no, raw)
        address, kind, name = parts
        try:
            value = int(address, 16)
        except ValueError:
            raise MapParseError(line_no, raw) from None
        if len(kind) != 1:
            raise MapParseError(line_no, raw)
        if kind not in ACCEPTED_TYPES:
            continue
        out[name] = value
    return out


def load_symbol_map(path):
    with open(path, encoding="utf-8") as fh:
        return parse_symbol_map(fh.read())


class SymbolTable:
    def __init__(self, internal=None, external=None):
        self.internal = dict(internal or {})
        self.external = dict(external or {})

    def register(self, name, address):
        self.internal[name] = address

    def load_map(self, path):
        delta = load_symbol_map(path)
        self.external.update(delta)
        return delta

    def resolve(self, name):
        if name in self.internal:
            return self.internal[name]
        if name in self.external:
            return self.external[name]
        raise SymbolNotFound(name)

    def __contains__(self, name):
        return name in self.internal or name in self.external

    def names(self):
        return sorted(set(self.internal) | set(self.external))


def resolve_symbol(table: SymbolTable, name):
    return table.resolve(name)
