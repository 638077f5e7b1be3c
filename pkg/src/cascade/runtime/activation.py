"""The native boundary: load code, resolve symbols, fill the pinned slot, invoke, read the result."""
from __future__ import annotations

from .. import abi
from ..errors import ActivationContractError, ActivationReentered, OutOfMemory, PrimitiveFailure
from .codemem import load_code
from .heap import Heap
from .symbols import SymbolTable


class NativeActivation:
    """Receiver and argument words must already be unsigned 64-bit Oops."""

    def __init__(self, heap: Heap, symbols: SymbolTable):
        self.heap = heap
        self.symbols = symbols
        self.regions = []
        self.in_flight = False
        self._armed = False
        self._completed = False
        kernel = heap.kernel
        self._write = kernel.write_pinned
        self._invoke = kernel.invoke
        self._result = kernel.pinned_result
        self._take_oom = kernel.take_oom

    def load_code(self, code: bytes) -> int:
        region = load_code(code)
        self.regions.append(region)
        return region.address

    def resolve_symbol(self, name) -> int:
        return self.symbols.resolve(name)

    def write_arg_slot(self, receiver, args):
        if self.in_flight:
            raise ActivationReentered("argument slot written during an activation")
        self.heap.activate()
        self._write(receiver, args)
        self._armed = True
        self._completed = False

    def invoke(self, entry) -> int:
        if self.in_flight:
            raise ActivationReentered("a native activation is already in flight")
        if not self._armed:
            raise ActivationContractError("invoke before write_arg_slot")
        self._armed = False
        self.in_flight = True
        try:
            status = self._invoke(entry)
        finally:
            self.in_flight = False
        self._completed = status == abi.STATUS_OK
        return status

    def read_result(self) -> int:
        if not self._completed:
            raise ActivationContractError("read_result without a successful invoke")
        self._completed = False
        return self._result()

    def take_oom(self):
        return self._take_oom()


def native_activation(iface: NativeActivation, entry, receiver, args) -> int:
    """Run entry with the pinned slot holding receiver and args; returns the raw result word.

    Raises PrimitiveFailure when the code takes its failure exit.
    """
    if iface.in_flight:
        raise ActivationReentered("a native activation is already in flight")
    iface.write_arg_slot(receiver, args)
    status = iface.invoke(entry)
    if iface.take_oom():
        raise OutOfMemory("allocation failed inside native code")
    if status != abi.STATUS_OK:
        raise PrimitiveFailure(f"native status {status}")
    return iface.read_result()
