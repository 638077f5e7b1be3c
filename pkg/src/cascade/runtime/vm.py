"""Primitive dispatch with lazy nativization, and the backend switchboard."""
from __future__ import annotations

import ctypes
import enum
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .. import abi
from ..codegen import emit_native, layout_frames
from ..env import SymbolEnv
from ..errors import (CascadeError, CompileError, OutOfMemory, PrimitiveFailed,
                      PrimitiveFailure, UnknownSelector)
from ..frontend import SourceMethod, annotate_types, parse_method, purify
from ..frontend.nodes import BasicType, MethodNode
from ..ir import interpret_ir, lower, to_ssa
from ..reachability import MethodTable, reachable_methods
from ..words import MASK, signed, tag, wrap
from .activation import NativeActivation, native_activation
from .astinterp import AstInterpreter, InterpStats
from .heap import Heap
from .symbols import SymbolTable

# VM functions callable from Slang: name -> argument count
VM_FUNCTION_ARITIES = {
    "allocate": 2, "primitiveNew": 0, "printOop": 1, "writeByte": 1, "hashMix": 2,
    "collectGarbage": 0, "createDirectory": 1, "fileWrite": 2, "fileRead": 1,
}

BACKENDS = ("native", "ir", "ir-tac", "ast")


class SlotState(enum.Enum):
    SOURCE = "source"
    COMPILED = "compiled"
    REFLECTIVE = "reflective"


@dataclass
class PrimitiveSlot:
    selector: str
    state: SlotState = SlotState.SOURCE
    artifact: object = None
    entry: int = 0
    compile_count: int = 0
    dirty: bool = False
    fallback: Optional[Callable] = None
    compiled_at: float = 0.0
    code_address: int = 0


def untag_argument(oop, basic_type):
    """Boundary conversion of one incoming Oop for a parameter of basic_type."""
    if basic_type in (BasicType.WORD, BasicType.SIGNED_WORD) and oop & 1:
        return wrap(signed(oop) >> 1)
    return oop & MASK


@dataclass
class Prepared:
    """Every backend's form of one selector, built once."""
    selector: str
    method: MethodNode
    methods: dict
    tac: dict = field(default_factory=dict)
    ssa: dict = field(default_factory=dict)
    artifact: object = None
    entry: int = 0


class VM:
    def __init__(self, heap: Heap | None = None, filesystem=None, torture=None, space_bytes=None,
                 kernel=None):
        if heap is None:
            kw = {}
            if space_bytes is not None:
                kw["space_bytes"] = space_bytes
            heap = Heap(torture=torture, kernel=kernel, **kw)
        elif torture is not None:
            heap.torture = torture
        self.heap = heap
        if filesystem is None:
            from ..plugins.files import HostFileSystem
            filesystem = HostFileSystem()
        self.filesystem = filesystem
        self.library: dict[str, SourceMethod] = {}
        self.slots: dict[str, PrimitiveSlot] = {}
        self._parsed: dict = {}
        self.interp_stats = InterpStats()
        self.symbols = SymbolTable()
        self._callbacks = {}
        self._register_symbols()
        self.activation = NativeActivation(self.heap, self.symbols)
        self.env = self._make_env()

    # -- symbols and VM functions ----------------------------------------------

    def _register_symbols(self):
        heap = self.heap
        for name, address in heap.kernel.vm_function_addresses().items():
            self.symbols.register(name, address)
        f1 = ctypes.CFUNCTYPE(ctypes.c_uint64, ctypes.c_uint64)
        f2 = ctypes.CFUNCTYPE(ctypes.c_uint64, ctypes.c_uint64, ctypes.c_uint64)
        for name, impl, proto in (("createDirectory", self.vm_create_directory, f1),
                                  ("fileWrite", self.vm_file_write, f2),
                                  ("fileRead", self.vm_file_read, f1)):
            cb = proto(impl)
            self._callbacks[name] = cb
            self.symbols.register(name, ctypes.cast(cb, ctypes.c_void_p).value)
        self.symbols.register(abi.PINNED_SYMBOL, heap.pinned)
        for name in heap.global_index:
            self.symbols.register(name, heap.global_address(name))

    def define_global(self, name, value):
        address = self.heap.define_global(name, value)
        self.symbols.register(name, address)
        self.env.globals[name] = address
        return address

    def _path_of(self, oop):
        if not oop or oop & 7 or not self.heap.is_bytes(oop):
            return None
        try:
            return self.heap.bytes_of(oop).decode("utf-8")
        except UnicodeDecodeError:
            return None

    def vm_create_directory(self, path_oop):
        path = self._path_of(path_oop)
        return 1 if path is not None and self.filesystem.create_directory(path) else 0

    def vm_file_write(self, path_oop, data_oop):
        path = self._path_of(path_oop)
        if path is None or not data_oop or data_oop & 7 or not self.heap.is_bytes(data_oop):
            return 0
        return 1 if self.filesystem.write_file(path, self.heap.bytes_of(data_oop)) else 0

    def vm_file_read(self, path_oop):
        path = self._path_of(path_oop)
        data = self.filesystem.read_file(path) if path is not None else None
        if data is None:
            return 0
        try:
            return self.heap.new_bytes(data)
        except OutOfMemory:
            return 0

    def _make_env(self):
        heap, k = self.heap, self.heap.kernel

        def active(fn):
            def call(*args):
                heap.activate()
                return fn(*args)
            return call

        functions = {
            "allocate": active(k.allocate),
            "primitiveNew": active(lambda: k.basic_new(heap.pinned_receiver)),
            "printOop": active(k.print_oop),
            "writeByte": active(k.write_byte),
            "hashMix": active(k.hash_mix),
            "collectGarbage": active(lambda: k.collect()[0]),
            "createDirectory": self.vm_create_directory,
            "fileWrite": self.vm_file_write,
            "fileRead": self.vm_file_read,
        }
        globals_ = {name: heap.global_address(name) for name in heap.global_index}
        return SymbolEnv(vm_functions=functions, vm_arities=dict(VM_FUNCTION_ARITIES),
                         globals=globals_, arg_slot=heap.pinned_word)

    # -- library ----------------------------------------------------------------

    def define(self, source, class_name="Slang", selector=None):
        """Add or replace Slang source; returns its selector."""
        if isinstance(source, SourceMethod):
            src = source
        else:
            src = SourceMethod(class_name, selector, source)
        if src.selector is None:
            src = SourceMethod(src.class_name, self._parse(src).selector, src.source)
        self.library[src.selector] = src
        return src.selector

    def _parse(self, src: SourceMethod) -> MethodNode:
        key = (src.class_name, src.selector, src.source)
        cached = self._parsed.get(key)
        if cached is None:
            try:
                purified = SourceMethod(src.class_name, src.selector, purify(src.source))
            except CascadeError as exc:
                raise CompileError("purify", exc) from exc
            try:
                parsed = parse_method(purified)
            except CascadeError as exc:
                raise CompileError("parse", exc) from exc
            try:
                cached = annotate_types(parsed)
            except CascadeError as exc:
                raise CompileError("annotate", exc) from exc
            self._parsed[key] = cached
        return cached

    def method(self, selector) -> MethodNode:
        if selector not in self.library:
            raise UnknownSelector(selector)
        return self._parse(self.library[selector])

    def method_table(self) -> MethodTable:
        """Every library method that parses; broken siblings are left out."""
        methods = {}
        for sel, src in self.library.items():
            try:
                methods[sel] = self._parse(src)
            except CompileError:
                continue
        return MethodTable(methods, vm_functions=dict(VM_FUNCTION_ARITIES),
                           globals=frozenset(self.heap.global_index))

    # -- compilation pipeline ---------------------------------------------------------

    def prepare(self, selector, native=True) -> Prepared:
        """Run the full pipeline for selector; CompileError names the failing stage."""
        method = self.method(selector)
        table = self.method_table()
        table.methods[selector] = method
        try:
            reach = reachable_methods(selector, table)
        except CascadeError as exc:
            raise CompileError("reachability", exc) from exc
        prepared = Prepared(selector, method, {s: table.methods[s] for s in reach})
        for sel in reach:
            stage = "lower"
            try:
                tac = lower(table.methods[sel], table)
                prepared.tac[sel] = tac
                stage = "ssa"
                prepared.ssa[sel] = to_ssa(tac)
            except CascadeError as exc:
                raise CompileError(stage, exc) from exc
        if native:
            stage = "layout"
            try:
                entry_fn = prepared.ssa[selector]
                ctx = layout_frames(entry_fn)
                callees = [(prepared.ssa[s], layout_frames(prepared.ssa[s])) for s in reach if s != selector]
                stage = "emit"
                artifact = emit_native(entry_fn, ctx, self.symbols, callees, patch=False)
                stage = "relocate"
                from ..codegen import relocate
                artifact = relocate(artifact, self.symbols)
                stage = "load"
                address = self.activation.load_code(artifact.code)
            except CascadeError as exc:
                raise CompileError(stage, exc) from exc
            prepared.artifact = artifact
            prepared.entry = address + artifact.entry_offset
        return prepared

    # -- primitive slots ------------------------------------------------------------------

    def install(self, selector, source=None, fallback=None, mode="lazy", class_name="Slang"):
        """Bind selector as a primitive; mode is lazy, eager or reflective."""
        if source is not None:
            sel = self.define(source, class_name=class_name, selector=selector)
            selector = selector or sel
        if selector not in self.library:
            raise UnknownSelector(selector)
        slot = self.slots.get(selector) or PrimitiveSlot(selector)
        slot.fallback = fallback
        self.slots[selector] = slot
        if mode == "reflective":
            self.method(selector)
            slot.state = SlotState.REFLECTIVE
        elif mode == "eager":
            self.compile_slot(slot)
        elif mode != "lazy":
            raise ValueError(f"unknown install mode {mode!r}")
        return slot

    def slot(self, selector) -> PrimitiveSlot:
        if selector not in self.slots:
            raise UnknownSelector(selector)
        return self.slots[selector]

    def compile_slot(self, slot: PrimitiveSlot):
        prepared = self.prepare(slot.selector)
        slot.artifact = prepared.artifact
        slot.entry = prepared.entry
        slot.state = SlotState.COMPILED
        slot.compile_count += 1
        slot.dirty = False
        slot.compiled_at = time.time()
        return slot

    def mark_dirty(self, selector):
        self.slot(selector).dirty = True

    def call_primitive(self, selector, receiver=None, args=()):
        """Dispatch through the slot; arguments and result are Oops."""
        slot = self.slots.get(selector)
        if slot is None:
            raise UnknownSelector(selector)
        if receiver is None:
            receiver = self.heap.nil
        state = slot.state
        if state is SlotState.REFLECTIVE:
            try:
                raw = self.run_ast(selector, receiver, args)
            except PrimitiveFailure:
                return self._fail(slot, receiver, args)
            return raw if self.method(selector).returns_oop else ((raw << 1) | 1) & MASK
        if state is SlotState.SOURCE or slot.dirty:
            self.compile_slot(slot)
        try:
            raw = native_activation(self.activation, slot.entry, receiver, args)
        except PrimitiveFailure:
            return self._fail(slot, receiver, args)
        return raw if slot.artifact.returns_oop else ((raw << 1) | 1) & MASK

    def _fail(self, slot, receiver, args):
        if slot.fallback is not None:
            return slot.fallback(receiver, list(args))
        raise PrimitiveFailed(slot.selector)

    # -- direct backend execution (no slots, raw result words) ---------------------------------

    def _interp_args(self, method, receiver, args):
        self.heap.write_pinned(receiver, list(args))
        return [untag_argument(a, method.type_of(p)) for p, a in zip(method.params, args)]

    def _check_oom(self):
        if self.heap.take_oom():
            raise OutOfMemory("allocation failed")

    def run_ast(self, selector, receiver, args, prepared: Prepared | None = None):
        method = prepared.method if prepared else self.method(selector)
        methods = prepared.methods if prepared else self.method_table().methods
        env = self.env
        env.methods = methods
        values = self._interp_args(method, receiver, args)
        try:
            return AstInterpreter(env, self.interp_stats).activate(method, receiver, values)
        finally:
            self._check_oom()

    def run_ir(self, selector, receiver, args, prepared: Prepared | None = None, ssa=True):
        prepared = prepared or self.prepare(selector, native=False)
        fns = prepared.ssa if ssa else prepared.tac
        env = self.env
        env.functions = fns
        values = self._interp_args(prepared.method, receiver, args)
        try:
            return interpret_ir(fns[selector], values, env, receiver=receiver)
        finally:
            self._check_oom()

    def run_native(self, selector, receiver, args, prepared: Prepared | None = None):
        prepared = prepared or self.prepare(selector)
        return native_activation(self.activation, prepared.entry, receiver, args)

    def execute(self, selector, receiver, args, backend="native", prepared=None):
        """Raw result word of selector on one backend."""
        if receiver is None:
            receiver = self.heap.nil
        if backend == "native":
            return self.run_native(selector, receiver, args, prepared)
        if backend == "ir":
            return self.run_ir(selector, receiver, args, prepared, ssa=True)
        if backend == "ir-tac":
            return self.run_ir(selector, receiver, args, prepared, ssa=False)
        if backend == "ast":
            return self.run_ast(selector, receiver, args, prepared)
        raise ValueError(f"unknown backend {backend!r}")
