"""Plugins: named groups of primitives compiled and installed as a unit."""
from __future__ import annotations

import enum
import os
import time
from dataclasses import dataclass, field

from ..errors import CompileError, UnknownSelector, UserError
from ..frontend import SourceMethod, load_slang_file
from ..runtime.vm import VM

MANIFEST = "manifest"


class Mode(enum.Enum):
    LAZY = "lazy"
    EAGER = "eager"


@dataclass(frozen=True)
class InstallRecord:
    selector: str
    compiled_at: float
    compile_count: int


@dataclass
class Plugin:
    name: str
    methods: dict                              # selector -> SourceMethod
    target_class: str = "Slang"
    mode: Mode = Mode.LAZY
    dirty: dict = field(default_factory=dict)
    install_log: list = field(default_factory=list)
    vm: VM | None = None
    installed: set = field(default_factory=set)

    def edit(self, selector, source):
        """Replace a method's source; takes effect after mark_dirty."""
        if selector not in self.methods:
            raise UnknownSelector(selector, self.name)
        self.methods[selector] = SourceMethod(self.target_class, selector, source)
        if self.vm is not None:
            self.vm.define(self.methods[selector])

    def call(self, selector, receiver=None, args=()):
        if selector not in self.installed:
            raise UnknownSelector(selector, self.name)
        slot = self.vm.slot(selector)
        before = slot.compile_count
        try:
            return self.vm.call_primitive(selector, receiver, args)
        finally:
            if slot.compile_count != before:
                self.dirty[selector] = False
                self.install_log.append(InstallRecord(selector, slot.compiled_at, slot.compile_count))

    def artifact_bytes(self, selector):
        slot = self.vm.slot(selector)
        return None if slot.artifact is None else slot.artifact.code

    @property
    def total_compilations(self):
        return sum(self.vm.slot(s).compile_count for s in self.installed)


@dataclass
class InstallReport:
    plugin: str
    installed: list = field(default_factory=list)
    compiled: list = field(default_factory=list)
    errors: dict = field(default_factory=dict)       # selector -> CompileError

    @property
    def ok(self):
        return not self.errors


def nativize_plugin(p: Plugin, vm: VM | None = None) -> InstallReport:
    """Bind every method as a primitive; eager mode compiles now, lazy on first call.

    Broken methods are reported and skipped; their siblings stay installed.
    """
    vm = vm or p.vm or VM()
    p.vm = vm
    report = InstallReport(p.name)
    for src in p.methods.values():
        vm.define(src)
    for selector in p.methods:
        try:
            vm.method(selector)
            slot = vm.install(selector, mode="lazy")
            if p.mode is Mode.EAGER:
                vm.compile_slot(slot)
                report.compiled.append(selector)
                p.install_log.append(InstallRecord(selector, slot.compiled_at, slot.compile_count))
        except CompileError as exc:
            report.errors[selector] = exc
            vm.slots.pop(selector, None)
            continue
        p.installed.add(selector)
        p.dirty[selector] = False
        report.installed.append(selector)
    return report


def mark_dirty(p: Plugin, selector):
    if selector not in p.methods:
        raise UnknownSelector(selector, p.name)
    p.dirty[selector] = True
    if p.vm is not None and selector in p.vm.slots:
        p.vm.mark_dirty(selector)


def parse_manifest(text):
    out = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UserError(f"manifest line {line_no}: expected key=value")
        out[key.strip()] = value.strip()
    return out


def _selector_of(src):
    """Selector of a headerless method; broken bodies still yield one so errors surface at install."""
    from ..errors import ParseError
    from ..frontend import parse_method
    from ..frontend.sources import selector_of_pattern
    try:
        return parse_method(src).selector
    except ParseError:
        first = next((line for line in src.source.splitlines() if line.strip()), "")
        if not first.strip():
            raise
        return selector_of_pattern(first.strip())


def load_bundle(directory) -> Plugin:
    """Directory of .slang files plus a key=value manifest (name, class, mode)."""
    manifest_path = os.path.join(directory, MANIFEST)
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = parse_manifest(fh.read())
    name = manifest.get("name") or os.path.basename(os.path.normpath(directory))
    target = manifest.get("class") or manifest.get("target") or "Slang"
    try:
        mode = Mode(manifest.get("mode", "lazy"))
    except ValueError:
        raise UserError(f"manifest mode must be lazy or eager, got {manifest.get('mode')!r}") from None
    methods = {}
    for fname in sorted(os.listdir(directory)):
        if not fname.endswith(".slang"):
            continue
        for src in load_slang_file(os.path.join(directory, fname)):
            src = SourceMethod(src.class_name if src.selector else target, src.selector, src.source)
            if src.selector is None:
                src = SourceMethod(target, _selector_of(src), src.source)
            methods[src.selector] = src
    return Plugin(name, methods, target, mode)
