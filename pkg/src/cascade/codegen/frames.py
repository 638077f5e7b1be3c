"""Frame layout: every IR value gets a word slot relative to the frame base."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..ir.nodes import IrFunction

WORD = 8
# return address + saved frame pointer sit between arguments and locals
LINKAGE_WORDS = 2


@dataclass
class FrameContext:
    name: str
    slots: dict = field(default_factory=dict)       # variable -> offset in words from the frame base
    parent: Optional["FrameContext"] = None
    size: int = 0                                    # local words of the whole physical frame
    children: list = field(default_factory=list)
    scope_contexts: dict = field(default_factory=dict)   # root only: scope id -> context

    def lookup(self, var):
        """Return (offset_words, hops) where hops counts parent links followed."""
        ctx, hops = self, 0
        while ctx is not None:
            if var in ctx.slots:
                return ctx.slots[var], hops
            ctx, hops = ctx.parent, hops + 1
        raise KeyError(f"{var} not in frame of {self.name}")

    def access_path(self, var):
        """Contexts visited while resolving var, innermost first."""
        path, ctx = [], self
        while ctx is not None:
            path.append(ctx)
            if var in ctx.slots:
                return path
            ctx = ctx.parent
        raise KeyError(var)

    def displacement(self, var):
        return self.lookup(var)[0] * WORD

    def all_slots(self):
        out = dict(self.slots)
        for child in self.children:
            out.update(child.all_slots())
        return out

    def context_for(self, name):
        if self.name == name:
            return self
        for child in self.children:
            found = child.context_for(name)
            if found is not None:
                return found
        return None

    @property
    def total_words(self):
        return self.size + LINKAGE_WORDS


def _scope_of(f: IrFunction, vreg):
    return f.vreg_scope.get(vreg, 0)


def layout_frames(f: IrFunction) -> FrameContext:
    """Assign frame slots; nested block scopes become child contexts.

    Caller-pushed values sit above the linkage: argument i at +2+(n-1-i),
    the receiver at +2+n. Locals count down from -1.
    """
    n = len(f.params)
    scopes = {s.id: s for s in f.scopes}
    root = FrameContext(f.name)
    contexts = {}

    def ctx_for(sid):
        if sid in contexts:
            return contexts[sid]
        scope = scopes.get(sid)
        if scope is None or scope.parent is None:
            contexts[sid] = root
            return root
        parent = ctx_for(scope.parent)
        ctx = FrameContext(f"{f.name}/{scope.name}", parent=parent)
        parent.children.append(ctx)
        contexts[sid] = ctx
        return ctx

    root.slots[f.receiver] = LINKAGE_WORDS + n
    for i, p in enumerate(f.params):
        root.slots[p] = LINKAGE_WORDS + (n - 1 - i)
    next_local = 0
    for var in f.vregs():
        if var in root.slots:
            continue
        ctx = ctx_for(_scope_of(f, var))
        if var in ctx.slots:
            continue
        next_local -= 1
        ctx.slots[var] = next_local
    root.size = -next_local
    root.scope_contexts = dict(contexts)
    return root


def context_of(root: FrameContext, f: IrFunction, var) -> FrameContext:
    """Innermost context whose scope owns var (the root for parameters)."""
    return root.scope_contexts.get(_scope_of(f, var), root)
