"""Closed set of methods that must be nativized before an entry can run."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnknownSelector
from .frontend.nodes import MethodNode, Send, VmCall, iter_calls
from .templates import TEMPLATE_SELECTORS, vm_send_name


@dataclass
class MethodTable:
    methods: dict = field(default_factory=dict)          # selector -> MethodNode
    templates: frozenset = TEMPLATE_SELECTORS
    vm_functions: dict = field(default_factory=dict)     # name -> arity (None = unchecked)
    globals: frozenset = frozenset()                     # VM global variable names

    def __post_init__(self):
        self.check_disjoint()

    def check_disjoint(self):
        names = [set(self.methods), set(self.templates), set(self.vm_functions)]
        for i in range(3):
            for j in range(i + 1, 3):
                clash = names[i] & names[j]
                if clash:
                    raise ValueError(f"name sets overlap: {sorted(clash)}")

    def add(self, method: MethodNode):
        if method.selector in self.templates or method.selector in self.vm_functions:
            raise ValueError(f"{method.selector!r} is reserved")
        self.methods[method.selector] = method

    def copy(self):
        return MethodTable(dict(self.methods), self.templates, dict(self.vm_functions), self.globals)

    def __contains__(self, selector):
        return selector in self.methods

    def __getitem__(self, selector):
        return self.methods[selector]


@dataclass
class ReachableSet:
    selectors: list
    templates: list = field(default_factory=list)
    vm_functions: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.selectors)

    def __len__(self):
        return len(self.selectors)


def callees(method: MethodNode, table: MethodTable):
    """Classify every call in ``method``: yields (kind, name) in textual order."""
    for node in iter_calls(method):
        if isinstance(node, VmCall):
            yield "vm", node.function_name
            continue
        sel = node.selector
        if sel in table.templates:
            yield "template", sel
        elif sel in table.methods:
            yield "method", sel
        else:
            vm = vm_send_name(sel, len(node.args), table.vm_functions)
            if vm is None:
                raise UnknownSelector(sel, method.selector)
            yield "vm", vm


def reachable_methods(entry, table: MethodTable) -> ReachableSet:
    if entry not in table.methods:
        raise UnknownSelector(entry)
    result = ReachableSet([])
    seen = set()
    leaves_t, leaves_v = set(), set()

    # explicit stack keeps deep call chains off the Python stack
    def visit(start):
        stack = [(start, None)]
        while stack:
            sel, it = stack.pop()
            if it is None:
                if sel in seen:
                    continue
                seen.add(sel)
                result.selectors.append(sel)
                it = callees(table.methods[sel], table)
            for kind, name in it:
                if kind == "method":
                    if name not in seen:
                        stack.append((sel, it))
                        stack.append((name, None))
                        break
                elif kind == "template":
                    if name not in leaves_t:
                        leaves_t.add(name)
                        result.templates.append(name)
                elif name not in leaves_v:
                    leaves_v.add(name)
                    result.vm_functions.append(name)

    visit(entry)
    return result
