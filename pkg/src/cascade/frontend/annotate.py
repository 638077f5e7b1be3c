"""Assign basic types to method variables from type pragmas."""
from dataclasses import replace

from ..errors import UnknownVariableInPragma
from .nodes import BasicType, Block, MethodNode, TypeAnnotation


def _block_vars(m):
    names = []

    def visit(node):
        if isinstance(node, Block):
            names.extend(node.params)
            names.extend(node.temps)
            for stmt in node.body:
                visit(stmt.expr)
        elif hasattr(node, "receiver"):
            visit(node.receiver)
            for a in node.args:
                visit(a)
        elif hasattr(node, "args"):
            for a in node.args:
                visit(a)

    for stmt in m.body:
        visit(stmt.expr)
    return names


def annotate_types(m: MethodNode) -> MethodNode:
    variables = list(m.params) + list(m.temps) + _block_vars(m)
    types = {name: BasicType.WORD for name in variables}
    by_ref = set()
    for p in m.pragmas:
        if isinstance(p, TypeAnnotation):
            if p.var_name not in types:
                raise UnknownVariableInPragma(p.var_name)
            types[p.var_name] = p.basic_type
            if p.by_reference:
                by_ref.add(p.var_name)
    return replace(m, types=types, by_reference=frozenset(by_ref), annotated=True)
