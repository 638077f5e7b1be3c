"""Canonical source rendering of a MethodNode (inverse of the parser)."""
from .nodes import (Assign, Block, ExprStatement, Literal, MethodNode, PrimitivePragma,
                    Return, Send, TypeAnnotation, VarRef, VmCall, keywords_of)
from .parser import TYPE_NAMES

_TYPE_SPELLING = {}
for _name, _t in TYPE_NAMES.items():
    _TYPE_SPELLING.setdefault(_t, _name)


def _kind(selector):
    if selector[0].isalpha() or selector[0] == "_":
        return "keyword" if selector.endswith(":") else "unary"
    return "binary"


def format_expr(node, level="keyword"):
    """``level`` is the loosest construct allowed without parentheses."""
    if isinstance(node, Literal):
        if node.kind == "symbol":
            return "#" + node.text
        if node.kind == "char":
            return "$" + node.text
        if node.kind == "pseudo":
            return node.text
        return node.text or str(node.value)
    if isinstance(node, VarRef):
        return node.name
    if isinstance(node, Block):
        return format_block(node)
    if isinstance(node, VmCall):
        args = ". ".join(format_expr(a) for a in node.args)
        text = f"self callVMFunction: #{node.function_name} withArguments: {{{args}}}"
        return text if level == "keyword" else f"({text})"
    if isinstance(node, Send):
        kind = _kind(node.selector)
        if kind == "unary":
            text = f"{format_expr(node.receiver, 'unary')} {node.selector}"
            return text
        if kind == "binary":
            text = (f"{format_expr(node.receiver, 'binary')} {node.selector} "
                    f"{format_expr(node.args[0], 'unary')}")
            return text if level in ("binary", "keyword") else f"({text})"
        parts = [format_expr(node.receiver, "binary")]
        for kw, arg in zip(keywords_of(node.selector), node.args):
            parts.append(f"{kw} {format_expr(arg, 'binary')}")
        text = " ".join(parts)
        return text if level == "keyword" else f"({text})"
    raise TypeError(f"not an expression: {node!r}")


def format_statement(stmt):
    if isinstance(stmt, Return):
        return "^ " + format_expr(stmt.expr)
    if isinstance(stmt, Assign):
        return f"{stmt.target} := {format_expr(stmt.expr)}"
    if isinstance(stmt, ExprStatement):
        return format_expr(stmt.expr)
    raise TypeError(f"not a statement: {stmt!r}")


def format_block(block):
    head = ""
    if block.params:
        head = " ".join(":" + p for p in block.params) + " | "
    if block.temps:
        head += "| " + " ".join(block.temps) + " | "
    return "[" + head + ". ".join(format_statement(s) for s in block.body) + "]"


def format_pragma(p):
    if isinstance(p, PrimitivePragma):
        if p.result is None:
            return "<primitive>"
        return f"<primitive: #{_TYPE_SPELLING[p.result]}>"
    if isinstance(p, TypeAnnotation):
        ref = " ref: true" if p.by_reference else ""
        return f"<var: #{p.var_name} type: #{_TYPE_SPELLING[p.basic_type]}{ref}>"
    raise TypeError(p)


def format_method(m: MethodNode) -> str:
    if _kind(m.selector) == "unary":
        header = m.selector
    elif _kind(m.selector) == "binary":
        header = f"{m.selector} {m.params[0]}"
    else:
        header = " ".join(f"{kw} {p}" for kw, p in zip(keywords_of(m.selector), m.params))
    lines = [header]
    lines.extend("    " + format_pragma(p) for p in m.pragmas)
    if m.temps:
        lines.append("    | " + " ".join(m.temps) + " |")
    lines.extend("    " + format_statement(s) + "." for s in m.body)
    return "\n".join(lines) + "\n"
