"""AST for the Slang subset.

Nodes are frozen dataclasses so structural equality is plain ``==``.
Source positions are kept out of comparisons.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union


class BasicType(enum.Enum):
    WORD = "Word"
    SIGNED_WORD = "SignedWord"
    OOP_REF = "OopRef"
    ADDRESS = "Address"

    @property
    def is_signed(self):
        return self is BasicType.SIGNED_WORD


@dataclass(frozen=True)
class Literal:
    value: int
    kind: str = "int"          # int | char | symbol | pseudo
    text: str = ""             # spelling for printing (symbol name, char, pseudo name)


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Send:
    receiver: "Expr"
    selector: str
    args: tuple = ()


@dataclass(frozen=True)
class Block:
    params: tuple = ()
    temps: tuple = ()
    body: tuple = ()


@dataclass(frozen=True)
class VmCall:
    function_name: str
    args: tuple = ()


Expr = Union[Literal, VarRef, Send, Block, VmCall]


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr


@dataclass(frozen=True)
class Return:
    expr: Expr


@dataclass(frozen=True)
class ExprStatement:
    expr: Expr


Statement = Union[Assign, Return, ExprStatement]


@dataclass(frozen=True)
class PrimitivePragma:
    # result kind of the primitive; None means the word is re-tagged as a SmallInteger
    result: Optional[BasicType] = None


@dataclass(frozen=True)
class TypeAnnotation:
    var_name: str
    basic_type: BasicType
    by_reference: bool = False


Pragma = Union[PrimitivePragma, TypeAnnotation]


@dataclass
class MethodNode:
    selector: str
    params: tuple = ()
    pragmas: tuple = ()
    temps: tuple = ()
    body: tuple = ()
    class_name: str = ""
    # filled by annotate_types; empty until then
    types: dict = field(default_factory=dict)
    by_reference: frozenset = frozenset()
    annotated: bool = False

    @property
    def is_primitive(self):
        return any(isinstance(p, PrimitivePragma) for p in self.pragmas)

    @property
    def returns_oop(self):
        for p in self.pragmas:
            if isinstance(p, PrimitivePragma) and p.result in (BasicType.OOP_REF, BasicType.ADDRESS):
                return True
        return False

    def structure(self):
        """Tuple used to compare two methods while ignoring annotation state."""
        return (self.selector, self.params, self.pragmas, self.temps, self.body)

    def type_of(self, name):
        if name == "self":
            return BasicType.OOP_REF
        return self.types.get(name, BasicType.WORD)


def selector_arity(selector):
    if not selector:
        raise ValueError("empty selector")
    if selector[0].isalpha() or selector[0] == "_":
        return selector.count(":")
    return 1


def keywords_of(selector):
    """Split ``at:put:`` into ``['at:', 'put:']``."""
    return [part + ":" for part in selector.split(":")[:-1]]


def iter_sends(node):
    """Yield every Send node below ``node`` in textual (evaluation) order."""
    if isinstance(node, MethodNode):
        for stmt in node.body:
            yield from iter_sends(stmt)
    elif isinstance(node, (Assign, Return, ExprStatement)):
        yield from iter_sends(node.expr)
    elif isinstance(node, Send):
        yield from iter_sends(node.receiver)
        for arg in node.args:
            yield from iter_sends(arg)
        yield node
    elif isinstance(node, Block):
        for stmt in node.body:
            yield from iter_sends(stmt)
    elif isinstance(node, VmCall):
        for arg in node.args:
            yield from iter_sends(arg)
        yield node


def iter_calls(node):
    """Yield Send and VmCall nodes in the order a reader meets their selectors."""
    if isinstance(node, MethodNode):
        for stmt in node.body:
            yield from iter_calls(stmt)
    elif isinstance(node, (Assign, Return, ExprStatement)):
        yield from iter_calls(node.expr)
    elif isinstance(node, Send):
        yield from iter_calls(node.receiver)
        yield node
        for arg in node.args:
            yield from iter_calls(arg)
    elif isinstance(node, Block):
        for stmt in node.body:
            yield from iter_calls(stmt)
    elif isinstance(node, VmCall):
        yield node
        for arg in node.args:
            yield from iter_calls(arg)
