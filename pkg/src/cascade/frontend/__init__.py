"""Slang-subset frontend: lexing, parsing, purification, type annotation."""
from .annotate import annotate_types
from .nodes import (Assign, BasicType, Block, ExprStatement, Literal, MethodNode,
                    PrimitivePragma, Return, Send, TypeAnnotation, VarRef, VmCall,
                    selector_arity)
from .parser import SourceMethod, parse_method, parse_text
from .printer import format_method
from .purify import purify
from .sources import load_slang_file, split_bundle


def compile_source(src: SourceMethod) -> MethodNode:
    """purify -> parse -> annotate."""
    purified = SourceMethod(src.class_name, src.selector, purify(src.source))
    return annotate_types(parse_method(purified))


__all__ = [
    "Assign", "BasicType", "Block", "ExprStatement", "Literal", "MethodNode",
    "PrimitivePragma", "Return", "Send", "SourceMethod", "TypeAnnotation", "VarRef",
    "VmCall", "annotate_types", "compile_source", "format_method", "load_slang_file",
    "parse_method", "parse_text", "purify", "selector_arity", "split_bundle",
]
