"""Recursive-descent parser producing :class:`MethodNode` trees."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import ParseError, PragmaPlacementError
from .lexer import Lexer, Token
from .nodes import (Assign, BasicType, Block, ExprStatement, Literal, MethodNode,
                    PrimitivePragma, Return, Send, TypeAnnotation, VarRef, VmCall,
                    selector_arity)
from ..words import fits_smallint

PSEUDO = {"true": 1, "false": 0, "nil": 0}
RESERVED = {"self", "super", "thisContext", *PSEUDO}
VM_CALL_SELECTOR = "callVMFunction:withArguments:"

TYPE_NAMES = {
    "int": BasicType.SIGNED_WORD, "sqInt": BasicType.SIGNED_WORD, "signed": BasicType.SIGNED_WORD,
    "long": BasicType.SIGNED_WORD, "SignedWord": BasicType.SIGNED_WORD,
    "usqInt": BasicType.WORD, "unsigned": BasicType.WORD, "word": BasicType.WORD,
    "Word": BasicType.WORD,
    "oop": BasicType.OOP_REF, "OopRef": BasicType.OOP_REF,
    "address": BasicType.ADDRESS, "pointer": BasicType.ADDRESS, "Address": BasicType.ADDRESS,
}


@dataclass(frozen=True)
class SourceMethod:
    class_name: str
    selector: str | None
    source: str


@dataclass(frozen=True)
class _Brace:
    items: tuple


class Parser:
    def __init__(self, source):
        self.toks = Lexer(source).tokens()
        self.i = 0

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, n=1) -> Token:
        return self.toks[min(self.i + n, len(self.toks) - 1)]

    def take(self):
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, message, tok=None):
        tok = tok or self.tok
        raise ParseError(tok.line, tok.column, message)

    def expect(self, kind, text=None):
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            got = t.text or t.kind
            self.error(f"expected {want!r}, found {got!r}")
        return self.take()

    def at_binary(self, text):
        return self.tok.kind == "binary" and self.tok.text == text

    # -- method -------------------------------------------------------------

    def method(self, expected=None, class_name=""):
        if expected is not None and self._body_only(expected):
            selector, params = expected, ()
        else:
            selector, params = self.pattern()
            if expected is not None and selector != expected:
                self.error(f"method pattern {selector!r} does not match {expected!r}")
        self._check_names(params)
        pragmas, temps = [], None
        while True:
            if self.at_binary("<"):
                pragmas.extend(self.pragma())
            elif self.tok.kind == "|" and temps is None:
                temps = self.temporaries()
            else:
                break
        temps = temps or ()
        self._check_names(params + temps)
        body = self.statements(closing="eof", scope=set(params) | set(temps), params=set(params))
        self.expect("eof")
        return MethodNode(selector=selector, params=params, pragmas=tuple(pragmas),
                          temps=temps, body=body, class_name=class_name)

    def _body_only(self, expected):
        # unary selectors may be given separately from a body-only source
        if selector_arity(expected) != 0 or not (expected[0].isalpha() or expected[0] == "_"):
            return False
        return not (self.tok.kind == "ident" and self.tok.text == expected)

    def pattern(self):
        t = self.tok
        if t.kind == "ident":
            self.take()
            return t.text, ()
        if t.kind == "binary":
            self.take()
            arg = self.expect("ident").text
            return t.text, (arg,)
        if t.kind == "keyword":
            parts, params = [], []
            while self.tok.kind == "keyword":
                parts.append(self.take().text)
                params.append(self.expect("ident").text)
            return "".join(parts), tuple(params)
        self.error("expected a method pattern")

    def _check_names(self, names):
        seen = set()
        for n in names:
            if n in RESERVED:
                self.error(f"{n!r} is reserved")
            if n in seen:
                self.error(f"duplicate variable {n!r}")
            seen.add(n)

    def temporaries(self):
        self.expect("|")
        names = []
        while self.tok.kind == "ident":
            names.append(self.take().text)
        self.expect("|")
        return tuple(names)

    def pragma(self):
        open_tok = self.take()
        if self.tok.kind == "ident":
            name = self.take().text
            if name != "primitive":
                self.error(f"unknown pragma <{name}>", open_tok)
            self.expect("binary", ">")
            return [PrimitivePragma()]
        parts = []
        while self.tok.kind == "keyword":
            kw = self.take().text
            parts.append((kw, self.pragma_literal()))
        if not parts:
            self.error("malformed pragma", open_tok)
        self.expect("binary", ">")
        keys = [k for k, _ in parts]
        args = dict(parts)
        if keys == ["primitive:"]:
            return [PrimitivePragma(self._basic_type(args["primitive:"], open_tok))]
        if keys[:2] == ["var:", "type:"] and keys[2:] in ([], ["ref:"]):
            name = self._symbol_text(args["var:"], open_tok)
            by_ref = False
            if "ref:" in args:
                ref = args["ref:"]
                if not (isinstance(ref, Literal) and ref.kind == "pseudo" and ref.text != "nil"):
                    self.error("ref: expects true or false", open_tok)
                by_ref = ref.text == "true"
            return [TypeAnnotation(name, self._basic_type(args["type:"], open_tok), by_ref)]
        self.error(f"unknown pragma <{' '.join(keys)}>", open_tok)

    def pragma_literal(self):
        t = self.tok
        if t.kind == "symbol":
            self.take()
            return Literal(t.value, "symbol", t.text)
        if t.kind == "ident" and t.text in PSEUDO:
            self.take()
            return Literal(PSEUDO[t.text], "pseudo", t.text)
        if t.kind == "int":
            self.take()
            return Literal(t.value, "int", t.text)
        self.error("pragma arguments must be literals")

    def _symbol_text(self, lit, tok):
        if lit.kind != "symbol":
            self.error("expected a symbol", tok)
        return lit.text

    def _basic_type(self, lit, tok):
        name = self._symbol_text(lit, tok)
        if name not in TYPE_NAMES:
            self.error(f"unknown type {name!r}", tok)
        return TYPE_NAMES[name]

    # -- statements ---------------------------------------------------------

    def statements(self, closing, scope, params):
        body = []
        while self.tok.kind != closing:
            if self.at_binary("<"):
                t = self.tok
                raise PragmaPlacementError(t.line, t.column, "pragma after a statement")
            if self.tok.kind == ".":
                self.take()
                continue
            stmt = self.statement(scope, params)
            body.append(stmt)
            if isinstance(stmt, Return):
                while self.tok.kind == ".":
                    self.take()
                if self.tok.kind != closing:
                    self.error("statements after a return")
                break
            if self.tok.kind == ".":
                self.take()
            elif self.tok.kind != closing:
                self.error(f"expected '.' or end of statements, found {self.tok.text or self.tok.kind!r}")
        return tuple(body)

    def statement(self, scope, params):
        if self.tok.kind == "caret":
            self.take()
            return Return(self.expression(scope, params))
        if self.tok.kind == "ident" and self.peek().kind == "assign":
            target = self.take()
            self.take()
            if target.text in RESERVED:
                self.error(f"cannot assign to {target.text!r}", target)
            if target.text in params:
                self.error(f"cannot assign to argument {target.text!r}", target)
            return Assign(target.text, self.expression(scope, params))
        return ExprStatement(self.expression(scope, params))

    # -- expressions --------------------------------------------------------

    def expression(self, scope, params):
        if self.tok.kind == "ident" and self.peek().kind == "assign":
            self.error("assignments are statements, not expressions")
        receiver = self.binary_expr(scope, params)
        if self.tok.kind != "keyword":
            return self._no_brace(receiver)
        parts, args = [], []
        while self.tok.kind == "keyword":
            parts.append(self.take().text)
            args.append(self.binary_expr(scope, params))
        selector = "".join(parts)
        if selector == VM_CALL_SELECTOR:
            return self._vm_call(receiver, args)
        return Send(self._no_brace(receiver), selector, tuple(self._no_brace(a) for a in args))

    def _vm_call(self, receiver, args):
        fn, brace = args
        if receiver != VarRef("self"):
            self.error("callVMFunction:withArguments: must be sent to self")
        if not (isinstance(fn, Literal) and fn.kind == "symbol"):
            self.error("callVMFunction: expects a symbol literal")
        if not isinstance(brace, _Brace):
            self.error("withArguments: expects a brace array")
        return VmCall(fn.text, tuple(self._no_brace(a) for a in brace.items))

    def _no_brace(self, node):
        if isinstance(node, _Brace):
            self.error("brace arrays are only allowed as VM call arguments")
        return node

    def binary_expr(self, scope, params):
        left = self.unary_expr(scope, params)
        while self.tok.kind == "binary":
            op = self.take().text
            right = self.unary_expr(scope, params)
            left = Send(self._no_brace(left), op, (self._no_brace(right),))
        return left

    def unary_expr(self, scope, params):
        node = self.primary(scope, params)
        while self.tok.kind == "ident" and self.peek().kind != "assign":
            node = Send(self._no_brace(node), self.take().text, ())
        return node

    def primary(self, scope, params):
        t = self.tok
        if t.kind == "ident":
            self.take()
            if t.text in PSEUDO:
                return Literal(PSEUDO[t.text], "pseudo", t.text)
            if t.text in ("super", "thisContext"):
                self.error(f"{t.text!r} is not supported", t)
            return VarRef(t.text)
        if t.kind == "int":
            self.take()
            if not fits_smallint(t.value):
                self.error(f"literal {t.text} does not fit a tagged word", t)
            return Literal(t.value, "int", t.text)
        if t.kind == "char":
            self.take()
            return Literal(t.value, "char", t.text)
        if t.kind == "symbol":
            self.take()
            return Literal(t.value, "symbol", t.text)
        if t.kind == "(":
            self.take()
            node = self.expression(scope, params)
            self.expect(")")
            return node
        if t.kind == "[":
            return self.block(scope, params)
        if t.kind == "{":
            self.take()
            items = []
            while self.tok.kind != "}":
                items.append(self.expression(scope, params))
                if self.tok.kind == ".":
                    self.take()
                elif self.tok.kind != "}":
                    self.error("expected '.' or '}' in brace array")
            self.take()
            return _Brace(tuple(items))
        if t.kind == "caret":
            self.error("unexpected return")
        self.error(f"unexpected {t.text or t.kind!r}")

    def block(self, scope, params):
        self.expect("[")
        bparams = []
        while self.tok.kind == ":":
            self.take()
            bparams.append(self.expect("ident").text)
        if bparams:
            if self.tok.kind == "|":
                self.take()
            elif self.at_binary("||"):
                self.error("unexpected '||'")
            elif self.tok.kind != "]":
                self.error("expected '|' after block parameters")
        temps = ()
        if self.tok.kind == "|":
            temps = self.temporaries()
        names = tuple(bparams) + temps
        self._check_names(names)
        for n in names:
            if n in scope:
                self.error(f"{n!r} shadows an outer variable")
        inner = scope | set(names)
        body = self.statements(closing="]", scope=inner, params=params | set(bparams))
        self.expect("]")
        return Block(tuple(bparams), temps, body)


def parse_method(src: SourceMethod) -> MethodNode:
    if not src.source or not src.source.strip():
        raise ParseError(1, 1, "empty method source")
    return Parser(src.source).method(expected=src.selector, class_name=src.class_name)


def parse_text(text, class_name=""):
    return parse_method(SourceMethod(class_name, None, text))
