"""Tokenizer for the Slang subset."""
from __future__ import annotations

import zlib
from dataclasses import dataclass

from ..errors import ParseError

BINARY_CHARS = set("+-*/\\<>=~&@%,?!")

_symbol_names: dict[int, str] = {}


def symbol_id(name):
    """Word-sized id for an interned symbol; stable across processes."""
    ident = zlib.crc32(name.encode("utf-8")) << 3 | 0b100
    previous = _symbol_names.setdefault(ident, name)
    if previous != name:
        raise ValueError(f"symbol id collision between {previous!r} and {name!r}")
    return ident


def symbol_name(ident):
    return _symbol_names.get(ident)


@dataclass(frozen=True)
class Token:
    kind: str      # ident keyword binary int char symbol assign caret ( ) [ ] { } . | : eof
    text: str
    line: int
    column: int
    value: int = 0


# tokens after which '-' is a binary operator rather than a sign
_OPERAND_END = {"ident", "int", "char", "symbol", ")", "]", "}"}


class Lexer:
    def __init__(self, source):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message):
        raise ParseError(self.line, self.col, message)

    def _peek(self, offset=0):
        i = self.pos + offset
        return self.src[i] if i < len(self.src) else ""

    def _advance(self, n=1):
        for _ in range(n):
            if self.pos >= len(self.src):
                return
            if self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _skip_blank(self):
        while True:
            c = self._peek()
            if c and c.isspace():
                self._advance()
            elif c == '"':
                line, col = self.line, self.col
                self._advance()
                while self._peek() and self._peek() != '"':
                    self._advance()
                if not self._peek():
                    raise ParseError(line, col, "unterminated comment")
                self._advance()
            else:
                return

    def tokens(self):
        out = []
        while True:
            tok = self._next(out[-1].kind if out else None)
            out.append(tok)
            if tok.kind == "eof":
                return out

    def _number(self, line, col, negative):
        start = self.pos
        while self._peek().isdigit():
            self._advance()
        digits = self.src[start:self.pos]
        if self._peek() == "r" and self._peek(1).isalnum():
            radix = int(digits)
            if not 2 <= radix <= 36:
                raise ParseError(line, col, f"bad radix {radix}")
            self._advance()
            rstart = self.pos
            while self._peek().isalnum():
                self._advance()
            try:
                value = int(self.src[rstart:self.pos], radix)
            except ValueError:
                raise ParseError(line, col, "bad radix literal") from None
        else:
            value = int(digits)
        return -value if negative else value

    def _next(self, previous_kind):
        self._skip_blank()
        line, col = self.line, self.col
        c = self._peek()
        if not c:
            return Token("eof", "", line, col)
        start = self.pos

        if c.isalpha() or c == "_":
            while self._peek().isalnum() or self._peek() == "_":
                self._advance()
            if self._peek() == ":" and self._peek(1) != "=":
                self._advance()
                return Token("keyword", self.src[start:self.pos], line, col)
            return Token("ident", self.src[start:self.pos], line, col)

        if c.isdigit():
            value = self._number(line, col, False)
            return Token("int", self.src[start:self.pos], line, col, value)

        if c == "-" and self._peek(1).isdigit() and previous_kind not in _OPERAND_END:
            self._advance()
            value = self._number(line, col, True)
            return Token("int", self.src[start:self.pos], line, col, value)

        if c == "$":
            self._advance()
            ch = self._peek()
            if not ch:
                self.error("character literal at end of input")
            self._advance()
            return Token("char", ch, line, col, ord(ch))

        if c == "#":
            self._advance()
            s = self.pos
            if self._peek().isalpha() or self._peek() == "_":
                while self._peek() and (self._peek().isalnum() or self._peek() in "_:"):
                    self._advance()
            else:
                while self._peek() and self._peek() in BINARY_CHARS:
                    self._advance()
            name = self.src[s:self.pos]
            if not name:
                raise ParseError(line, col, "empty symbol literal")
            return Token("symbol", name, line, col, symbol_id(name))

        if c == ":" and self._peek(1) == "=":
            self._advance(2)
            return Token("assign", ":=", line, col)

        if c in "^()[]{}.|:":
            self._advance()
            kind = "caret" if c == "^" else c
            return Token(kind, c, line, col)

        if c in BINARY_CHARS:
            while self._peek() and self._peek() in BINARY_CHARS:
                # keep '-5' in 'x+-5' as a signed literal
                if self.pos > start and self._peek() == "-" and self._peek(1).isdigit():
                    break
                self._advance()
            return Token("binary", self.src[start:self.pos], line, col)

        self.error(f"unexpected character {c!r}")
