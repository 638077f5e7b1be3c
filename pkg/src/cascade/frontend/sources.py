"""Loading ``.slang`` files: single methods or ``Class>>selector`` bundles."""
import re
from pathlib import Path

from ..errors import ParseError
from .parser import SourceMethod

# headers start in column 0; an indented `x >> 2` is a body line
_HEADER = re.compile(r"^([A-Za-z_]\w*)>>(\S.*?)\s*$")
_COMMENT = re.compile(r'"[^"]*"')
_KEYWORD = re.compile(r"[A-Za-z_]\w*:")


def selector_of_pattern(pattern):
    """`at: i put: v` -> `at:put:`; `+ other` -> `+`; `size` -> `size`."""
    keywords = _KEYWORD.findall(pattern)
    if keywords:
        return "".join(keywords)
    return pattern.split()[0]


def split_bundle(text, default_class="Slang"):
    """Split bundle text into SourceMethods.

    A header is ``Class>>pattern`` where pattern is the method's message
    pattern (``Demo>>printAddress: oop``), starting in column 0. Only comments
    may precede the first header. Text without any header line is a single
    method whose selector is taken from its pattern.
    """
    lines = text.splitlines(keepends=True)
    headers = [(i, _HEADER.match(line)) for i, line in enumerate(lines)]
    headers = [(i, m) for i, m in headers if m]
    if not headers:
        if not text.strip():
            raise ParseError(1, 1, "empty source file")
        return [SourceMethod(default_class, None, text)]
    if _COMMENT.sub("", "".join(lines[:headers[0][0]])).strip():
        raise ParseError(1, 1, "text before the first Class>>selector header")
    methods = []
    for n, (i, m) in enumerate(headers):
        end = headers[n + 1][0] if n + 1 < len(headers) else len(lines)
        # the pattern stays on its own line so error positions match the file
        pattern = m.group(2)
        body = "\n" * i + pattern + "\n" + "".join(lines[i + 1:end])
        methods.append(SourceMethod(m.group(1), selector_of_pattern(pattern), body))
    return methods


def load_slang_file(path):
    return split_bundle(Path(path).read_text(encoding="utf-8"))
