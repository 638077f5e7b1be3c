"""Rewrite legacy inlined-C idioms into the VM-call construct."""
import re

from ..errors import UnsupportedIdiom

# C function name -> VM function name
SUBSTITUTIONS = {
    "printOop": "printOop",
    "primitiveNew": "primitiveNew",
    "allocate": "allocate",
    "createDirectory": "createDirectory",
    "writeByte": "writeByte",
    "hashMix": "hashMix",
}

_CCODE = re.compile(r"self\s+cCode:\s*'([^']*)'")
_CALL = re.compile(r"^\s*([A-Za-z_]\w*)\s*\((.*)\)\s*;?\s*$")
_ARG = re.compile(r"^(?:[A-Za-z_]\w*|-?\d+)$")


def _rewrite(match):
    payload = match.group(1)
    call = _CALL.match(payload)
    if not call:
        raise UnsupportedIdiom(payload)
    name, arg_text = call.groups()
    if name not in SUBSTITUTIONS:
        raise UnsupportedIdiom(name)
    args = [a.strip() for a in arg_text.split(",")] if arg_text.strip() else []
    if not all(_ARG.match(a) for a in args):
        raise UnsupportedIdiom(payload)
    return f"self callVMFunction: #{SUBSTITUTIONS[name]} withArguments: {{{'. '.join(args)}}}"


def purify(source: str) -> str:
    return _CCODE.sub(_rewrite, source)
