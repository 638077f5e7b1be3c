"""Converter chain: representation-to-representation compilation stages."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..errors import CascadeError, StageError

# representation kinds, in pipeline order
KINDS = ("source", "ast", "typed-ast", "tac", "ssa", "native")


@dataclass(frozen=True)
class Converter:
    name: str
    input_kind: str
    output_kind: str
    fn: Callable

    def __call__(self, value):
        return self.fn(value)


class KindMismatch(CascadeError):
    pass


class ConverterChain:
    def __init__(self, converters=()):
        self.converters = list(converters)
        for prev, nxt in zip(self.converters, self.converters[1:]):
            if prev.output_kind != nxt.input_kind:
                raise StageError(nxt.name, KindMismatch(
                    f"{nxt.name} expects {nxt.input_kind!r} but {prev.name} produces {prev.output_kind!r}"))

    @property
    def input_kind(self):
        return self.converters[0].input_kind if self.converters else None

    @property
    def output_kind(self):
        return self.converters[-1].output_kind if self.converters else None

    def __add__(self, other):
        return ConverterChain(self.converters + list(other.converters))

    def __len__(self):
        return len(self.converters)


def run_chain(chain: ConverterChain, value):
    for conv in chain.converters:
        try:
            value = conv(value)
        except StageError:
            raise
        except CascadeError as exc:
            raise StageError(conv.name, exc) from exc
    return value


def standard_converters(table=None, symbols=None):
    """Named converters for the full source-to-native pipeline."""
    from ..frontend import annotate_types, parse_method, purify
    from ..frontend.parser import SourceMethod
    from .lower import lower
    from .ssa import to_ssa

    def do_purify(src):
        return SourceMethod(src.class_name, src.selector, purify(src.source))

    def do_lower(m):
        from ..reachability import MethodTable
        t = table if table is not None else MethodTable()
        return lower(m, t)

    convs = {
        "purify": Converter("purify", "source", "source", do_purify),
        "parse": Converter("parse", "source", "ast", parse_method),
        "annotate": Converter("annotate", "ast", "typed-ast", annotate_types),
        "lower": Converter("lower", "typed-ast", "tac", do_lower),
        "ssa": Converter("ssa", "tac", "ssa", to_ssa),
    }
    if symbols is not None:
        from ..codegen import nativize

        convs["nativize"] = Converter("nativize", "ssa", "native",
                                      lambda f: nativize(f, symbols))
    return convs
