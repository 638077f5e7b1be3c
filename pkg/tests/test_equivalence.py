"""Every backend computes the same word for the same method and arguments."""
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from cascade.errors import DivisionByZero, PrimitiveFailure
from cascade.words import tag
from conftest import arg_tuples, make_vm

BACKENDS = ("ast", "ir-tac", "ir", "native")


def outcome(vm, sel, args, backend, prepared):
    try:
        return vm.execute(sel, None, args, backend, prepared)
    except (DivisionByZero, PrimitiveFailure):
        return "fail"


def all_backends(vm, sel, args, prepared=None):
    prepared = prepared or vm.prepare(sel)
    return [outcome(vm, sel, args, b, prepared) for b in BACKENDS]


def test_corpus_on_every_backend(equivalence_vm):
    vm, selectors = equivalence_vm
    assert len(selectors) >= 30
    for sel in selectors:
        prepared = vm.prepare(sel)
        for args in arg_tuples(sel, 25, seed="unit"):
            results = all_backends(vm, sel, args, prepared)
            assert len(set(results)) == 1, (sel, args, results)


def test_division_by_zero_fails_everywhere(vm):
    sel = vm.define("f: a with: b\n\t^ a // b")
    assert all_backends(vm, sel, [tag(4), tag(0)]) == ["fail"] * 4


# -- random methods ---------------------------------------------------------------------

OPS = ["+", "-", "*", "//", "\\\\", "bitAnd:", "bitOr:", "bitXor:", "<<", ">>", "bitShift:",
       "<", "<=", ">", ">=", "=", "~="]
leaf = st.one_of(st.sampled_from(["a", "b", "c", "t"]),
                 st.integers(-300, 300).map(str),
                 st.sampled_from(["16rFFFF", "2r1011", "63", "-1"]))


def _combine(children):
    return st.tuples(children, st.sampled_from(OPS), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})")


exprs = st.recursive(leaf, _combine, max_leaves=6)


@st.composite
def methods(draw):
    signed = draw(st.lists(st.sampled_from(["a", "b", "c", "t"]), unique=True, max_size=4))
    pragmas = "".join(f"\t<var: #{v} type: #int>\n" for v in signed)
    lines = [f"\tt := {draw(exprs)}."]
    shape = draw(st.sampled_from(["plain", "if", "loop", "and"]))
    if shape == "if":
        lines.append(f"\t{draw(exprs)} = 0 ifTrue: [t := {draw(exprs)}] ifFalse: [t := t + {draw(exprs)}].")
    elif shape == "loop":
        lines.append(f"\t1 to: ({draw(exprs)} bitAnd: 7) do: [:i | t := t + (i * {draw(exprs)})].")
    elif shape == "and":
        lines.append(f"\t(({draw(exprs)} < 0) and: [{draw(exprs)} ~= 1]) ifTrue: [^ {draw(exprs)}].")
    body = "\n".join(lines)
    return f"probe: a with: b with: c\n{pragmas}\t| t |\n{body}\n\t^ t + {draw(exprs)}"


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(methods(), st.lists(st.integers(-(1 << 62), (1 << 62) - 1) | st.integers(-9, 9),
                           min_size=3, max_size=3))
def test_random_methods_agree(source, values):
    vm = make_vm()
    sel = vm.define(source)
    results = all_backends(vm, sel, [tag(v) for v in values])
    assert len(set(results)) == 1, (source, values, results)
