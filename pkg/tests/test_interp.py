"""AST interpreter specifics: budgets, the recursion guard, reflective installs."""
import pytest
from hypothesis import given, strategies as st

from cascade.env import SymbolEnv
from cascade.errors import StepBudgetExceeded, UnknownSelector
from cascade.frontend import load_slang_file
from cascade.runtime.astinterp import InterpStats, ast_interpret, guard_check
from cascade.frontend import SourceMethod, compile_source
from cascade.words import tag
from conftest import corpus_path, make_vm


@given(st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=8), st.sampled_from(["a", "b", "c"]))
def test_guard_check_ignores_the_top_frame(stack, sel):
    assert guard_check(stack, sel) == (sel in stack[:-1])


def test_step_budget_stops_infinite_loops():
    m = compile_source(SourceMethod("C", None, "spin\n\t[true] whileTrue: [].\n\t^ 0"))
    env = SymbolEnv(step_budget=10_000)
    with pytest.raises(StepBudgetExceeded):
        ast_interpret(m, env=env)


def test_depth_limit_stops_runaway_recursion(vm):
    sel = vm.define("down: n\n\t^ self down: n + 1")
    with pytest.raises(StepBudgetExceeded):
        vm.run_ast(sel, vm.heap.nil, [tag(0)])


def test_unknown_send_is_reported():
    m = compile_source(SourceMethod("C", None, "f\n\t^ self frobnicate"))
    with pytest.raises(UnknownSelector):
        ast_interpret(m, env=SymbolEnv())


def demo_vm(name, mode):
    vm = make_vm()
    for src in load_slang_file(corpus_path("recursion", f"{name}.slang")):
        vm.define(src)
    cls = vm.heap.make_class(16, 2)
    vm.install("basicNew", mode=mode)
    return vm, cls


def test_unguarded_reflective_basic_new_recurses_out_of_budget():
    vm, cls = demo_vm("unguarded", "reflective")
    with pytest.raises(StepBudgetExceeded):
        vm.call_primitive("basicNew", cls)


def test_guarded_reflective_basic_new_completes():
    vm, cls = demo_vm("guarded", "reflective")
    for _ in range(20):
        oop = vm.call_primitive("basicNew", cls)
        assert vm.heap.class_id(oop) == 16
    assert vm.interp_stats.guard_checks == 40
    printed = vm.heap.drain_sink().splitlines()
    assert len(printed) == 20 and all(len(line) == 16 for line in printed)


def test_compiled_basic_new_needs_no_guard():
    vm, cls = demo_vm("waterfall", "lazy")
    for _ in range(100):
        vm.call_primitive("basicNew", cls)
    assert vm.interp_stats.guard_checks == 0
    assert vm.slot("basicNew").compile_count == 1


def test_guard_intrinsic_is_not_compilable():
    vm, cls = demo_vm("guarded", "reflective")
    from cascade.errors import CompileError
    with pytest.raises(CompileError):
        vm.prepare("basicNew")


def test_interp_stats_start_at_zero():
    assert InterpStats() == InterpStats(0, 0, 0)
