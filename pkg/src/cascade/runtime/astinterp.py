"""Direct AST evaluation: the reference semantics and the reflective execution mode.

Value typing mirrors lowering exactly so signed/unsigned choices agree:
literals are neutral, an operation is signed only when every non-literal
operand is a signed word.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field

from ..env import SymbolEnv
from ..errors import (ArityMismatch, BlockMisuse, PrimitiveFailure, StepBudgetExceeded,
                      UndefinedVariable, UnknownSelector, UnresolvedVmFunction)
from ..frontend.nodes import (Assign, BasicType, Block, ExprStatement, Literal, MethodNode,
                              Return, Send, VarRef, VmCall)
from ..ir.interp import binop
from ..templates import (BINARY_OPS, COMPARISONS, CONTROL_TEMPLATES, MEMORY_TEMPLATES,
                         vm_send_name)
from ..words import MASK, signed as as_signed, wrap

SIGNED = BasicType.SIGNED_WORD
WORD = BasicType.WORD
OOP = BasicType.OOP_REF
HEADER_BYTES = 16

# each activation costs a handful of Python frames per nesting level
_RECURSION_FLOOR = 20000


class _NonLocalReturn(Exception):
    def __init__(self, value):
        self.value = value


@dataclass
class Activation:
    selector: str
    receiver: int
    vars: dict = field(default_factory=dict)
    types: dict = field(default_factory=dict)

    def __eq__(self, other):
        if isinstance(other, str):
            return self.selector == other
        return self is other

    __hash__ = object.__hash__


@dataclass
class InterpStats:
    steps: int = 0
    guard_checks: int = 0
    max_depth: int = 0


def guard_check(call_stack, selector):
    """True iff an activation of selector exists below the top of call_stack."""
    for frame in call_stack[:-1]:
        name = frame.selector if isinstance(frame, Activation) else frame
        if name == selector:
            return True
    return False


def _signed_op(*types):
    return all(t is None or t is SIGNED for t in types)


class AstInterpreter:
    def __init__(self, env: SymbolEnv, stats: InterpStats | None = None):
        self.env = env
        self.stats = stats or InterpStats()
        self.stack: list[Activation] = []
        if sys.getrecursionlimit() < _RECURSION_FLOOR:
            sys.setrecursionlimit(_RECURSION_FLOOR)

    # -- activations ----------------------------------------------------------

    def activate(self, m: MethodNode, receiver, args):
        if len(args) != len(m.params):
            raise ArityMismatch(f"{m.selector} takes {len(m.params)} arguments, got {len(args)}")
        if len(self.stack) >= self.env.max_depth + 1:
            raise StepBudgetExceeded(f"activation depth above {self.env.max_depth}")
        act = Activation(m.selector, receiver & MASK)
        act.vars["self"] = receiver & MASK
        act.types["self"] = OOP
        for p, a in zip(m.params, args):
            act.vars[p] = a & MASK
            act.types[p] = m.type_of(p)
        for t in m.temps:
            act.vars[t] = 0
            act.types[t] = m.type_of(t)
        self.stack.append(act)
        self.stats.max_depth = max(self.stats.max_depth, len(self.stack))
        try:
            for stmt in m.body:
                if isinstance(stmt, Return):
                    return self.expr(stmt.expr, act, m)[0]
                self.statement(stmt, act, m)
            return act.vars["self"]
        except _NonLocalReturn as ret:
            return ret.value
        finally:
            self.stack.pop()

    def tick(self):
        self.stats.steps += 1
        if self.stats.steps > self.env.step_budget:
            raise StepBudgetExceeded(f"more than {self.env.step_budget} evaluation steps")

    # -- statements -----------------------------------------------------------

    def statement(self, stmt, act, m):
        if isinstance(stmt, Return):
            raise _NonLocalReturn(self.expr(stmt.expr, act, m)[0])
        if isinstance(stmt, Assign):
            if stmt.target not in act.vars:
                raise UndefinedVariable(stmt.target, m.selector)
            act.vars[stmt.target] = self.expr(stmt.expr, act, m)[0]
            return act.vars[stmt.target], act.types[stmt.target]
        return self.expr(stmt.expr, act, m)

    def block_value(self, block, act, m, bound=()):
        if not isinstance(block, Block):
            raise BlockMisuse("control template expects a block literal")
        for name, value in zip(block.params, bound):
            act.vars[name] = value
            act.types[name] = m.type_of(name)
        for t in block.temps:
            act.vars[t] = 0
            act.types[t] = m.type_of(t)
        value = (0, None)
        for stmt in block.body:
            value = self.statement(stmt, act, m)
        return value

    # -- expressions ----------------------------------------------------------

    def expr(self, node, act, m):
        self.tick()
        if isinstance(node, Literal):
            return wrap(node.value), None
        if isinstance(node, VarRef):
            name = node.name
            if name in act.vars:
                return act.vars[name], act.types[name]
            if name in self.env.globals:
                return self.env.memory.load(self.env.globals[name]), WORD
            raise UndefinedVariable(name, m.selector)
        if isinstance(node, VmCall):
            return self.vm_call(node.function_name, [self.expr(a, act, m)[0] for a in node.args], m), WORD
        if isinstance(node, Block):
            raise BlockMisuse(f"block literal outside a control template in {m.selector}")
        if isinstance(node, Send):
            return self.send(node, act, m)
        raise TypeError(node)

    def vm_call(self, name, args, m):
        fn = self.env.vm_functions.get(name)
        if fn is None:
            raise UnresolvedVmFunction(name)
        return fn(*args) & MASK

    def send(self, node: Send, act, m):
        sel = node.selector
        if sel == "ifStackContains:do:":
            return self.if_stack_contains(node, act, m)
        if sel in CONTROL_TEMPLATES:
            return self.control(node, act, m)
        if sel in BINARY_OPS or sel in COMPARISONS or sel == "bitShift:":
            a, ta = self.expr(node.receiver, act, m)
            b, tb = self.expr(node.args[0], act, m)
            return self.binary(sel, a, ta, b, tb)
        if sel in MEMORY_TEMPLATES:
            return self.memory(node, act, m)
        callee = self.env.methods.get(sel)
        if callee is not None:
            recv = self.expr(node.receiver, act, m)[0]
            args = [self.expr(a, act, m)[0] for a in node.args]
            return self.activate(callee, recv, args), WORD
        vm = vm_send_name(sel, len(node.args), self._vm_arities())
        if vm is not None:
            self.expr(node.receiver, act, m)
            return self.vm_call(vm, [self.expr(a, act, m)[0] for a in node.args], m), WORD
        raise UnknownSelector(sel, m.selector)

    def _vm_arities(self):
        return self.env.vm_arities or {name: None for name in self.env.vm_functions}

    def binary(self, sel, a, ta, b, tb):
        signed = _signed_op(ta, tb)
        rtype = SIGNED if signed else WORD
        if sel in BINARY_OPS:
            op = BINARY_OPS[sel]
            op_signed = _signed_op(ta) if op in ("shl", "shr") else signed
            return binop(op, a, b, op_signed), rtype
        if sel == "bitShift:":
            return self.bit_shift(a, ta, b, tb)
        if sel in ("=", "=="):
            return int(a == b), WORD
        if sel in ("~=", "~~"):
            return int(a != b), WORD
        if sel == "<":
            return binop("cmp_lt", a, b, signed), WORD
        if sel == "<=":
            return binop("cmp_le", a, b, signed), WORD
        if sel == ">":
            return binop("cmp_lt", b, a, signed), WORD
        if sel == ">=":
            return binop("cmp_le", b, a, signed), WORD
        raise UnknownSelector(sel, None)

    def bit_shift(self, a, ta, n, tn):
        rtype = ta or SIGNED
        signed = _signed_op(ta)
        count = as_signed(n)
        if count >= 0:
            return binop("shl", a, n, False), rtype
        return binop("shr", a, wrap(-count), signed), rtype

    def memory(self, node: Send, act, m):
        sel = node.selector
        env = self.env
        self.expr(node.receiver, act, m)
        if sel == "primitiveFail":
            raise PrimitiveFailure(m.selector)
        evaluated = [self.expr(a, act, m) for a in node.args]
        args = [v for v, _ in evaluated]
        if sel == "stackAt:":
            return env.arg_slot(args[0]) & MASK, OOP
        if sel == "longAt:":
            return env.memory.load(args[0]), WORD
        if sel == "longAt:put:":
            env.memory.store(args[0], args[1])
            return evaluated[1]
        if sel == "integerValueOf:":
            return binop("shr", args[0], 1, True), SIGNED
        if sel == "integerObjectOf:":
            return ((args[0] << 1) | 1) & MASK, OOP
        if sel == "fetchWord:ofObject:":
            return env.memory.load(wrap(args[1] + HEADER_BYTES + 8 * args[0])), WORD
        if sel == "storeWord:ofObject:withValue:":
            env.memory.store(wrap(args[1] + HEADER_BYTES + 8 * args[0]), args[2])
            return evaluated[2]
        raise UnknownSelector(sel, m.selector)

    # -- control templates ----------------------------------------------------

    def _plain(self, node, m):
        if not isinstance(node, Block):
            raise BlockMisuse(f"control template argument must be a block literal in {m.selector}")
        if node.params:
            raise BlockMisuse(f"block takes no arguments here in {m.selector}")
        return node

    def control(self, node: Send, act, m):
        sel = node.selector
        if sel in ("whileTrue:", "whileFalse:", "whileTrue", "whileFalse"):
            cond = self._plain(node.receiver, m)
            body = self._plain(node.args[0], m) if node.args else None
            want = sel.startswith("whileTrue")
            while True:
                self.tick()
                c = self.block_value(cond, act, m)[0]
                if bool(c) != want:
                    return 0, None
                if body is not None:
                    self.block_value(body, act, m)
        if sel in ("to:do:", "to:by:do:"):
            return self.to_do(node, act, m)
        cond = self.expr(node.receiver, act, m)[0]
        blocks = [self._plain(a, m) for a in node.args]
        if sel == "ifTrue:":
            then_b, else_b, true_value = blocks[0], None, 0
        elif sel == "ifFalse:":
            then_b, else_b, true_value = None, blocks[0], 0
        elif sel == "ifTrue:ifFalse:":
            then_b, else_b, true_value = blocks[0], blocks[1], 0
        elif sel == "ifFalse:ifTrue:":
            then_b, else_b, true_value = blocks[1], blocks[0], 0
        elif sel == "and:":
            then_b, else_b, true_value = blocks[0], None, 0
        else:  # or:
            then_b, else_b, true_value = None, blocks[0], 1
        chosen = then_b if cond else else_b
        if chosen is None:
            return (true_value if cond else 0), WORD
        return self.block_value(chosen, act, m)[0], WORD

    def to_do(self, node: Send, act, m):
        start = self.expr(node.receiver, act, m)[0]
        stop = self.expr(node.args[0], act, m)[0]
        step = 1
        if node.selector == "to:by:do:":
            s = node.args[1]
            if not (isinstance(s, Literal) and s.kind == "int" and s.value != 0):
                raise BlockMisuse("to:by:do: needs a nonzero integer literal step")
            step = s.value
        block = node.args[-1]
        if not isinstance(block, Block) or len(block.params) != 1:
            raise BlockMisuse(f"to:do: expects a one-argument block in {m.selector}")
        var = block.params[0]
        act.vars[var] = start
        act.types[var] = m.type_of(var)
        limit = as_signed(stop)
        inner = Block((), block.temps, block.body)
        while True:
            self.tick()
            i = as_signed(act.vars[var])
            if not (i <= limit if step > 0 else limit <= i):
                return 0, None
            self.block_value(inner, act, m)
            act.vars[var] = wrap(act.vars[var] + step)

    def if_stack_contains(self, node: Send, act, m):
        sym = node.args[0]
        if not (isinstance(sym, Literal) and sym.kind == "symbol"):
            raise BlockMisuse("ifStackContains:do: expects a symbol literal")
        self.expr(node.receiver, act, m)
        self.stats.guard_checks += 1
        if guard_check(self.stack, sym.text):
            return self.block_value(self._plain(node.args[1], m), act, m)[0], WORD
        return 0, None


def ast_interpret(m: MethodNode, receiver=0, args=(), env: SymbolEnv | None = None,
                  stats: InterpStats | None = None):
    env = env or SymbolEnv(methods={m.selector: m})
    if m.selector not in env.methods:
        env.methods = {**env.methods, m.selector: m}
    return AstInterpreter(env, stats).activate(m, receiver, list(args))
