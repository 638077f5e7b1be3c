"""Lower an annotated MethodNode to three-address code."""
from __future__ import annotations

from ..errors import ArityMismatch, BlockMisuse, UndefinedVariable, UnknownSelector
from ..frontend.nodes import (Assign, BasicType, Block, ExprStatement, Literal, MethodNode,
                              Return, Send, VarRef, VmCall)
from ..templates import (BINARY_OPS, COMPARISONS, CONTROL_TEMPLATES, MEMORY_TEMPLATES,
                         vm_send_name)
from ..words import wrap
from .nodes import BasicBlock, Imm, Instr, IrFunction, Reg, Scope, Sym

SIGNED = BasicType.SIGNED_WORD
WORD = BasicType.WORD
HEADER_BYTES = 16


class Lowerer:
    def __init__(self, method: MethodNode, table):
        self.m = method
        self.table = table
        self.blocks = []
        self.cur = None
        self.ntemps = 0
        self.types = {}
        self.scopes = []
        self.vreg_scope = {}
        self.env = []            # stack of {source name: vreg}
        self.scope_ids = []
        self.taken = set()

    # -- bookkeeping --------------------------------------------------------

    def new_block(self):
        b = BasicBlock(len(self.blocks))
        self.blocks.append(b)
        return b

    def emit(self, op, dest=None, args=(), **kw):
        instr = Instr(op, dest, list(args), **kw)
        if self.cur is not None:
            self.cur.instrs.append(instr)
        return Reg(dest) if dest else None

    def terminate(self, op, args=(), **kw):
        if self.cur is not None:
            self.cur.term = Instr(op, None, list(args), **kw)
        self.cur = None

    def temp(self, basic_type=WORD):
        self.ntemps += 1
        name = str(self.ntemps)
        self.types[name] = basic_type
        self.vreg_scope[name] = self.scope_ids[-1]
        return name

    def push_scope(self, label, names):
        sid = len(self.scopes)
        parent = self.scope_ids[-1] if self.scope_ids else None
        mapping = {}
        scope = Scope(sid, parent, label)
        for n in names:
            vreg = n
            k = 1
            while vreg in self.taken:
                k += 1
                vreg = f"{n}_{k}"
            self.taken.add(vreg)
            mapping[n] = vreg
            self.types[vreg] = self.m.type_of(n)
            self.vreg_scope[vreg] = sid
            scope.variables.append(vreg)
        self.scopes.append(scope)
        self.scope_ids.append(sid)
        self.env.append(mapping)
        return mapping

    def pop_scope(self):
        self.scope_ids.pop()
        self.env.pop()

    def lookup(self, name):
        for mapping in reversed(self.env):
            if name in mapping:
                return mapping[name]
        return None

    def type_of(self, operand):
        if isinstance(operand, Reg):
            return self.types.get(operand.name, WORD)
        return None

    def signed_op(self, *operands):
        kinds = [self.type_of(o) for o in operands]
        return all(k is None or k is SIGNED for k in kinds)

    # -- entry --------------------------------------------------------------

    def lower(self) -> IrFunction:
        m = self.m
        mapping = self.push_scope(m.selector, ("self",) + tuple(m.params) + tuple(m.temps))
        self.types["self"] = BasicType.OOP_REF
        self.cur = self.new_block()
        for t in m.temps:
            self.emit("move", mapping[t], [Imm(0)])
        self.statements(m.body)
        if self.cur is not None:
            self.terminate("ret", [Reg("self")])
        self.pop_scope()
        f = IrFunction(
            name=m.selector, params=[mapping[p] for p in m.params], blocks=self.blocks,
            types=self.types, scopes=self.scopes, vreg_scope=self.vreg_scope,
            returns_oop=m.returns_oop, form="tac")
        f.frame_hint = len(f.vregs())
        return f

    # -- statements ---------------------------------------------------------

    def statements(self, body):
        """Lower a statement list; returns the value of the last one."""
        value = Imm(0)
        for stmt in body:
            if self.cur is None:
                # code after a primitive failure is unreachable but still lowered
                self.cur = self.new_block()
            if isinstance(stmt, Return):
                v = self.expr(stmt.expr)
                self.terminate("ret", [v])
                return Imm(0)
            if isinstance(stmt, Assign):
                vreg = self.lookup(stmt.target)
                if vreg is None:
                    raise UndefinedVariable(stmt.target, self.m.selector)
                v = self.expr(stmt.expr)
                self.emit("move", vreg, [v])
                value = Reg(vreg)
            elif isinstance(stmt, ExprStatement):
                value = self.expr(stmt.expr)
        return value

    def block_body(self, block, bound=None):
        if not isinstance(block, Block):
            raise BlockMisuse("control template expects a block literal")
        mapping = self.push_scope(f"block{len(self.scopes)}", tuple(block.params) + tuple(block.temps))
        if bound is not None:
            for name, operand in zip(block.params, bound):
                self.emit("move", mapping[name], [operand])
        for t in block.temps:
            self.emit("move", mapping[t], [Imm(0)])
        value = self.statements(block.body)
        self.pop_scope()
        return value

    # -- expressions --------------------------------------------------------

    def expr(self, node):
        if isinstance(node, Literal):
            return Imm(wrap(node.value))
        if isinstance(node, VarRef):
            vreg = self.lookup(node.name)
            if vreg is not None:
                return Reg(vreg)
            if node.name in self.table.globals:
                return self.emit("load_word", self.temp(), [Sym(node.name)])
            raise UndefinedVariable(node.name, self.m.selector)
        if isinstance(node, Block):
            raise BlockMisuse(f"block literal outside a control template in {self.m.selector}")
        if isinstance(node, VmCall):
            return self.vm_call(node.function_name, node.args)
        if isinstance(node, Send):
            return self.send(node)
        raise TypeError(node)

    def vm_call(self, name, arg_nodes):
        if name not in self.table.vm_functions:
            raise UnknownSelector(name, self.m.selector)
        arity = self.table.vm_functions[name]
        if arity is not None and arity != len(arg_nodes):
            raise ArityMismatch(f"VM function {name} takes {arity} arguments, got {len(arg_nodes)}")
        args = [self.expr(a) for a in arg_nodes]
        return self.emit("call_vm", self.temp(), args, target=name)

    def send(self, node: Send):
        sel = node.selector
        if sel in CONTROL_TEMPLATES:
            return self.control(node)
        if sel in BINARY_OPS or sel in COMPARISONS or sel == "bitShift:":
            a = self.expr(node.receiver)
            b = self.expr(node.args[0])
            return self.binary(sel, a, b)
        if sel in MEMORY_TEMPLATES:
            return self.memory(node)
        if sel in self.table.methods:
            recv = self.expr(node.receiver)
            args = [self.expr(a) for a in node.args]
            return self.emit("call_internal", self.temp(), [recv, *args], target=sel)
        vm = vm_send_name(sel, len(node.args), self.table.vm_functions)
        if vm is not None:
            self.expr(node.receiver)
            return self.vm_call(vm, node.args)
        raise UnknownSelector(sel, self.m.selector)

    def binary(self, sel, a, b):
        signed = self.signed_op(a, b)
        rtype = SIGNED if signed else WORD
        if sel in BINARY_OPS:
            op = BINARY_OPS[sel]
            if op == "shl":
                signed = self.signed_op(a)
            if op == "shr":
                signed = self.signed_op(a)
            return self.emit(op, self.temp(rtype), [a, b], signed=signed)
        if sel == "bitShift:":
            return self.bit_shift(a, b)
        if sel in ("=", "=="):
            return self.emit("cmp_eq", self.temp(), [a, b])
        if sel in ("~=", "~~"):
            eq = self.emit("cmp_eq", self.temp(), [a, b])
            return self.emit("bxor", self.temp(), [eq, Imm(1)])
        if sel == "<":
            return self.emit("cmp_lt", self.temp(), [a, b], signed=signed)
        if sel == "<=":
            return self.emit("cmp_le", self.temp(), [a, b], signed=signed)
        if sel == ">":
            return self.emit("cmp_lt", self.temp(), [b, a], signed=signed)
        if sel == ">=":
            return self.emit("cmp_le", self.temp(), [b, a], signed=signed)
        raise UnknownSelector(sel, self.m.selector)

    def bit_shift(self, a, n):
        rtype = self.type_of(a) or SIGNED
        signed = self.signed_op(a)
        if isinstance(n, Imm):
            count = n.value if n.value < 1 << 63 else n.value - (1 << 64)
            if count >= 0:
                return self.emit("shl", self.temp(rtype), [a, Imm(count)])
            return self.emit("shr", self.temp(rtype), [a, Imm(wrap(-count))], signed=signed)
        result = self.temp(rtype)
        is_neg = self.emit("cmp_lt", self.temp(), [n, Imm(0)], signed=True)
        right, left, join = self.new_block(), self.new_block(), self.new_block()
        self.terminate("branch_if", [is_neg], targets=(right.id, left.id))
        self.cur = left
        self.emit("move", result, [self.emit("shl", self.temp(rtype), [a, n])])
        self.terminate("jump", targets=(join.id,))
        self.cur = right
        count = self.emit("sub", self.temp(), [Imm(0), n])
        self.emit("move", result, [self.emit("shr", self.temp(rtype), [a, count], signed=signed)])
        self.terminate("jump", targets=(join.id,))
        self.cur = join
        return Reg(result)

    def memory(self, node: Send):
        sel = node.selector
        if sel == "primitiveFail":
            self.expr(node.receiver)
            self.terminate("ret", [], fail=True)
            self.cur = self.new_block()
            return Imm(0)
        self.expr(node.receiver)
        args = [self.expr(a) for a in node.args]
        if sel == "stackAt:":
            return self.emit("arg_slot_read", self.temp(BasicType.OOP_REF), args)
        if sel == "longAt:":
            return self.emit("load_word", self.temp(), args)
        if sel == "longAt:put:":
            self.emit("store_word", None, args)
            return args[1]
        if sel == "integerValueOf:":
            return self.emit("shr", self.temp(SIGNED), [args[0], Imm(1)], signed=True)
        if sel == "integerObjectOf:":
            shifted = self.emit("shl", self.temp(), [args[0], Imm(1)])
            return self.emit("bor", self.temp(BasicType.OOP_REF), [shifted, Imm(1)])
        if sel == "fetchWord:ofObject:":
            return self.emit("load_word", self.temp(), [self.slot_address(args[0], args[1])])
        if sel == "storeWord:ofObject:withValue:":
            self.emit("store_word", None, [self.slot_address(args[0], args[1]), args[2]])
            return args[2]
        raise UnknownSelector(sel, self.m.selector)

    def slot_address(self, index, oop):
        if isinstance(index, Imm):
            return self.emit("add", self.temp(BasicType.ADDRESS), [oop, Imm(wrap(HEADER_BYTES + 8 * index.value))])
        offset = self.emit("shl", self.temp(), [index, Imm(3)])
        base = self.emit("add", self.temp(BasicType.ADDRESS), [oop, offset])
        return self.emit("add", self.temp(BasicType.ADDRESS), [base, Imm(HEADER_BYTES)])

    # -- control templates --------------------------------------------------

    def _plain_block(self, node):
        if not isinstance(node, Block):
            raise BlockMisuse(f"control template argument must be a block literal in {self.m.selector}")
        if node.params:
            raise BlockMisuse(f"block takes no arguments here in {self.m.selector}")
        return node

    def control(self, node: Send):
        sel = node.selector
        if sel in ("whileTrue:", "whileFalse:", "whileTrue", "whileFalse"):
            return self.while_loop(node)
        if sel in ("to:do:", "to:by:do:"):
            return self.to_do(node)
        cond = self.expr(node.receiver)
        blocks = [self._plain_block(a) for a in node.args]
        if sel == "ifTrue:":
            return self.branch(cond, blocks[0], None)
        if sel == "ifFalse:":
            return self.branch(cond, None, blocks[0])
        if sel == "ifTrue:ifFalse:":
            return self.branch(cond, blocks[0], blocks[1])
        if sel == "ifFalse:ifTrue:":
            return self.branch(cond, blocks[1], blocks[0])
        if sel == "and:":
            return self.branch(cond, blocks[0], None)
        if sel == "or:":
            return self.branch(cond, None, blocks[0], true_value=Imm(1))
        raise UnknownSelector(sel, self.m.selector)

    def branch(self, cond, then_block, else_block, true_value=None):
        result = self.temp()
        then_b, else_b, join = self.new_block(), self.new_block(), self.new_block()
        self.terminate("branch_if", [cond], targets=(then_b.id, else_b.id))
        for target, block in ((then_b, then_block), (else_b, else_block)):
            self.cur = target
            if block is not None:
                value = self.block_body(block)
            else:
                value = true_value if (target is then_b and true_value is not None) else Imm(0)
            if self.cur is not None:
                self.emit("move", result, [value])
                self.terminate("jump", targets=(join.id,))
        self.cur = join
        return Reg(result)

    def while_loop(self, node: Send):
        cond_block = self._plain_block(node.receiver)
        body_block = self._plain_block(node.args[0]) if node.args else None
        head = self.new_block()
        self.terminate("jump", targets=(head.id,))
        self.cur = head
        c = self.block_body(cond_block)
        body, exit_ = self.new_block(), self.new_block()
        if node.selector.startswith("whileTrue"):
            self.terminate("branch_if", [c], targets=(body.id, exit_.id))
        else:
            self.terminate("branch_if", [c], targets=(exit_.id, body.id))
        self.cur = body
        if body_block is not None:
            self.block_body(body_block)
        self.terminate("jump", targets=(head.id,))
        self.cur = exit_
        return Imm(0)

    def to_do(self, node: Send):
        start = self.expr(node.receiver)
        stop = self.expr(node.args[0])
        step = 1
        if node.selector == "to:by:do:":
            step_node = node.args[1]
            if not (isinstance(step_node, Literal) and step_node.kind == "int" and step_node.value != 0):
                raise BlockMisuse("to:by:do: needs a nonzero integer literal step")
            step = step_node.value
        block = node.args[-1]
        if not isinstance(block, Block) or len(block.params) != 1:
            raise BlockMisuse(f"to:do: expects a one-argument block in {self.m.selector}")
        limit = self.temp(SIGNED)
        self.emit("move", limit, [stop])
        mapping = self.push_scope(f"block{len(self.scopes)}", (block.params[0],))
        counter = mapping[block.params[0]]
        self.emit("move", counter, [start])
        head = self.new_block()
        self.terminate("jump", targets=(head.id,))
        self.cur = head
        # loop bounds compare as signed integers whatever the variable type
        if step > 0:
            c = self.emit("cmp_le", self.temp(), [Reg(counter), Reg(limit)], signed=True)
        else:
            c = self.emit("cmp_le", self.temp(), [Reg(limit), Reg(counter)], signed=True)
        body, exit_ = self.new_block(), self.new_block()
        self.terminate("branch_if", [c], targets=(body.id, exit_.id))
        self.cur = body
        inner = Block((), block.temps, block.body)
        self.block_body(inner)
        if self.cur is not None:
            nxt = self.emit("add", self.temp(self.types[counter]), [Reg(counter), Imm(wrap(step))])
            self.emit("move", counter, [nxt])
            self.terminate("jump", targets=(head.id,))
        self.pop_scope()
        self.cur = exit_
        return Imm(0)


def lower(method: MethodNode, table) -> IrFunction:
    return Lowerer(method, table).lower()
