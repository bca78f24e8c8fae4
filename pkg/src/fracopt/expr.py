"""A closed arithmetic expression language for the integrands A(alpha, u), B(alpha, u).

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = ("-" | "+") unary | power ;
    power   = atom [ "^" unary ] ;            (* right associative *)
    atom    = number | name | call | "(" expr ")" ;
    call    = fname "(" expr { "," expr } ")" ;
    fname   = "exp" | "log" | "sqrt" | "abs" | "sin" | "cos" | "min" | "max" ;
    number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;

Names must be declared by the caller (``alpha1..alphar``, ``u1..ud`` by
convention). ``-u1^2`` parses as ``-(u1^2)``; ``2^-1`` is allowed.

Evaluation is IEEE-754 double arithmetic through :mod:`math`. Any non-finite
intermediate, a negative ``log``/``sqrt`` argument or an exact zero divisor
raises :class:`~fracopt.errors.DomainError`, so callers never see NaN.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, ExprSyntaxError, UnknownVariable

UNARY_OPS = ("neg", "exp", "log", "sqrt", "abs")
BINARY_OPS = ("+", "-", "*", "/", "^")
CALLS = {"sin": 1, "cos": 1, "min": 2, "max": 2}
_UNARY_FUNCS = ("exp", "log", "sqrt", "abs")


class Node:
    """Base class of the (immutable) AST node kinds."""

    __slots__ = ()

    def variables(self) -> frozenset:
        return frozenset(n.name for n in self.walk() if isinstance(n, Var))

    def walk(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children()))

    def children(self) -> tuple:
        return ()

    def depth(self) -> int:
        kids = self.children()
        return 1 + (max(k.depth() for k in kids) if kids else 0)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Const(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Unary(Node):
    op: str
    arg: Node

    def __post_init__(self):
        if self.op not in UNARY_OPS:
            raise ValueError(f"bad unary op {self.op!r}")

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Node
    right: Node

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"bad binary op {self.op!r}")

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Call(Node):
    fn: str
    args: tuple

    def __post_init__(self):
        if CALLS.get(self.fn) != len(self.args):
            raise ValueError(f"bad call {self.fn!r} with {len(self.args)} args")

    def children(self):
        return tuple(self.args)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text, names):
        self.text = text
        self.names = names
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, tok, what):
        kind, value, pos = tok
        found = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"expected {what}, found {found}", pos, self.text)

    def expect(self, value):
        tok = self.take()
        if tok[0] != "op" or tok[1] != value:
            self.fail(tok, repr(value))

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.fail(tok, "operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Unary("neg", self.unary())
        if tok[0] == "op" and tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        kind, value, pos = tok
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            if value in _UNARY_FUNCS or value in CALLS:
                return self.call(value)
            if value not in self.names:
                raise UnknownVariable(value, pos)
            return Var(value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.fail(tok, "number, name or '('")

    def call(self, fn):
        self.expect("(")
        args = [self.expr()]
        while self.peek()[0] == "op" and self.peek()[1] == ",":
            self.take()
            args.append(self.expr())
        close = self.peek()
        self.expect(")")
        arity = 1 if fn in _UNARY_FUNCS else CALLS[fn]
        if len(args) != arity:
            raise ExprSyntaxError(f"{fn} takes {arity} argument(s), got {len(args)}", close[2], self.text)
        if fn in _UNARY_FUNCS:
            return Unary(fn, args[0])
        return Call(fn, tuple(args))


def parse_expression(text: str, variables: Sequence[str]) -> Node:
    """Parse ``text`` into an AST over the declared ``variables``.

    Raises ExprSyntaxError (with a 0-based ``offset``) on malformed input and
    UnknownVariable for identifiers outside ``variables``.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0, text)
    return _Parser(text, frozenset(variables)).parse()


def to_text(node: Node) -> str:
    """Fully parenthesised text that reparses to a structurally identical AST."""
    if isinstance(node, Const):
        if node.value < 0 or math.copysign(1.0, node.value) < 0:
            # the parser only produces non-negative literals
            return f"(-{to_text(Const(-node.value))})"
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"(-{to_text(node.arg)})"
        return f"{node.op}({to_text(node.arg)})"
    if isinstance(node, Binary):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Call):
        return f"{node.fn}({', '.join(to_text(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")


# ------------------------------------------------------------- evaluation


def _check(x):
    if not math.isfinite(x):
        raise DomainError(f"non-finite intermediate {x!r}")
    return x


def _pow(a, b):
    try:
        return _check(math.pow(a, b))
    except (ValueError, OverflowError) as exc:
        raise DomainError(f"{a!r} ^ {b!r}: {exc}") from None


def _apply_unary(op, x):
    if op == "neg":
        return -x
    if op == "abs":
        return math.fabs(x)
    if op == "sqrt":
        if x < 0:
            raise DomainError(f"sqrt of negative {x!r}")
        return math.sqrt(x)
    if op == "log":
        if x <= 0:
            raise DomainError(f"log of non-positive {x!r}")
        return _check(math.log(x))
    if op == "exp":
        try:
            return _check(math.exp(x))
        except OverflowError:
            raise DomainError(f"exp overflow at {x!r}") from None
    raise ValueError(op)


def _apply_binary(op, a, b):
    if op == "+":
        return _check(a + b)
    if op == "-":
        return _check(a - b)
    if op == "*":
        return _check(a * b)
    if op == "/":
        if b == 0.0:
            raise DomainError("division by zero")
        return _check(a / b)
    if op == "^":
        return _pow(a, b)
    raise ValueError(op)


def _apply_call(fn, args):
    if fn == "sin":
        return math.sin(args[0])
    if fn == "cos":
        return math.cos(args[0])
    a, b = args
    if fn == "min":
        return b if b < a else a
    return b if b > a else a


def evaluate(node: Node, binding: Mapping[str, float]) -> float:
    """Evaluate ``node`` with variables bound by ``binding``."""
    if isinstance(node, Const):
        return _check(float(node.value))
    if isinstance(node, Var):
        try:
            return _check(float(binding[node.name]))
        except KeyError:
            raise UnknownVariable(node.name) from None
    if isinstance(node, Unary):
        return _apply_unary(node.op, evaluate(node.arg, binding))
    if isinstance(node, Binary):
        return _apply_binary(node.op, evaluate(node.left, binding), evaluate(node.right, binding))
    if isinstance(node, Call):
        return _apply_call(node.fn, [evaluate(a, binding) for a in node.args])
    raise TypeError(f"not an expression node: {node!r}")


# ----------------------------------------------------- compiled programs

# Opcodes shared with the batch kernels; keep in sync with _kernel.pyx.
OP_CONST, OP_VAR = 0, 1
OP_NEG, OP_EXP, OP_LOG, OP_SQRT, OP_ABS, OP_SIN, OP_COS = 2, 3, 4, 5, 6, 7, 8
OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW, OP_MIN, OP_MAX = 9, 10, 11, 12, 13, 14, 15

_UNARY_CODES = {"neg": OP_NEG, "exp": OP_EXP, "log": OP_LOG, "sqrt": OP_SQRT, "abs": OP_ABS}
_BINARY_CODES = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV, "^": OP_POW}
_CALL_CODES = {"sin": OP_SIN, "cos": OP_COS, "min": OP_MIN, "max": OP_MAX}


@dataclass(frozen=True)
class Program:
    """Postfix form of an AST: ``code[k] = (opcode, operand)``."""

    code: np.ndarray  # int64, shape (n, 2)
    consts: np.ndarray  # float64
    stack_size: int


def compile_program(node: Node, columns: Sequence[str]) -> Program:
    """Flatten ``node`` into postfix code; variables become column indices of ``columns``."""
    col = {name: i for i, name in enumerate(columns)}
    code, consts = [], []
    depth = [0, 0]  # current, max

    def push(delta):
        depth[0] += delta
        depth[1] = max(depth[1], depth[0])

    def emit(n):
        if isinstance(n, Const):
            consts.append(float(n.value))
            code.append((OP_CONST, len(consts) - 1))
            push(1)
        elif isinstance(n, Var):
            if n.name not in col:
                raise UnknownVariable(n.name)
            code.append((OP_VAR, col[n.name]))
            push(1)
        elif isinstance(n, Unary):
            emit(n.arg)
            code.append((_UNARY_CODES[n.op], 0))
        elif isinstance(n, Binary):
            emit(n.left)
            emit(n.right)
            code.append((_BINARY_CODES[n.op], 0))
            push(-1)
        elif isinstance(n, Call):
            for a in n.args:
                emit(a)
            code.append((_CALL_CODES[n.fn], 0))
            push(1 - len(n.args))
        else:
            raise TypeError(f"not an expression node: {n!r}")

    emit(node)
    return Program(
        code=np.asarray(code, dtype=np.int64).reshape(-1, 2),
        consts=np.asarray(consts, dtype=np.float64),
        stack_size=max(depth[1], 1),
    )
