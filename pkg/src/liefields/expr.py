"""Scalar expressions over named variables: parsing, evaluation, symbolic derivatives.

The grammar (documented in the README) covers +, -, *, /, ^ with the usual
precedence, unary minus, numeric literals, declared variables and the fixed
function set below.  Expressions are immutable after construction and safe to
share between workers.  Differentiation is exact AST rewriting with light
simplification only (constant folding, zero/one elimination); no general
algebraic normalization is attempted.
"""

from __future__ import annotations

import keyword
import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping

__all__ = [
    "Expression",
    "ExprError",
    "ExprSyntaxError",
    "ExprNameError",
    "DomainEvalError",
    "parse",
    "derive",
    "evaluate",
    "unparse",
]

# Fixed, versioned function set (v1).  One entry per name: (arity, callable).
FUNCTIONS: dict[str, tuple[int, Callable[..., float]]] = {
    "sin": (1, math.sin),
    "cos": (1, math.cos),
    "tan": (1, math.tan),
    "exp": (1, math.exp),
    "log": (1, math.log),
    "sqrt": (1, math.sqrt),
    "atan": (1, math.atan),
    "atan2": (2, math.atan2),
}

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_NUM_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ExprNameError(ExprError):
    """Undeclared variable or unknown function."""

    def __init__(self, message: str, name: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.name = name
        self.offset = offset


class DomainEvalError(ExprError):
    """Evaluation hit a domain fault (log of non-positive, division by zero, ...)."""

    def __init__(self, message: str, subexpr: str):
        super().__init__(f"{message} in '{subexpr}'")
        self.subexpr = subexpr


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^
    lhs: "Node"
    rhs: "Node"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Node", ...]


Node = Num | Var | Neg | Bin | Call


# ---------------------------------------------------------------------------
# Tokenizer / recursive-descent parser
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | lparen | rparen | comma | end
    text: str
    pos: int


def _tokenize(src: str) -> list[_Token]:
    toks: list[_Token] = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        m = _NUM_RE.match(src, i)
        if m:
            toks.append(_Token("num", m.group(), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(src, i)
        if m:
            toks.append(_Token("ident", m.group(), i))
            i = m.end()
            continue
        if c in "+-*/^":
            toks.append(_Token("op", c, i))
        elif c == "(":
            toks.append(_Token("lparen", c, i))
        elif c == ")":
            toks.append(_Token("rparen", c, i))
        elif c == ",":
            toks.append(_Token("comma", c, i))
        else:
            raise ExprSyntaxError(f"unexpected character '{c}'", i)
        i += 1
    toks.append(_Token("end", "", n))
    return toks


class _Parser:
    def __init__(self, tokens: list[_Token], varnames: tuple[str, ...]):
        self.toks = tokens
        self.pos = 0
        self.varnames = varnames

    def peek(self) -> _Token:
        return self.toks[self.pos]

    def advance(self) -> _Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ExprSyntaxError(f"expected {what}", tok.pos)
        return self.advance()

    # expr := term (('+'|'-') term)*
    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = Bin(op, node, self.term())
        return node

    # term := unary (('*'|'/') unary)*
    def term(self) -> Node:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = Bin(op, node, self.unary())
        return node

    # unary := '-' unary | power
    def unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    # power := atom ('^' unary)?   (right-associative, exponent may be signed)
    def power(self) -> Node:
        node = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            return Bin("^", node, self.unary())
        return node

    def atom(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "lparen":
            self.advance()
            node = self.expr()
            self.expect("rparen", "')'")
            return node
        if tok.kind == "ident":
            self.advance()
            if self.peek().kind == "lparen":
                if tok.text not in FUNCTIONS:
                    raise ExprNameError(f"unknown function '{tok.text}'", tok.text, tok.pos)
                arity = FUNCTIONS[tok.text][0]
                self.advance()
                args = [self.expr()]
                while self.peek().kind == "comma":
                    self.advance()
                    args.append(self.expr())
                self.expect("rparen", "')'")
                if len(args) != arity:
                    raise ExprSyntaxError(
                        f"'{tok.text}' takes {arity} argument(s), got {len(args)}", tok.pos
                    )
                return Call(tok.text, tuple(args))
            if tok.text not in self.varnames:
                raise ExprNameError(f"undeclared identifier '{tok.text}'", tok.text, tok.pos)
            return Var(tok.text)
        raise ExprSyntaxError("expected number, variable or '('", tok.pos)


# ---------------------------------------------------------------------------
# Smart constructors: light simplification used by derive()
# ---------------------------------------------------------------------------


def _is_num(node: Node, value: float | None = None) -> bool:
    return isinstance(node, Num) and (value is None or node.value == value)


def _fold(op: str, a: float, b: float) -> Num | None:
    try:
        if op == "+":
            r = a + b
        elif op == "-":
            r = a - b
        elif op == "*":
            r = a * b
        elif op == "/":
            r = a / b
        else:
            r = a**b
    except (ZeroDivisionError, ValueError, OverflowError):
        return None
    return Num(r) if math.isfinite(r) else None


def _add(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return _fold("+", a.value, b.value) or Bin("+", a, b)
    return Bin("+", a, b)


def _sub(a: Node, b: Node) -> Node:
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return _fold("-", a.value, b.value) or Bin("-", a, b)
    return Bin("-", a, b)


def _mul(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return _fold("*", a.value, b.value) or Bin("*", a, b)
    return Bin("*", a, b)


def _div(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0) and not _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        folded = _fold("/", a.value, b.value)
        if folded is not None:
            return folded
    return Bin("/", a, b)


def _pow(a: Node, b: Node) -> Node:
    if _is_num(b, 1.0):
        return a
    if _is_num(b, 0.0):
        return Num(1.0)
    if isinstance(a, Num) and isinstance(b, Num):
        folded = _fold("^", a.value, b.value)
        if folded is not None:
            return folded
    return Bin("^", a, b)


def _neg(a: Node) -> Node:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _call(fn: str, *args: Node) -> Node:
    if all(isinstance(a, Num) for a in args):
        try:
            r = FUNCTIONS[fn][1](*[a.value for a in args])  # type: ignore[union-attr]
            if math.isfinite(r):
                return Num(r)
        except (ValueError, OverflowError, ZeroDivisionError):
            pass
    return Call(fn, tuple(args))


def _simplify(node: Node) -> Node:
    """One bottom-up pass through the smart constructors."""
    if isinstance(node, (Num, Var)):
        return node
    if isinstance(node, Neg):
        return _neg(_simplify(node.arg))
    if isinstance(node, Bin):
        a, b = _simplify(node.lhs), _simplify(node.rhs)
        return {"+": _add, "-": _sub, "*": _mul, "/": _div, "^": _pow}[node.op](a, b)
    return _call(node.fn, *[_simplify(a) for a in node.args])


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------


def _diff(node: Node, var: str) -> Node:
    if isinstance(node, Num):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0) if node.name == var else Num(0.0)
    if isinstance(node, Neg):
        return _neg(_diff(node.arg, var))
    if isinstance(node, Bin):
        u, v = node.lhs, node.rhs
        du, dv = _diff(u, var), _diff(v, var)
        if node.op == "+":
            return _add(du, dv)
        if node.op == "-":
            return _sub(du, dv)
        if node.op == "*":
            return _add(_mul(du, v), _mul(u, dv))
        if node.op == "/":
            return _div(_sub(_mul(du, v), _mul(u, dv)), _pow(v, Num(2.0)))
        # power: constant exponent gets the plain power rule, otherwise
        # d(u^v) = u^v * (dv*log u + v*du/u)
        if isinstance(v, Num):
            return _mul(_mul(v, _pow(u, Num(v.value - 1.0))), du)
        return _mul(
            _pow(u, v),
            _add(_mul(dv, _call("log", u)), _div(_mul(v, du), u)),
        )
    # calls
    fn, args = node.fn, node.args
    if fn == "atan2":
        y, x = args
        dy, dx = _diff(y, var), _diff(x, var)
        num = _sub(_mul(x, dy), _mul(y, dx))
        den = _add(_mul(x, x), _mul(y, y))
        return _div(num, den)
    (u,) = args
    du = _diff(u, var)
    if fn == "sin":
        outer: Node = _call("cos", u)
    elif fn == "cos":
        outer = _neg(_call("sin", u))
    elif fn == "tan":
        outer = _div(Num(1.0), _pow(_call("cos", u), Num(2.0)))
    elif fn == "exp":
        outer = _call("exp", u)
    elif fn == "log":
        return _div(du, u)
    elif fn == "sqrt":
        return _div(du, _mul(Num(2.0), _call("sqrt", u)))
    elif fn == "atan":
        return _div(du, _add(Num(1.0), _mul(u, u)))
    else:  # pragma: no cover - function set is closed
        raise ExprError(f"no derivative rule for '{fn}'")
    return _mul(outer, du)


# ---------------------------------------------------------------------------
# Printing and code generation
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, Bin):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _unparse(node: Node) -> str:
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = _unparse(node.arg)
        if _prec(node.arg) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Bin):
        op = node.op
        lhs, rhs = _unparse(node.lhs), _unparse(node.rhs)
        if op == "^":
            # grammar allows only an atom on the left of '^'
            if _prec(node.lhs) < 5:
                lhs = f"({lhs})"
            if _prec(node.rhs) < 3:
                rhs = f"({rhs})"
            return f"{lhs}^{rhs}"
        lp, rp = _PREC[op], _PREC[op]
        if _prec(node.lhs) < lp or isinstance(node.lhs, Neg):
            lhs = f"({lhs})"
        # left-associative ops: parenthesize an equal-precedence right child
        if _prec(node.rhs) <= rp or isinstance(node.rhs, Neg):
            rhs = f"({rhs})"
        if op in "+-":
            return f"{lhs} {op} {rhs}"
        return f"{lhs}{op}{rhs}"
    return f"{node.fn}({','.join(_unparse(a) for a in node.args)})"


def _gen_code(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_gen_code(node.arg)})"
    if isinstance(node, Bin):
        op = "**" if node.op == "^" else node.op
        return f"({_gen_code(node.lhs)}{op}{_gen_code(node.rhs)})"
    return f"math.{node.fn}({','.join(_gen_code(a) for a in node.args)})"


# ---------------------------------------------------------------------------
# Public surface
# ---------------------------------------------------------------------------


class Expression:
    """An immutable parsed expression over an ordered set of variable names."""

    __slots__ = ("root", "varnames", "_compiled")

    def __init__(self, root: Node, varnames: tuple[str, ...]):
        self.root = root
        self.varnames = tuple(varnames)
        self._compiled: Callable[..., float] | None = None

    def __repr__(self) -> str:
        return f"Expression({self.unparse()!r}, vars={list(self.varnames)})"

    def __str__(self) -> str:
        return self.unparse()

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Expression)
            and self.root == other.root
            and self.varnames == other.varnames
        )

    def __hash__(self) -> int:
        return hash((self.root, self.varnames))

    def unparse(self) -> str:
        return _unparse(self.root)

    def evaluate(self, bindings: Mapping[str, float]) -> float:
        """Checked tree-walk evaluation; raises DomainEvalError on faults."""
        missing = [v for v in self.varnames if v not in bindings]
        if missing:
            raise ExprNameError(f"missing binding for '{missing[0]}'", missing[0], 0)
        return _eval_node(self.root, bindings)

    def __call__(self, **bindings: float) -> float:
        return self.evaluate(bindings)

    def compiled(self) -> Callable[..., float]:
        """Fast positional evaluator (args in varnames order); unchecked IEEE
        semantics, faults propagate as ZeroDivisionError/ValueError/OverflowError."""
        if self._compiled is None:
            src = f"lambda {', '.join(self.varnames)}: {_gen_code(self.root)}"
            self._compiled = eval(src, {"math": math, "__builtins__": {}})
        return self._compiled

    def derive(self, var: str, order: int = 1) -> "Expression":
        return derive(self, var, order)

    def simplified(self) -> "Expression":
        return Expression(_simplify(self.root), self.varnames)

    def is_zero(self) -> bool:
        return _is_num(self.root, 0.0)

    # --- composition (same varnames or scalar operands) ---

    def _coerce(self, other: "Expression | float") -> Node:
        if isinstance(other, Expression):
            if other.varnames != self.varnames:
                raise ExprError("operands must share the same variable set")
            return other.root
        return Num(float(other))

    def __add__(self, other: "Expression | float") -> "Expression":
        return Expression(_add(self.root, self._coerce(other)), self.varnames)

    def __radd__(self, other: float) -> "Expression":
        return Expression(_add(Num(float(other)), self.root), self.varnames)

    def __sub__(self, other: "Expression | float") -> "Expression":
        return Expression(_sub(self.root, self._coerce(other)), self.varnames)

    def __rsub__(self, other: float) -> "Expression":
        return Expression(_sub(Num(float(other)), self.root), self.varnames)

    def __mul__(self, other: "Expression | float") -> "Expression":
        return Expression(_mul(self.root, self._coerce(other)), self.varnames)

    def __rmul__(self, other: float) -> "Expression":
        return Expression(_mul(Num(float(other)), self.root), self.varnames)

    def __truediv__(self, other: "Expression | float") -> "Expression":
        return Expression(_div(self.root, self._coerce(other)), self.varnames)

    def __rtruediv__(self, other: float) -> "Expression":
        return Expression(_div(Num(float(other)), self.root), self.varnames)

    def __pow__(self, other: "Expression | float") -> "Expression":
        return Expression(_pow(self.root, self._coerce(other)), self.varnames)

    def __neg__(self) -> "Expression":
        return Expression(_neg(self.root), self.varnames)


def _eval_node(node: Node, env: Mapping[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return float(env[node.name])
    if isinstance(node, Neg):
        return -_eval_node(node.arg, env)
    if isinstance(node, Bin):
        a = _eval_node(node.lhs, env)
        b = _eval_node(node.rhs, env)
        try:
            if node.op == "+":
                r = a + b
            elif node.op == "-":
                r = a - b
            elif node.op == "*":
                r = a * b
            elif node.op == "/":
                r = a / b
            else:
                r = a**b
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainEvalError(str(exc), _unparse(node)) from None
        if not math.isfinite(r):
            raise DomainEvalError("non-finite result", _unparse(node))
        return r
    args = [_eval_node(a, env) for a in node.args]
    try:
        r = FUNCTIONS[node.fn][1](*args)
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        raise DomainEvalError(str(exc), _unparse(node)) from None
    if not math.isfinite(r):
        raise DomainEvalError("non-finite result", _unparse(node))
    return r


def parse(src: str, varnames: list[str] | tuple[str, ...]) -> Expression:
    """Parse `src` over exactly the declared variables.

    Raises ExprSyntaxError (with byte offset) on malformed input and
    ExprNameError for undeclared identifiers or unknown functions.
    """
    names = tuple(varnames)
    if not names:
        raise ExprError("varnames must be non-empty")
    if len(set(names)) != len(names):
        raise ExprError("varnames must be distinct")
    for name in names:
        if not _IDENT_RE.fullmatch(name) or keyword.iskeyword(name):
            raise ExprError(f"invalid variable name '{name}'")
        if name in FUNCTIONS or name == "math":
            raise ExprError(f"variable name '{name}' shadows a reserved name")
    parser = _Parser(_tokenize(src), names)
    root = parser.expr()
    tok = parser.peek()
    if tok.kind != "end":
        raise ExprSyntaxError("unexpected trailing input", tok.pos)
    return Expression(root, names)


def constant(value: float, varnames: tuple[str, ...]) -> Expression:
    """The constant expression `value` over the given variables."""
    return Expression(Num(float(value)), tuple(varnames))


def derive(e: Expression, var: str, order: int = 1) -> Expression:
    """Exact symbolic derivative of order 1..3 with respect to `var`."""
    if var not in e.varnames:
        raise ExprNameError(f"unknown variable '{var}'", var, 0)
    if not 1 <= order <= 3:
        raise ExprError("derivative order must be 1, 2 or 3")
    node = e.root
    for _ in range(order):
        node = _simplify(_diff(node, var))
    return Expression(node, e.varnames)


def evaluate(e: Expression, bindings: Mapping[str, float]) -> float:
    return e.evaluate(bindings)


def unparse(e: Expression) -> str:
    return e.unparse()
