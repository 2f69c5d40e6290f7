"""Hamiltonian expression language: parsing, evaluation, differentiation.

Grammar (whitespace insignificant, '^' right-associative, unary minus
binding looser than '^' so that -x1^2 means -(x1^2)):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | IDENT | '(' expr ')' | FUNC '(' expr ')'

Identifiers are the coordinates x1 .. x{4n}; the function set is sin, cos,
exp, sqrt; numeric literals are IEEE doubles.  Gradients are computed by
forward-mode dual numbers, one seeded pass per coordinate, which satisfies
the product and chain rules to machine precision; a central-difference
gradient is provided as an independent cross-check.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .structures import BlockDim

FUNCTIONS = ("sin", "cos", "exp", "sqrt")


class ExpressionError(ValueError):
    """Base class for everything the expression language can complain about."""


class ExpressionSyntaxError(ExpressionError):
    """Malformed source text; carries the byte offset and expected tokens."""

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        super().__init__(f"{message} at offset {offset}" + (f" (expected {', '.join(expected)})" if expected else ""))
        self.offset = offset
        self.expected = expected


class UnknownIdentifierError(ExpressionError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class VariableRangeError(ExpressionError):
    def __init__(self, index: int, total: int, offset: int):
        super().__init__(
            f"variable index out of range at offset {offset}: x{index} not in x1..x{total}"
        )
        self.index = index
        self.total = total
        self.offset = offset


class EvaluationError(ExpressionError):
    """Domain error during evaluation; carries the offending subexpression."""

    def __init__(self, message: str, expression: str):
        super().__init__(f"{message} in subexpression {expression!r}")
        self.expression = expression


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Variable:
    index: int  # 1-based


@dataclass(frozen=True)
class Negation:
    operand: "Node"


@dataclass(frozen=True)
class BinaryOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class FunctionCall:
    name: str
    argument: "Node"


Node = Union[Number, Variable, Negation, BinaryOp, FunctionCall]


@dataclass(frozen=True)
class ScalarField:
    """A parsed Hamiltonian H: R^{4n} -> R."""

    dim: BlockDim
    root: Node


@dataclass(frozen=True, eq=False)
class Gradient:
    """The coordinate components of dH at a point."""

    dim: BlockDim
    components: np.ndarray

    def __post_init__(self) -> None:
        components = np.asarray(self.components, dtype=np.float64)
        if components.shape != (self.dim.total,):
            raise ValueError(f"gradient must have length {self.dim.total}")
        components.flags.writeable = False
        object.__setattr__(self, "components", components)


# --- dual numbers ----------------------------------------------------------

@dataclass(frozen=True, slots=True)
class DualScalar:
    """First-order dual number a + b*eps with eps^2 = 0."""

    value: float
    derivative: float

    def __add__(self, other):
        if isinstance(other, DualScalar):
            return DualScalar(self.value + other.value, self.derivative + other.derivative)
        return DualScalar(self.value + other, self.derivative)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DualScalar):
            return DualScalar(self.value - other.value, self.derivative - other.derivative)
        return DualScalar(self.value - other, self.derivative)

    def __rsub__(self, other):
        return DualScalar(other - self.value, -self.derivative)

    def __mul__(self, other):
        if isinstance(other, DualScalar):
            return DualScalar(
                self.value * other.value,
                self.value * other.derivative + self.derivative * other.value,
            )
        return DualScalar(self.value * other, self.derivative * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DualScalar):
            quotient = self.value / other.value
            return DualScalar(
                quotient,
                (self.derivative - quotient * other.derivative) / other.value,
            )
        return DualScalar(self.value / other, self.derivative / other)

    def __rtruediv__(self, other):
        quotient = other / self.value
        return DualScalar(quotient, -quotient * self.derivative / self.value)

    def __neg__(self):
        return DualScalar(-self.value, -self.derivative)

    def __pow__(self, other):
        if isinstance(other, DualScalar):
            if other.derivative == 0.0:
                return self._pow_constant(other.value)
            if self.value <= 0.0:
                raise ValueError("dual exponentiation with varying exponent needs a positive base")
            value = self.value ** other.value
            return DualScalar(
                value,
                value
                * (other.derivative * math.log(self.value) + other.value * self.derivative / self.value),
            )
        return self._pow_constant(float(other))

    def __rpow__(self, other):
        return DualScalar(float(other), 0.0) ** self

    def _pow_constant(self, exponent: float) -> "DualScalar":
        value = self.value ** exponent
        if isinstance(value, complex):
            raise ValueError("fractional power of a negative base")
        if exponent == 0.0:
            return DualScalar(value, 0.0)
        return DualScalar(value, exponent * self.value ** (exponent - 1.0) * self.derivative)


def _dual_sin(v: DualScalar) -> DualScalar:
    return DualScalar(math.sin(v.value), math.cos(v.value) * v.derivative)


def _dual_cos(v: DualScalar) -> DualScalar:
    return DualScalar(math.cos(v.value), -math.sin(v.value) * v.derivative)


def _dual_exp(v: DualScalar) -> DualScalar:
    value = math.exp(v.value)
    return DualScalar(value, value * v.derivative)


def _dual_sqrt(v: DualScalar) -> DualScalar:
    value = math.sqrt(v.value)
    return DualScalar(value, v.derivative / (2.0 * value))


_DUAL_FUNCTIONS = {"sin": _dual_sin, "cos": _dual_cos, "exp": _dual_exp, "sqrt": _dual_sqrt}
_PLAIN_FUNCTIONS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "sqrt": math.sqrt}


# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)
_VARIABLE_RE = re.compile(r"^x(\d+)$")


@dataclass(frozen=True)
class _Token:
    kind: str  # number | ident | op | end
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == match.start():
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            offset = len(text) - len(stripped)
            raise ExpressionSyntaxError(f"unexpected character {stripped[0]!r}", offset)
        if match.lastgroup == "number":
            tokens.append(_Token("number", match.group("number"), match.start("number")))
        elif match.lastgroup == "ident":
            tokens.append(_Token("ident", match.group("ident"), match.start("ident")))
        else:
            tokens.append(_Token("op", match.group("op"), match.start("op")))
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], dim: BlockDim):
        self.tokens = tokens
        self.pos = 0
        self.dim = dim

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect_op(self, text: str) -> None:
        token = self.peek()
        if token.kind == "op" and token.text == text:
            self.advance()
            return
        raise ExpressionSyntaxError(
            f"unexpected token {token.text or '<end>'!r}", token.offset, expected=(f"'{text}'",)
        )

    def parse(self) -> Node:
        node = self.expression()
        token = self.peek()
        if token.kind != "end":
            raise ExpressionSyntaxError(
                f"trailing input {token.text!r}", token.offset, expected=("operator", "end of input")
            )
        return node

    def expression(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinaryOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return Negation(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            return BinaryOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        token = self.peek()
        if token.kind == "number":
            self.advance()
            return Number(float(token.text))
        if token.kind == "ident":
            self.advance()
            variable = _VARIABLE_RE.match(token.text)
            if variable:
                index = int(variable.group(1))
                if not 1 <= index <= self.dim.total:
                    raise VariableRangeError(index, self.dim.total, token.offset)
                return Variable(index)
            if token.text in FUNCTIONS:
                self.expect_op("(")
                argument = self.expression()
                self.expect_op(")")
                return FunctionCall(token.text, argument)
            raise UnknownIdentifierError(token.text, token.offset)
        if token.kind == "op" and token.text == "(":
            self.advance()
            node = self.expression()
            self.expect_op(")")
            return node
        raise ExpressionSyntaxError(
            f"unexpected token {token.text or '<end>'!r}",
            token.offset,
            expected=("number", "identifier", "'('", "'-'"),
        )


def parse(text: str, dim: BlockDim) -> ScalarField:
    """Parse an expression into a scalar field over R^{4n}."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return ScalarField(dim, _Parser(_tokenize(text), dim).parse())


# --- formatting ------------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _node_precedence(node: Node) -> int:
    if isinstance(node, BinaryOp):
        return _PRECEDENCE[node.op]
    if isinstance(node, Negation):
        return 3
    return 9


def _format(node: Node, minimum: int) -> str:
    if isinstance(node, Number):
        text = repr(node.value)
    elif isinstance(node, Variable):
        text = f"x{node.index}"
    elif isinstance(node, FunctionCall):
        text = f"{node.name}({_format(node.argument, 0)})"
    elif isinstance(node, Negation):
        text = f"-{_format(node.operand, 3)}"
    else:
        own = _PRECEDENCE[node.op]
        if node.op == "^":
            # base must be an atom, exponent may be a unary chain
            text = f"{_format(node.left, 5)}^{_format(node.right, 3)}"
        else:
            text = f"{_format(node.left, own)}{node.op}{_format(node.right, own + 1)}"
    if _node_precedence(node) < minimum:
        return f"({text})"
    return text


def format_expression(field_or_node: ScalarField | Node) -> str:
    """Render an AST back to parseable source text."""
    node = field_or_node.root if isinstance(field_or_node, ScalarField) else field_or_node
    return _format(node, 0)


# --- evaluation ------------------------------------------------------------

def _eval(node: Node, values):
    if isinstance(node, Number):
        return node.value
    if isinstance(node, Variable):
        return values[node.index - 1]
    if isinstance(node, Negation):
        return -_eval(node.operand, values)
    if isinstance(node, BinaryOp):
        left = _eval(node.left, values)
        right = _eval(node.right, values)
        op = node.op
        try:
            if op == "+":
                return left + right
            if op == "-":
                return left - right
            if op == "*":
                return left * right
            if op == "/":
                if (right.value if isinstance(right, DualScalar) else right) == 0.0:
                    raise ZeroDivisionError("division by zero")
                return left / right
            result = left ** right
            if isinstance(result, complex):
                raise ValueError("fractional power of a negative base")
            return result
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise EvaluationError(str(exc), _format(node, 0)) from exc
    argument = _eval(node.argument, values)
    try:
        if isinstance(argument, DualScalar):
            return _DUAL_FUNCTIONS[node.name](argument)
        return _PLAIN_FUNCTIONS[node.name](argument)
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        raise EvaluationError(str(exc), _format(node, 0)) from exc


def _check_point(dim: BlockDim, point) -> np.ndarray:
    point = np.asarray(point, dtype=np.float64)
    if point.shape != (dim.total,):
        raise ValueError(f"point must have length {dim.total}, got shape {point.shape}")
    return point


def evaluate(field: ScalarField, point) -> float:
    """Evaluate the field at a point with IEEE double arithmetic."""
    point = _check_point(field.dim, point)
    return float(_eval(field.root, point.tolist()))


def gradient(field: ScalarField, point) -> Gradient:
    """Exact-to-machine-precision gradient by seeded dual-number passes."""
    point = _check_point(field.dim, point)
    plain = point.tolist()
    size = field.dim.total
    components = np.empty(size)
    for seed in range(size):
        values = [DualScalar(plain[j], 1.0 if j == seed else 0.0) for j in range(size)]
        result = _eval(field.root, values)
        components[seed] = result.derivative if isinstance(result, DualScalar) else 0.0
    return Gradient(field.dim, components)


def fd_gradient(field: ScalarField, point, h: float) -> Gradient:
    """Central-difference gradient, the independent cross-check."""
    if h <= 0.0:
        raise ValueError(f"step size must be positive, got {h}")
    point = _check_point(field.dim, point)
    size = field.dim.total
    components = np.empty(size)
    for a in range(size):
        forward = point.copy()
        backward = point.copy()
        forward[a] += h
        backward[a] -= h
        components[a] = (evaluate(field, forward) - evaluate(field, backward)) / (2.0 * h)
    return Gradient(field.dim, components)


# --- demo Hamiltonians -----------------------------------------------------

def quadratic_energy_text(dim: BlockDim) -> str:
    """Source text of the isotropic quadratic energy 1/2 sum x_a^2."""
    return "0.5*(" + " + ".join(f"x{a}^2" for a in range(1, dim.total + 1)) + ")"


# the three stock Hamiltonians used throughout tests and docs, n = 1
DEMO_HAMILTONIANS = {
    "quadratic": "0.5*(x1^2 + x2^2 + x3^2 + x4^2)",
    "quartic": "x1*x2 + x3^4",
    "oscillatory": "sin(x1) + exp(x2)/4",
}


def demo_hamiltonians(dim: BlockDim | None = None) -> dict[str, ScalarField]:
    """The stock n = 1 Hamiltonians, parsed."""
    dim = dim or BlockDim(1)
    return {name: parse(text, dim) for name, text in DEMO_HAMILTONIANS.items()}
