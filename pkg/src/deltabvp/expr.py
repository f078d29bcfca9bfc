"""Recursive-descent parser and evaluator for the problem-file expression language.

Grammar (whitespace-insensitive, ``#`` comments to end of line)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := "-" factor | power
    power  := atom ("^" factor)?
    atom   := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"

``^`` is right-associative real power and binds tighter than unary minus, so
``-x^2`` parses as ``-(x^2)``.  Known functions: sin cos tan exp log sqrt abs
tanh (unary), min max (binary).  Known constants: pi, e.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

__all__ = [
    "Expr", "Num", "Var", "Const", "Neg", "Bin", "Call",
    "parse", "evaluate", "to_source", "as_callable",
    "sample_nonincreasing_in_y", "MonotoneReport", "MonotoneViolation",
    "ExprError", "ExprSyntaxError", "UnknownIdentifierError", "ArityError",
    "DomainError", "MissingBindingError",
]

FUNCTIONS = {
    "sin": 1, "cos": 1, "tan": 1, "exp": 1, "log": 1,
    "sqrt": 1, "abs": 1, "tanh": 1, "min": 2, "max": 2,
}
CONSTANTS = {"pi": math.pi, "e": math.e}


class ExprError(Exception):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier {name!r} (at position {position})")
        self.name = name
        self.position = position


class ArityError(ExprError):
    def __init__(self, name: str, expected: int, got: int, position: int):
        super().__init__(f"{name} takes {expected} argument(s), got {got} (at position {position})")
        self.position = position


class DomainError(ExprError):
    """Evaluation left the real domain (log/sqrt of a negative, division by zero, overflow)."""

    def __init__(self, message: str, node: "Expr"):
        super().__init__(f"{message} in {to_source(node)!r}")
        self.node = node


class MissingBindingError(ExprError):
    def __init__(self, name: str):
        super().__init__(f"no binding for variable {name!r}")
        self.name = name


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Const(Expr):
    name: str  # "pi" or "e"


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple[Expr, ...]


# ---------------------------------------------------------------------------
# Lexing / parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]], variables: frozenset[str]):
        self.tokens = tokens
        self.variables = variables
        self.index = 0

    @property
    def token(self):
        return self.tokens[self.index]

    def advance(self):
        self.index += 1

    def expect(self, text: str):
        kind, value, pos = self.token
        if value != text or kind == "end":
            raise ExprSyntaxError(f"expected {text!r}", pos)
        self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, value, pos = self.token
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {value!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.token[1] in ("+", "-"):
            op = self.token[1]
            self.advance()
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.token[1] in ("*", "/"):
            op = self.token[1]
            self.advance()
            node = Bin(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.token[1] == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        if self.token[1] == "^":
            self.advance()
            node = Bin("^", node, self.factor())
        return node

    def atom(self) -> Expr:
        kind, value, pos = self.token
        if kind == "num":
            self.advance()
            return Num(float(value))
        if kind == "ident":
            self.advance()
            if self.token[1] == "(":
                return self.call(value, pos)
            if value in self.variables:
                return Var(value)
            if value in CONSTANTS:
                return Const(value)
            raise UnknownIdentifierError(value, pos)
        if value == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(f"expected a number, name or '(', got {value!r}" if kind != "end"
                              else "unexpected end of input", pos)

    def call(self, name: str, pos: int) -> Expr:
        if name not in FUNCTIONS:
            raise UnknownIdentifierError(name, pos)
        self.expect("(")
        args = [self.expr()]
        while self.token[1] == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ArityError(name, FUNCTIONS[name], len(args), pos)
        return Call(name, tuple(args))


def parse(source: str, variables) -> Expr:
    """Parse ``source`` into an AST; names outside ``variables``, the known
    functions and the constants pi/e are rejected."""
    if not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(_tokenize(source), frozenset(variables)).parse()


# ---------------------------------------------------------------------------
# Evaluation

_UNARY = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
    "log": math.log, "sqrt": math.sqrt, "abs": abs, "tanh": math.tanh,
}


def evaluate(e: Expr, bindings: dict[str, float]) -> float:
    """Evaluate the AST with IEEE double semantics.

    Raises DomainError, with the offending subtree, on any operation that
    leaves the finite reals; MissingBindingError on an unbound variable.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Var):
        try:
            return bindings[e.name]
        except KeyError:
            raise MissingBindingError(e.name) from None
    if isinstance(e, Neg):
        return -evaluate(e.operand, bindings)
    if isinstance(e, Bin):
        a = evaluate(e.left, bindings)
        b = evaluate(e.right, bindings)
        try:
            if e.op == "+":
                out = a + b
            elif e.op == "-":
                out = a - b
            elif e.op == "*":
                out = a * b
            elif e.op == "/":
                out = a / b
            else:
                out = math.pow(a, b)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainError(str(exc), e) from None
        if not math.isfinite(out):
            raise DomainError(f"non-finite result {out}", e)
        return out
    if isinstance(e, Call):
        args = [evaluate(a, bindings) for a in e.args]
        try:
            if e.name == "min":
                out = min(args[0], args[1])
            elif e.name == "max":
                out = max(args[0], args[1])
            else:
                out = _UNARY[e.name](args[0])
        except (ValueError, OverflowError) as exc:
            raise DomainError(str(exc), e) from None
        if not math.isfinite(out):
            raise DomainError(f"non-finite result {out}", e)
        return out
    raise TypeError(f"not an Expr node: {e!r}")


# ---------------------------------------------------------------------------
# Printing (round-trips through parse to a structurally identical AST)

# Precedence levels used by the printer; atoms sit above everything.
_PREC = {Bin: None, Num: 5, Var: 5, Const: 5, Call: 5, Neg: 3}
_BIN_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, Bin):
        return _BIN_PREC[e.op]
    return _PREC[type(e)]


def _fmt(e: Expr, min_prec: int) -> str:
    if isinstance(e, Num):
        s = repr(e.value)
    elif isinstance(e, (Var, Const)):
        s = e.name
    elif isinstance(e, Call):
        s = f"{e.name}({', '.join(_fmt(a, 0) for a in e.args)})"
    elif isinstance(e, Neg):
        s = "-" + _fmt(e.operand, 3)
    elif isinstance(e, Bin):
        if e.op == "^":
            # Grammar requires an atomic base; the exponent is a factor.
            s = f"{_fmt(e.left, 5)}^{_fmt(e.right, 3)}"
        else:
            lp = _BIN_PREC[e.op]
            s = f"{_fmt(e.left, lp)} {e.op} {_fmt(e.right, lp + 1)}"
    else:
        raise TypeError(f"not an Expr node: {e!r}")
    if _prec(e) < min_prec:
        return f"({s})"
    return s


def to_source(e: Expr) -> str:
    """Render the AST back to grammar-conformant source text."""
    return _fmt(e, 0)


# ---------------------------------------------------------------------------
# Compiled fast path

def _py_source(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        return f"_const_{e.name}"
    if isinstance(e, Neg):
        return f"(-{_py_source(e.operand)})"
    if isinstance(e, Bin):
        if e.op == "^":
            return f"_pow({_py_source(e.left)}, {_py_source(e.right)})"
        return f"({_py_source(e.left)} {e.op} {_py_source(e.right)})"
    if isinstance(e, Call):
        return f"_fn_{e.name}({', '.join(_py_source(a) for a in e.args)})"
    raise TypeError(f"not an Expr node: {e!r}")


def as_callable(e: Expr, variables):
    """Compile the AST into a positional-argument callable, bit-identical to
    :func:`evaluate`.

    On a domain fault the compiled code re-runs the interpreted evaluator so
    the DomainError carries the offending subtree.
    """
    names = list(variables)
    namespace = {"_pow": math.pow, "_fn_abs": abs, "_fn_min": min, "_fn_max": max}
    for fn, impl in _UNARY.items():
        namespace.setdefault(f"_fn_{fn}", impl)
    for cn, cv in CONSTANTS.items():
        namespace[f"_const_{cn}"] = cv
    raw = eval(f"lambda {', '.join(names)}: {_py_source(e)}", namespace)  # noqa: S307

    def call(*args: float) -> float:
        try:
            out = raw(*args)
        except (ZeroDivisionError, ValueError, OverflowError):
            out = math.nan
        if not math.isfinite(out):
            # Recover the precise witness node.
            return evaluate(e, dict(zip(names, args)))
        return out

    return call


# ---------------------------------------------------------------------------
# Sampled monotonicity check for the non-increasing-in-y assumption

@dataclass(frozen=True)
class MonotoneViolation:
    t: float
    x: float
    y_lo: float
    y_hi: float
    f_lo: float
    f_hi: float


@dataclass(frozen=True)
class MonotoneReport:
    passed: bool
    violations: tuple[MonotoneViolation, ...]
    samples_checked: int


def sample_nonincreasing_in_y(
    f: Expr,
    t_values,
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    samples: int = 12,
    slack: float = 1e-12,
) -> MonotoneReport:
    """Check f(t, x, y1) >= f(t, x, y2) - slack for sampled y1 < y2.

    Consecutive sampled y pairs are checked at every sampled (t, x); that is
    equivalent to checking all sampled pairs.  Domain faults in f propagate.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples per axis")
    if not (x_range[0] < x_range[1] and y_range[0] < y_range[1]):
        raise ValueError("sampling ranges must be non-degenerate")
    fn = as_callable(f, ("t", "x", "y"))
    xs = [x_range[0] + (x_range[1] - x_range[0]) * k / (samples - 1) for k in range(samples)]
    ys = [y_range[0] + (y_range[1] - y_range[0]) * k / (samples - 1) for k in range(samples)]
    violations = []
    checked = 0
    for t in t_values:
        for x in xs:
            prev_y, prev_f = ys[0], fn(t, x, ys[0])
            for y in ys[1:]:
                val = fn(t, x, y)
                checked += 1
                if prev_f < val - slack:
                    violations.append(MonotoneViolation(t, x, prev_y, y, prev_f, val))
                prev_y, prev_f = y, val
    return MonotoneReport(passed=not violations, violations=tuple(violations), samples_checked=checked)
