"""A small expression language for states, and verification suites built on it.

Grammar (Python expression syntax, evaluated over a restricted AST):

    atom    := gamma[i] | beta[i] | c[i] | b[i] | vac | L | J | Q | G
    expr    := atom | INT | FRACTION | expr + expr | expr - expr | -expr
             | scalar * expr | expr * scalar | expr / INT
             | pow(expr, INT)        gamma^k (any integer k for inverted gamma),
                                     otherwise a k-fold normally ordered power
             | nop(e1, e2, ...)      right-nested normally ordered product
             | prod(e1, e2, n)       the n-th product e1_(n) e2
             | D(e) | D(e, k)        k-th derivative

The index suffix defaults to 1; integers denote multiples of ``vac``.
A suite file holds ``lhs == rhs`` lines, ``#`` comments, and the directives
``rank: d`` and ``localization: r`` which apply to the lines after them.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import InputError
from .engine import nop, nth_product, topological_generators
from .states import BETA, GAMMA, B, C, VState

_ATOM = re.compile(r"^(gamma|beta|c|b)(\d*)$")
_KINDS = {"gamma": GAMMA, "beta": BETA, "c": C, "b": B}


class _Evaluator:
    def __init__(self, d: int, r: int, line: int | None):
        self.d, self.r, self.line = d, r, line
        self._top = None

    def fail(self, node, msg):
        col = getattr(node, "col_offset", None)
        raise InputError(msg, self.line, None if col is None else col + 1)

    def top(self):
        if self._top is None:
            self._top = topological_generators(self.d, self.r)
        return self._top

    def scalar(self, node):
        """Evaluate a node that must be a rational scalar, or return None."""
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Fraction(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self.scalar(node.operand)
            if v is None:
                return None
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Div, ast.Mult, ast.Add, ast.Sub)):
            a, b = self.scalar(node.left), self.scalar(node.right)
            if a is None or b is None:
                return None
            if isinstance(node.op, ast.Div):
                if b == 0:
                    self.fail(node, "division by zero")
                return a / b
            if isinstance(node.op, ast.Mult):
                return a * b
            return a + b if isinstance(node.op, ast.Add) else a - b
        return None

    def int_arg(self, node) -> int:
        v = self.scalar(node)
        if v is None or v.denominator != 1:
            self.fail(node, "expected an integer")
        return int(v)

    def state(self, node) -> VState:
        s = self.scalar(node)
        if s is not None:
            return VState.vacuum(self.d, self.r) * s
        if isinstance(node, ast.Name):
            return self.atom(node)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -self.state(node.operand)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.UAdd):
            return self.state(node.operand)
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Add):
                return self.state(node.left) + self.state(node.right)
            if isinstance(node.op, ast.Sub):
                return self.state(node.left) - self.state(node.right)
            if isinstance(node.op, ast.Mult):
                ls, rs = self.scalar(node.left), self.scalar(node.right)
                if ls is not None:
                    return self.state(node.right) * ls
                if rs is not None:
                    return self.state(node.left) * rs
                self.fail(node, "'*' needs a scalar factor; use nop(...) for products of states")
            if isinstance(node.op, ast.Div):
                rs = self.scalar(node.right)
                if rs is None or rs == 0:
                    self.fail(node, "'/' needs a nonzero scalar divisor")
                return self.state(node.left) * (1 / rs)
            self.fail(node, "unsupported operator")
        if isinstance(node, ast.Call):
            return self.call(node)
        self.fail(node, f"unsupported syntax {type(node).__name__}")

    def atom(self, node: ast.Name) -> VState:
        name = node.id
        if name == "vac":
            return VState.vacuum(self.d, self.r)
        if name in ("L", "J", "Q", "G"):
            return self.top()[name]
        m = _ATOM.match(name)
        if not m:
            self.fail(node, f"unknown name {name!r}")
        idx = int(m.group(2) or 1)
        if not 1 <= idx <= self.d:
            self.fail(node, f"index {idx} outside 1..{self.d}")
        return VState.symbol(self.d, self.r, _KINDS[m.group(1)], idx)

    def call(self, node: ast.Call) -> VState:
        if not isinstance(node.func, ast.Name):
            self.fail(node, "unsupported call")
        fn, args = node.func.id, node.args
        if node.keywords:
            self.fail(node, "keyword arguments are not supported")
        if fn == "nop":
            if not args:
                self.fail(node, "nop needs arguments")
            return nop(*[self.state(a) for a in args])
        if fn == "prod":
            if len(args) != 3:
                self.fail(node, "prod takes (a, b, n)")
            return nth_product(self.state(args[0]), self.state(args[1]), self.int_arg(args[2]))
        if fn == "D":
            if len(args) not in (1, 2):
                self.fail(node, "D takes (a) or (a, k)")
            k = self.int_arg(args[1]) if len(args) == 2 else 1
            if k < 0:
                self.fail(node, "derivative order must be non-negative")
            return self.state(args[0]).derivative(k)
        if fn == "pow":
            if len(args) != 2:
                self.fail(node, "pow takes (x, k)")
            k = self.int_arg(args[1])
            base = args[0]
            if isinstance(base, ast.Name):
                m = _ATOM.match(base.id)
                if m and m.group(1) == "gamma":
                    idx = int(m.group(2) or 1)
                    if k < 0 and idx > self.r:
                        self.fail(base, f"gamma{idx} is not inverted (localization {self.r})")
                    return VState.gamma_power(self.d, self.r, idx, k)
            if k < 0:
                self.fail(node, "negative powers exist only for inverted gamma")
            s = self.state(base)
            out = VState.vacuum(self.d, self.r)
            for _ in range(k):
                out = nop(s, out)
            return out
        self.fail(node, f"unknown function {fn!r}")


def parse_state(text: str, d: int = 1, r: int = 0, line: int | None = None, column_offset: int = 0) -> VState:
    """Evaluate an expression; error columns are shifted by ``column_offset``."""
    stripped = text.lstrip()
    shift = column_offset + len(text) - len(stripped)
    src = stripped.rstrip().replace("^", "**")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        col = None if exc.offset is None else exc.offset + shift
        raise InputError(f"syntax error: {exc.msg}", line, col) from None
    body = tree.body
    try:
        if isinstance(body, ast.BinOp) and isinstance(body.op, ast.Pow):
            raise InputError("use pow(x, k) for powers", line, body.col_offset + 1)
        return _Evaluator(d, r, line).state(body)
    except InputError as exc:
        if exc.column is None or not shift:
            raise
        raise InputError(exc.message, line, exc.column + shift) from None


def verify_identity(lhs: VState, rhs: VState) -> tuple[bool, VState]:
    diff = lhs - rhs
    return diff.is_zero(), diff


@dataclass
class SuiteResult:
    line: int
    text: str
    passed: bool
    difference: str
    rank: int
    localization: int


@dataclass
class SuiteReport:
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def render(self) -> str:
        lines = []
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            lines.append(f"{status} line {r.line} (d={r.rank}, r={r.localization}): {r.text}")
            if not r.passed:
                lines.append(f"  lhs - rhs = {r.difference}")
        n_ok = sum(r.passed for r in self.results)
        lines.append(f"{n_ok}/{len(self.results)} identities hold")
        return "\n".join(lines) + "\n"


def run_suite(text: str) -> SuiteReport:
    d, r = 1, 0
    report = SuiteReport()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        low = line.lower()
        if low.startswith("rank:") or low.startswith("localization:"):
            key, _, val = line.partition(":")
            try:
                v = int(val.strip())
            except ValueError:
                raise InputError(f"bad {key.strip()} value", lineno, len(key) + 2) from None
            if key.strip().lower() == "rank":
                if v < 1:
                    raise InputError("rank must be at least 1", lineno, len(key) + 2)
                d = v
                r = min(r, d)
            else:
                if not 0 <= v <= d:
                    raise InputError(f"localization must lie in 0..{d}", lineno, len(key) + 2)
                r = v
            continue
        if "==" not in line:
            raise InputError("expected 'lhs == rhs'", lineno, 1)
        body = raw.split("#", 1)[0]
        cut = body.index("==")
        lhs = parse_state(body[:cut], d, r, lineno)
        rhs = parse_state(body[cut + 2:], d, r, lineno, column_offset=cut + 2)
        ok, diff = verify_identity(lhs, rhs)
        report.results.append(SuiteResult(lineno, line, ok, diff.render(), d, r))
    return report
