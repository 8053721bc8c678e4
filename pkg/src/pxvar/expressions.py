"""Tiny arithmetic expression language used by problem files.

Exponent and potential formulas arrive as strings ("2 + 0.5*x",
"-mu*abs(t)^p").  The language is deliberately small: numbers, named
variables, + - * /, power (written ^ or **), unary minus, parentheses and a
fixed set of one-argument functions.  Parsing goes through the stdlib ast
module and anything outside the whitelist is rejected, so a problem file
cannot execute arbitrary code.
"""

from __future__ import annotations

import ast

import numpy as np

__all__ = ["Expression"]

_FUNCTIONS = {
    "abs": np.abs,
    "sign": np.sign,
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
}

_CONSTANTS = {"pi": np.pi}

_BIN_OPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.true_divide,
    ast.Pow: np.power,
}

_UNARY_OPS = {ast.UAdd: lambda v: v, ast.USub: np.negative}


class Expression:
    """A parsed formula over named variables, evaluated with numpy.

    `variables`, when given, is the set of names the formula may use;
    unknown names fail at construction time rather than at evaluation.
    """

    def __init__(self, text, variables=None):
        if not isinstance(text, str) or not text.strip():
            raise ValueError("expression must be a non-empty string")
        self.text = text
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"cannot parse expression {text!r}: {exc}") from None
        self._tree = tree.body
        self.names = sorted(self._collect_names(self._tree))
        if variables is not None:
            extra = set(self.names) - set(variables)
            if extra:
                raise ValueError(
                    f"expression {text!r} uses unknown name(s) {sorted(extra)}"
                )

    def _collect_names(self, node):
        # Walks and validates in one pass.
        if isinstance(node, ast.Constant):
            if isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
                return set()
            raise ValueError(f"literal {node.value!r} not allowed in expressions")
        if isinstance(node, ast.Name):
            return set() if node.id in _CONSTANTS else {node.id}
        if isinstance(node, ast.BinOp) and type(node.op) in _BIN_OPS:
            return self._collect_names(node.left) | self._collect_names(node.right)
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY_OPS:
            return self._collect_names(node.operand)
        if isinstance(node, ast.Call):
            if (
                isinstance(node.func, ast.Name)
                and node.func.id in _FUNCTIONS
                and len(node.args) == 1
                and not node.keywords
            ):
                return self._collect_names(node.args[0])
            raise ValueError(f"call not allowed in expression {self.text!r}")
        raise ValueError(f"syntax not allowed in expression {self.text!r}")

    def __call__(self, **env):
        missing = [n for n in self.names if n not in env]
        if missing:
            raise ValueError(f"missing value(s) for {missing} in {self.text!r}")
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            return self._eval(self._tree, env)

    def _eval(self, node, env):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id] if node.id in env else _CONSTANTS[node.id]
        if isinstance(node, ast.BinOp):
            return _BIN_OPS[type(node.op)](
                self._eval(node.left, env), self._eval(node.right, env)
            )
        if isinstance(node, ast.UnaryOp):
            return _UNARY_OPS[type(node.op)](self._eval(node.operand, env))
        if isinstance(node, ast.Call):
            return _FUNCTIONS[node.func.id](self._eval(node.args[0], env))
        raise AssertionError("unreachable: tree was validated at parse time")

    def __repr__(self):
        return f"Expression({self.text!r})"
