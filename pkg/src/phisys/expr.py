"""A small, safe arithmetic expression language for coefficients.

Expressions may use the coordinates ``x`` and ``y``, the boundary distance
``d``, the unknown ``t`` (for reaction terms), numeric literals, the operators
``+ - * / **`` and the functions listed in :data:`FUNCTIONS`.
"""

import ast
import operator

import numpy as np

from .errors import ConfigError

FUNCTIONS = {
    "min": np.minimum,
    "max": np.maximum,
    "abs": np.abs,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
}
CONSTANTS = {"pi": np.pi, "e": np.e}
VARIABLES = ("x", "y", "d", "t")

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: np.power,
}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


class Expression:
    """Parsed expression; call it with keyword arrays for its variables."""

    def __init__(self, source):
        self.source = str(source)
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse expression {self.source!r}: {exc.msg}") from None
        self._check(tree.body)
        self._code = tree.body
        self.variables = sorted(
            {n.id for n in ast.walk(tree) if isinstance(n, ast.Name) and n.id in VARIABLES}
        )

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                raise ConfigError(f"only numeric literals allowed in {self.source!r}")
        elif isinstance(node, ast.Name):
            if node.id not in VARIABLES and node.id not in CONSTANTS:
                raise ConfigError(f"unknown name {node.id!r} in {self.source!r}")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ConfigError(f"operator not allowed in {self.source!r}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if type(node.op) not in _UNOPS:
                raise ConfigError(f"operator not allowed in {self.source!r}")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS or node.keywords:
                raise ConfigError(f"function not allowed in {self.source!r}")
            for a in node.args:
                self._check(a)
        else:
            raise ConfigError(f"syntax not allowed in {self.source!r}: {type(node).__name__}")

    def _eval(self, node, env):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in CONSTANTS:
                return CONSTANTS[node.id]
            if node.id not in env:
                raise ConfigError(f"variable {node.id!r} not available for {self.source!r}")
            return env[node.id]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            return _UNOPS[type(node.op)](self._eval(node.operand, env))
        args = [self._eval(a, env) for a in node.args]
        return FUNCTIONS[node.func.id](*args)

    def __call__(self, **env):
        env = {k: np.asarray(v, dtype=float) for k, v in env.items()}
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.asarray(self._eval(self._code, env), dtype=float)

    def __repr__(self):
        return f"Expression({self.source!r})"


def sample_field(source, mesh, zero_trace=False):
    """Evaluate an expression (or take a constant) at the nodes of ``mesh``."""
    from .grid import DiscreteField

    if isinstance(source, (int, float)):
        vals = np.full(mesh.n_nodes, float(source))
    else:
        ex = source if isinstance(source, Expression) else Expression(source)
        env = {"x": mesh.nodes[:, 0], "d": mesh.distance(mesh.nodes)}
        if mesh.dim > 1:
            env["y"] = mesh.nodes[:, 1]
        vals = np.broadcast_to(ex(**env), (mesh.n_nodes,)).astype(float)
    if zero_trace:
        vals = vals.copy()
        vals[mesh.boundary_mask] = 0.0
    return DiscreteField(mesh, vals, zero_trace=zero_trace)
