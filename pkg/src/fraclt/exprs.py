"""Parser for the density and trial-function mini-language.

Grammar (whitespace ignored)::

    expr   := term ('+' term)*
    term   := [number '*'] name '(' [arg (',' arg)*] ')'
    arg    := key '=' value
    value  := number | '[' value (',' value)* ']' | '[' a ',' b ']' '^' d

Density terms:
    gauss(w=1, c=[0,0,0], s=0.5)     w N(c, s^2 I), integrating to w
    uniform(cube=[0,1]^3, w=1)       w on the cube; also c=[..], side=..
    bump(w=1, c=[0,0], r=1, p=2)     w (1 - |x-c|^2/r^2)_+^p

Trial-function terms (a single term):
    gauss(s=1, c=[0,0,0])            L2-normalized Gaussian of width s
    bump(r=1, c=[0,0,0], p=4)        L2-normalized bump of radius r and power p

A leading numeric factor multiplies the term.  Centers default to the origin
of dimension d, which must then be supplied by the caller.
"""

from __future__ import annotations

import ast

import numpy as np

from .density import BumpCompact, BumpMixture, Density, Gaussian, GaussianMixture, IndicatorMixture
from .errors import DimensionMismatchError, ParseError
from .geometry import Cube

_DENSITY_ARGS = {"gauss": {"w", "c", "s"}, "uniform": {"w", "cube", "c", "side"},
                 "bump": {"w", "c", "r", "p"}}
_TRIAL_ARGS = {"gauss": {"s", "c"}, "bump": {"r", "c", "p"}}


class _Power:
    """Interval raised to a dimension, as in [0,1]^3."""

    def __init__(self, interval, dim):
        self.interval = interval
        self.dim = dim


def _value(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _value(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, (ast.List, ast.Tuple)):
        return [_value(e) for e in node.elts]
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.BitXor):
        base, exp = _value(node.left), _value(node.right)
        if not isinstance(base, list) or len(base) != 2 or not float(exp).is_integer() or exp < 1:
            raise ParseError("'^' needs an interval [a,b] and a positive integer dimension")
        return _Power(base, int(exp))
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Div, ast.Mult)):
        a, b = _value(node.left), _value(node.right)
        if isinstance(a, float) and isinstance(b, float):
            return a / b if isinstance(node.op, ast.Div) else a * b
    raise ParseError(f"unsupported value: {ast.unparse(node)}")


def _terms(node):
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add):
        return _terms(node.left) + _terms(node.right)
    factor = 1.0
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
        factor = _value(node.left)
        if not isinstance(factor, float):
            raise ParseError("a term factor must be a number")
        node = node.right
    if not isinstance(node, ast.Call) or not isinstance(node.func, ast.Name):
        raise ParseError(f"expected name(args), got {ast.unparse(node)}")
    if node.args:
        raise ParseError(f"{node.func.id}: arguments must be given as key=value")
    kwargs = {kw.arg: _value(kw.value) for kw in node.keywords}
    return [(node.func.id, factor, kwargs)]


def parse_terms(text: str) -> list:
    """Split an expression into (name, factor, kwargs) triples."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None
    return _terms(tree.body)


def _center(kw, d):
    c = kw.get("c")
    if c is None:
        if d is None:
            raise ParseError("center c=[...] required when the dimension is not given")
        return np.zeros(d)
    if not isinstance(c, list) or any(isinstance(v, list) for v in c):
        raise ParseError("center must be a flat list")
    return np.array(c)


def _positive(kw, key, default=None):
    v = kw.get(key, default)
    if v is None:
        raise ParseError(f"missing argument {key}=")
    if not isinstance(v, float) or not v > 0:
        raise ParseError(f"{key} must be a positive number")
    return v


def _check(name, kw, allowed):
    if name not in allowed:
        raise ParseError(f"unknown function {name!r}; expected one of {sorted(allowed)}")
    extra = set(kw) - allowed[name]
    if extra:
        raise ParseError(f"{name}: unknown arguments {sorted(extra)}")


def _cube(kw, d):
    if "cube" in kw:
        spec = kw["cube"]
        if not isinstance(spec, _Power):
            raise ParseError("cube must be written as [a,b]^d")
        a, b = spec.interval
        if not b > a:
            raise ParseError("cube interval must have b > a")
        return Cube.from_corner([a] * spec.dim, b - a)
    return Cube(tuple(_center(kw, d)), _positive(kw, "side"))


def _unify(dims, d):
    dims = set(dims) | ({d} if d is not None else set())
    if len(dims) > 1:
        raise DimensionMismatchError(f"inconsistent dimensions {sorted(dims)}")
    return dims.pop()


def parse_density(text: str, d: int | None = None) -> Density:
    """Build a density from a sum of terms of one kind."""
    terms = parse_terms(text)
    for name, _, kw in terms:
        _check(name, kw, _DENSITY_ARGS)
    kinds = {name for name, _, _ in terms}
    if len(kinds) > 1:
        raise ParseError(f"cannot mix density kinds {sorted(kinds)} in one expression")
    kind = kinds.pop()
    if kind == "gauss":
        centers = [_center(kw, d) for _, _, kw in terms]
        _unify([len(c) for c in centers], d)
        return GaussianMixture([f * kw.get("w", 1.0) for _, f, kw in terms], np.array(centers),
                               [_positive(kw, "s") for _, _, kw in terms])
    if kind == "bump":
        centers = [_center(kw, d) for _, _, kw in terms]
        _unify([len(c) for c in centers], d)
        return BumpMixture([f * kw.get("w", 1.0) for _, f, kw in terms], np.array(centers),
                           [_positive(kw, "r") for _, _, kw in terms],
                           [kw.get("p", 2.0) for _, _, kw in terms])
    cubes = [_cube(kw, d) for _, _, kw in terms]
    _unify([Q.dim for Q in cubes], d)
    return IndicatorMixture([f * kw.get("w", 1.0) for _, f, kw in terms], cubes)


def parse_trial(text: str, d: int | None = None):
    """Build a single trial function; a numeric factor rescales it."""
    terms = parse_terms(text)
    if len(terms) != 1:
        raise ParseError("trial functions take exactly one term")
    name, factor, kw = terms[0]
    _check(name, kw, _TRIAL_ARGS)
    center = _center(kw, d)
    _unify([len(center)], d)
    if name == "gauss":
        u = Gaussian(center, _positive(kw, "s", 1.0))
    else:
        u = BumpCompact(center, _positive(kw, "r", 1.0), _positive(kw, "p", 4.0))
    return u if factor == 1.0 else u.rescaled(factor)
