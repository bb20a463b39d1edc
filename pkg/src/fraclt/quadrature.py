"""Gauss-Legendre quadrature on cubes, singular pair integrals and 1-D radial integrals.

Every routine returns an :class:`ErrorEstimate`, a float carrying the
difference between two rule orders as ``stderr``.
"""

from __future__ import annotations

import heapq
import itertools
import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import DivergenceError, EvaluationError, InvalidParameterError, SingularityError
from .geometry import Cube

DEFAULT_ORDER = 24
ORDER_STEP = 4


def default_order() -> int:
    """Quadrature order per axis, overridable through FRAC_LT_QUAD_ORDER."""
    raw = os.environ.get("FRAC_LT_QUAD_ORDER")
    if raw is None:
        return DEFAULT_ORDER
    try:
        n = int(raw)
    except ValueError as exc:
        raise InvalidParameterError(f"FRAC_LT_QUAD_ORDER must be an integer, got {raw!r}") from exc
    if n < 1:
        raise InvalidParameterError("FRAC_LT_QUAD_ORDER must be >= 1")
    return n


class ErrorEstimate(float):
    """A float value together with a nonnegative error estimate."""

    def __new__(cls, value, stderr=0.0):
        obj = super().__new__(cls, value)
        obj.stderr = abs(float(stderr))
        return obj

    @property
    def value(self) -> float:
        return float(self)

    def __repr__(self):
        return f"ErrorEstimate(value={float(self)!r}, stderr={self.stderr!r})"

    def __reduce__(self):
        return (ErrorEstimate, (float(self), self.stderr))

    def scaled(self, factor: float) -> "ErrorEstimate":
        return ErrorEstimate(float(self) * factor, self.stderr * abs(factor))

    def to_dict(self) -> dict:
        return {"value": float(self), "stderr": self.stderr}


def total(estimates) -> ErrorEstimate:
    """Sum of estimates with errors added in absolute value."""
    estimates = list(estimates)
    return ErrorEstimate(math.fsum(float(e) for e in estimates),
                         math.fsum(getattr(e, "stderr", 0.0) for e in estimates))


def stderr_of(x) -> float:
    return getattr(x, "stderr", 0.0)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on the reference interval [-1, 1]."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def refined(self, step: int = ORDER_STEP) -> "QuadratureRule":
        return gauss_legendre(self.order + step)

    def on_interval(self, a: float, b: float):
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadratureRule:
    if n < 1:
        raise InvalidParameterError("quadrature order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(int(n))
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(int(n), x, w)


@lru_cache(maxsize=None)
def _jacobi_01(n: int, beta: float):
    """Nodes/weights on [0, 1] for the weight t**beta."""
    x, w = roots_jacobi(int(n), 0.0, float(beta))
    return 0.5 * (x + 1.0), w * 0.5 ** (beta + 1.0)


def _resolve(rule) -> QuadratureRule:
    if rule is None:
        return gauss_legendre(default_order())
    if isinstance(rule, int):
        return gauss_legendre(rule)
    return rule


def tensor_nodes(lo, hi, rule: QuadratureRule):
    """Tensor-product nodes (n^d, d) and weights (n^d,) on the box [lo, hi]."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    axes, wax = [], []
    for a, b in zip(lo, hi):
        x, w = rule.on_interval(a, b)
        axes.append(x)
        wax.append(w)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    weights = wax[0]
    for w in wax[1:]:
        weights = np.multiply.outer(weights, w)
    return grid, np.ravel(weights)


def _checked(values, points):
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        node = np.asarray(points)[i] if np.ndim(points) else points
        raise EvaluationError(f"non-finite integrand value at node {node}", node=node)
    return values


def _cube_sum(f, lo, hi, rule):
    pts, w = tensor_nodes(lo, hi, rule)
    vals = _checked(np.broadcast_to(f(pts), w.shape), pts)
    return float(np.dot(w, vals))


def integrate_box(f, lo, hi, rule=None) -> ErrorEstimate:
    """Tensor Gauss-Legendre integral of f over [lo, hi]; f maps (n, d) -> (n,)."""
    rule = _resolve(rule)
    coarse = _cube_sum(f, lo, hi, rule)
    fine = _cube_sum(f, lo, hi, rule.refined())
    return ErrorEstimate(fine, abs(fine - coarse))


def integrate_cube(f, Q: Cube, rule=None) -> ErrorEstimate:
    """Integral of f over the cube Q with stderr from orders n and n+4."""
    return integrate_box(f, Q.lo, Q.hi, rule)


# ---------------------------------------------------------------------------
# Singular double integrals over Q x Q


def _pyramid_directions(d, j, eta):
    """Unit-max-norm directions with coordinate j pinned to 1."""
    m = eta.shape[0]
    e = np.empty((m, d))
    e[:, j] = 1.0
    others = [i for i in range(d) if i != j]
    if others:
        e[:, others] = eta
    return e


def _singular_pair_sum(G, Q: Cube, sigma: float, n: int):
    d = Q.dim
    L = Q.side
    lo = Q.lo
    p = d + 2.0 * sigma
    beta = 1.0 - 2.0 * sigma
    t01, wt01 = _jacobi_01(n, beta)
    t_nodes = L * t01
    t_weights = wt01 * L ** (beta + 1.0)

    ref = gauss_legendre(n)
    y_ref, wy = tensor_nodes(np.zeros(d), np.ones(d), ref)
    if d > 1:
        eta, weta = tensor_nodes(np.zeros(d - 1), np.ones(d - 1), ref)
    else:
        eta, weta = np.zeros((1, 0)), np.ones(1)

    per_t = np.zeros(n)
    per_t_abs = np.zeros(n)
    for signs in itertools.product((1.0, -1.0), repeat=d):
        sgn = np.asarray(signs)
        for j in range(d):
            e = _pyramid_directions(d, j, eta)
            enorm = np.sqrt(np.sum(e ** 2, axis=1)) ** (-p)
            for i, t in enumerate(t_nodes):
                z = sgn * t * e
                length = L - np.abs(z)
                lower = lo + np.maximum(0.0, -z)
                y = lower[:, None, :] + length[:, None, :] * y_ref[None, :, :]
                x = y + z[:, None, :]
                vals = G(x.reshape(-1, d), y.reshape(-1, d))
                vals = _checked(np.broadcast_to(vals, (x.shape[0] * x.shape[1],)), x.reshape(-1, d))
                H = vals.reshape(x.shape[0], -1) @ wy * np.prod(length, axis=1)
                g = H / (t * t) * enorm
                per_t[i] += float(np.dot(weta, g))
                per_t_abs[i] += float(np.dot(weta, np.abs(g)))
    return float(np.dot(t_weights, per_t)), t_nodes, per_t_abs


def integrate_singular_pair(G, Q: Cube, sigma: float, rule=None, *, exponent=None,
                            blowup_cap: float = 2.0) -> ErrorEstimate:
    """Approximate the double integral of G(x, y) / |x - y|^(d + 2 sigma) over Q x Q.

    Works in difference coordinates z = x - y.  The z-range is split into
    orthants and then into pyramids on which |z| is comparable to the
    max-norm t; the factor t^(1 - 2 sigma) left after cancelling t^2 from
    G is absorbed into a Gauss-Jacobi rule, so the radial integrand is
    smooth whenever G vanishes quadratically on the diagonal.

    ``blowup_cap`` bounds the growth of the radial integrand between the two
    nodes closest to the diagonal, normalised by the node ratio; larger growth
    means G does not vanish fast enough and a SingularityError is raised.
    """
    if not 0.0 < sigma < 1.0:
        raise InvalidParameterError(f"sigma must lie in (0, 1), got {sigma}")
    d = Q.dim
    if exponent is not None and not math.isclose(exponent, d + 2 * sigma, rel_tol=1e-12):
        raise InvalidParameterError(f"exponent {exponent} does not equal d + 2 sigma = {d + 2 * sigma}")
    rule = _resolve(rule)
    coarse, _, _ = _singular_pair_sum(G, Q, sigma, rule.order)
    fine, t_nodes, mags = _singular_pair_sum(G, Q, sigma, rule.order + ORDER_STEP)
    if mags[1] > 0.0:
        growth = (mags[0] / mags[1]) / (t_nodes[1] / t_nodes[0])
        if growth > blowup_cap:
            raise SingularityError(
                f"integrand grows like a non-integrable power near the diagonal (growth ratio {growth:.3g})")
    elif mags[0] > 0.0:
        raise SingularityError("integrand concentrated at the diagonal")
    return ErrorEstimate(fine, abs(fine - coarse))


# ---------------------------------------------------------------------------
# 1-D integrals on (a, b), b possibly infinite


class _Segment:
    """Maps a parameter interval onto part of the r axis."""

    def __init__(self, kind, start, param_lo, param_hi, power):
        self.kind = kind
        self.start = start
        self.lo = param_lo
        self.hi = param_hi
        self.power = power

    def evaluate(self, g, v, w):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return self._evaluate(g, v, w)

    def _evaluate(self, g, v, w):
        p = self.power
        if self.kind == "pow":
            r = v ** (1.0 / (p + 1.0))
            jac = np.full_like(v, 1.0 / (p + 1.0))
            weight = 1.0
        elif self.kind == "tail":
            inv = 1.0 / v
            r = self.start + (inv - 1.0)
            jac = None
            weight = r ** p if p else 1.0
        else:
            r = v
            jac = 1.0
            weight = r ** p if p else 1.0
        vals = np.broadcast_to(np.asarray(g(r), dtype=float), r.shape) * weight
        if self.kind == "tail":
            vals = vals * inv * inv
            # beyond float range the integrand has decayed, provided it converges at all
            vals = np.where(np.isfinite(r), vals, 0.0)
        else:
            vals = vals * jac
        vals = _checked(vals, r)
        return float(np.dot(w, vals)), float(np.dot(np.abs(w), np.abs(vals)))


def integrate_radial(g, a: float = 0.0, b: float = math.inf, rule=None, *, power: float = 0.0,
                     breakpoints=(), scale: float = 1.0, rtol: float = 1e-12, atol: float = 0.0,
                     max_panels: int = 4000) -> ErrorEstimate:
    """Globally adaptive Gauss-Legendre integral of r^power * g(r) over (a, b).

    For a = 0 and power != 0 the first segment uses r = v^(1/(power+1)), which
    removes the endpoint singularity.  An infinite upper limit is mapped to
    (0, 1] through r = c + (1 - u)/u with c the last breakpoint (or a + scale).
    Non-convergence within ``max_panels`` raises DivergenceError.
    """
    if a < 0 or not np.isfinite(a):
        raise InvalidParameterError("lower limit must be finite and >= 0")
    if power <= -1.0 and a == 0.0:
        raise DivergenceError(f"r^{power} is not integrable at 0")
    if not b > a:
        if b == a:
            return ErrorEstimate(0.0, 0.0)
        raise InvalidParameterError("upper limit must exceed lower limit")
    rule = _resolve(rule)
    fine_rule = rule.refined()

    cuts = sorted({float(c) for c in breakpoints if a < c < b})
    if math.isinf(b):
        if not cuts:
            cuts = [a + scale]
        tail_start = cuts[-1]
        finite_edges = [a] + cuts
    else:
        tail_start = None
        finite_edges = [a] + cuts + [b]

    segments = []
    for i, (lo, hi) in enumerate(zip(finite_edges[:-1], finite_edges[1:])):
        if i == 0 and a == 0.0 and power != 0.0:
            segments.append(_Segment("pow", 0.0, 0.0, hi ** (power + 1.0), power))
        else:
            segments.append(_Segment("lin", 0.0, lo, hi, power))
    if tail_start is not None:
        segments.append(_Segment("tail", tail_start, 0.0, 1.0, power))

    def panel(seg, lo, hi):
        x1, w1 = rule.on_interval(lo, hi)
        x2, w2 = fine_rule.on_interval(lo, hi)
        v1, _ = seg.evaluate(g, x1, w1)
        v2, mag = seg.evaluate(g, x2, w2)
        return v2, abs(v2 - v1), mag

    heap = []
    counter = itertools.count()
    values = {}
    tot = err = mag = 0.0
    for seg in segments:
        val, e, m = panel(seg, seg.lo, seg.hi)
        key = next(counter)
        values[key] = (val, e, m)
        tot, err, mag = tot + val, err + e, mag + m
        heapq.heappush(heap, (-e, key, seg, seg.lo, seg.hi))

    eps = np.finfo(float).eps
    while True:
        if not (np.isfinite(tot) and np.isfinite(err)):
            raise DivergenceError("integral evaluated to a non-finite value")
        if err <= max(atol, rtol * abs(tot), 64 * eps * mag):
            final = math.fsum(v for v, _, _ in values.values())
            return ErrorEstimate(final, math.fsum(e for _, e, _ in values.values()))
        if len(values) >= max_panels:
            raise DivergenceError(
                f"no convergence after {max_panels} panels (value {tot:.6g}, error {err:.3g})")
        _, key, seg, lo, hi = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if seg.kind == "tail" and hi < 1e-250:
            raise DivergenceError("tail contribution not resolved within floating-point range")
        if not lo < mid < hi:
            raise DivergenceError("panel width reached machine resolution without convergence")
        val, e, m = values.pop(key)
        tot, err, mag = tot - val, err - e, mag - m
        for plo, phi in ((lo, mid), (mid, hi)):
            try:
                val, e, m = panel(seg, plo, phi)
            except EvaluationError as exc:
                raise DivergenceError(f"integrand unbounded under refinement: {exc}") from exc
            k2 = next(counter)
            values[k2] = (val, e, m)
            tot, err, mag = tot + val, err + e, mag + m
            heapq.heappush(heap, (-e, k2, seg, plo, phi))
