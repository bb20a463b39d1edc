"""Densities, one-body trial functions, ball masses and the maximal function."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.special import betainc, chdtr, chndtr, eval_hermite, jv
from scipy.special import beta as beta_fn

from .errors import (CapabilityError, DimensionMismatchError, InvalidParameterError,
                     MissingDerivativeError)
from .geometry import Cube
from .quadrature import ErrorEstimate, gauss_legendre, integrate_box, integrate_radial

EPS = np.finfo(float).eps


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _points(x, d):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and d == 1 and x.shape[0] != 1:
        x = x[:, None]
    x = np.atleast_2d(x)
    if x.shape[-1] != d:
        raise DimensionMismatchError(f"expected points of dimension {d}, got shape {x.shape}")
    return x


def _interval_prob(a, b):
    """P(a < Z < b) for standard normal Z, accurate in both tails."""
    from scipy.special import ndtr
    upper = a > 0
    return np.where(upper, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))


def _overlap(lo1, hi1, lo2, hi2):
    return np.maximum(0.0, np.minimum(hi1, hi2) - np.maximum(lo1, lo2))


# ---------------------------------------------------------------------------
# Densities


class Density:
    """Nonnegative integrable function on R^d."""

    dim: int

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    @property
    def total_mass(self) -> float:
        raise NotImplementedError

    def mass(self, Q: Cube) -> ErrorEstimate:
        raise NotImplementedError

    def masses(self, cubes: Sequence[Cube]) -> list[ErrorEstimate]:
        return [self.mass(Q) for Q in cubes]

    def ball_mass(self, u, R: float) -> ErrorEstimate:
        raise NotImplementedError

    def scaled(self, factor: float) -> "Density":
        raise NotImplementedError

    def _check_cube(self, Q):
        if Q.dim != self.dim:
            raise DimensionMismatchError(f"cube dimension {Q.dim} != density dimension {self.dim}")

    def _check_ball(self, u, R):
        if not R > 0:
            raise InvalidParameterError(f"ball radius must be positive, got {R}")
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if u.shape != (self.dim,):
            raise DimensionMismatchError(f"point dimension {u.shape} != {self.dim}")
        return u


class GaussianMixture(Density):
    """sum_i w_i N(c_i, s_i^2 I); each component integrates to its weight."""

    kind = "gaussian"

    def __init__(self, weights, centers, widths):
        self.weights = np.atleast_1d(np.asarray(weights, dtype=float))
        centers = np.asarray(centers, dtype=float)
        if centers.ndim == 1:
            centers = centers[None, :] if len(self.weights) == 1 else centers[:, None]
        self.centers = centers
        self.widths = np.atleast_1d(np.asarray(widths, dtype=float))
        n = len(self.weights)
        if self.centers.shape[0] != n or self.widths.shape != (n,):
            raise InvalidParameterError("weights, centers and widths must have matching lengths")
        if np.any(self.weights < 0) or np.any(self.widths <= 0):
            raise InvalidParameterError("weights must be >= 0 and widths > 0")
        self.dim = self.centers.shape[1]

    def __repr__(self):
        return f"GaussianMixture(n={len(self.weights)}, d={self.dim})"

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.weights))

    def __call__(self, x):
        x = _points(x, self.dim)
        out = np.zeros(len(x))
        for w, c, s in zip(self.weights, self.centers, self.widths):
            r2 = np.sum((x - c) ** 2, axis=1)
            out += w * (2 * math.pi * s * s) ** (-self.dim / 2) * np.exp(-0.5 * r2 / (s * s))
        return out

    def _box_masses(self, lo, hi):
        # lo, hi: (m, d) -> (m,)
        a = (lo[:, None, :] - self.centers[None]) / self.widths[None, :, None]
        b = (hi[:, None, :] - self.centers[None]) / self.widths[None, :, None]
        probs = np.prod(_interval_prob(a, b), axis=2)
        return probs @ self.weights, probs

    def masses(self, cubes):
        for Q in cubes:
            self._check_cube(Q)
        lo = np.array([Q.lo for Q in cubes]).reshape(len(cubes), self.dim)
        hi = np.array([Q.hi for Q in cubes]).reshape(len(cubes), self.dim)
        vals, _ = self._box_masses(lo, hi)
        err = 16 * self.dim * EPS * (vals + EPS * self.total_mass)
        return [ErrorEstimate(max(v, 0.0), e) for v, e in zip(vals, err)]

    def mass(self, Q):
        return self.masses([Q])[0]

    def ball_mass(self, u, R):
        u = self._check_ball(u, R)
        R = np.asarray(R, dtype=float)
        total = np.zeros(R.shape)
        for w, c, s in zip(self.weights, self.centers, self.widths):
            nc = float(np.sum((u - c) ** 2)) / (s * s)
            x = R ** 2 / (s * s)
            if nc == 0.0:
                total = total + w * chdtr(self.dim, x)
            else:
                total = total + w * chndtr(x, self.dim, nc)
        if total.ndim == 0:
            return ErrorEstimate(float(total), 1e-12 * self.total_mass)
        return total

    def scaled(self, factor):
        return GaussianMixture(self.weights * factor, self.centers, self.widths)

    def affine(self, shift, dilation, scale):
        """Density of x -> scale * rho(dilation * (x - shift))."""
        shift = np.broadcast_to(np.asarray(shift, dtype=float), (self.dim,))
        return GaussianMixture(self.weights * scale * dilation ** (-self.dim),
                               self.centers / dilation + shift, self.widths / dilation)

    def to_dict(self):
        return {"kind": "gaussian", "weights": self.weights.tolist(),
                "centers": self.centers.tolist(), "widths": self.widths.tolist()}


class BumpMixture(Density):
    """sum_i w_i (1 - |x - c_i|^2 / r_i^2)_+^mu_i."""

    kind = "bump"

    def __init__(self, weights, centers, radii, powers):
        self.weights = np.atleast_1d(np.asarray(weights, dtype=float))
        centers = np.asarray(centers, dtype=float)
        if centers.ndim == 1:
            centers = centers[None, :] if len(self.weights) == 1 else centers[:, None]
        self.centers = centers
        n = len(self.weights)
        self.radii = np.broadcast_to(np.asarray(radii, dtype=float), (n,)).copy()
        self.powers = np.broadcast_to(np.asarray(powers, dtype=float), (n,)).copy()
        if self.centers.shape[0] != n:
            raise InvalidParameterError("weights and centers must have matching lengths")
        if np.any(self.weights < 0) or np.any(self.radii <= 0) or np.any(self.powers < 0):
            raise InvalidParameterError("weights >= 0, radii > 0 and powers >= 0 required")
        self.dim = self.centers.shape[1]

    def __repr__(self):
        return f"BumpMixture(n={len(self.weights)}, d={self.dim})"

    def component_mass(self, i) -> float:
        d, r, mu = self.dim, self.radii[i], self.powers[i]
        return float(self.weights[i] * r ** d * sphere_area(d) / 2 * beta_fn(d / 2, mu + 1))

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.component_mass(i) for i in range(len(self.weights))))

    def __call__(self, x):
        x = _points(x, self.dim)
        out = np.zeros(len(x))
        for w, c, r, mu in zip(self.weights, self.centers, self.radii, self.powers):
            q = np.maximum(0.0, 1.0 - np.sum((x - c) ** 2, axis=1) / (r * r))
            out += w * np.where(q > 0, q ** mu, 0.0)
        return out

    def mass(self, Q):
        self._check_cube(Q)
        value, err = 0.0, 0.0
        for i, (c, r) in enumerate(zip(self.centers, self.radii)):
            lo = np.maximum(Q.lo, c - r)
            hi = np.minimum(Q.hi, c + r)
            if np.any(hi <= lo):
                continue
            if np.all(Q.lo <= c - r) and np.all(Q.hi >= c + r):
                value += self.component_mass(i)
                continue
            est = self._slab_mass(i, lo, hi)
            value += float(est)
            err += est.stderr
        return ErrorEstimate(max(value, 0.0), err + 8 * EPS * abs(value))

    def _slab_mass(self, i, lo, hi, order: int = 32) -> ErrorEstimate:
        """Mass of component i in the box [lo, hi], last coordinate integrated in closed form."""
        w, c, r, mu = self.weights[i], self.centers[i], self.radii[i], self.powers[i]
        half_beta = 0.5 * beta_fn(0.5, mu + 1)

        def odd_F(T):
            # int_0^T (1 - t^2)^mu dt for T in [-1, 1]
            return np.sign(T) * half_beta * betainc(0.5, mu + 1, np.minimum(T * T, 1.0))

        a, b = lo[-1] - c[-1], hi[-1] - c[-1]

        def inner(xp):
            rho2 = r * r - np.sum((xp - c[:-1]) ** 2, axis=1) if xp.shape[1] else np.full(len(xp), r * r)
            rho = np.sqrt(np.maximum(rho2, 0.0))
            safe = np.where(rho > 0, rho, 1.0)
            span = odd_F(np.clip(b / safe, -1, 1)) - odd_F(np.clip(a / safe, -1, 1))
            return np.where(rho > 0, w * safe ** (2 * mu + 1) / r ** (2 * mu) * span, 0.0)

        if self.dim == 1:
            return ErrorEstimate(float(inner(np.zeros((1, 0)))[0]), 0.0)
        return integrate_box(inner, lo[:-1], hi[:-1], order)

    def ball_mass(self, u, R):
        u = self._check_ball(u, R)
        value, err = 0.0, 0.0
        for i, (c, r, mu) in enumerate(zip(self.centers, self.radii, self.powers)):
            dist = float(np.sqrt(np.sum((u - c) ** 2)))
            if dist >= R + r:
                continue
            if dist + r <= R:
                value += self.component_mass(i)
            elif dist == 0.0:
                x = min(R / r, 1.0) ** 2
                value += self.component_mass(i) * float(betainc(self.dim / 2, mu + 1, x))
            else:
                part = BumpMixture(self.weights[i:i + 1], c[None], self.radii[i:i + 1], self.powers[i:i + 1])
                est = polar_ball_mass(part, u, R)
                value += float(est)
                err += est.stderr
        return ErrorEstimate(value, err + 8 * EPS * abs(value))

    def scaled(self, factor):
        return BumpMixture(self.weights * factor, self.centers, self.radii, self.powers)

    def affine(self, shift, dilation, scale):
        shift = np.broadcast_to(np.asarray(shift, dtype=float), (self.dim,))
        return BumpMixture(self.weights * scale, self.centers / dilation + shift,
                           self.radii / dilation, self.powers)

    def to_dict(self):
        return {"kind": "bump", "weights": self.weights.tolist(), "centers": self.centers.tolist(),
                "radii": self.radii.tolist(), "powers": self.powers.tolist()}


class IndicatorMixture(Density):
    """sum_i w_i 1_{Q_i} for cubes Q_i."""

    kind = "indicator"

    def __init__(self, weights, cubes):
        self.weights = np.atleast_1d(np.asarray(weights, dtype=float))
        self.cubes = list(cubes)
        if len(self.cubes) != len(self.weights) or not self.cubes:
            raise InvalidParameterError("need one cube per weight")
        if np.any(self.weights < 0):
            raise InvalidParameterError("weights must be >= 0")
        dims = {Q.dim for Q in self.cubes}
        if len(dims) != 1:
            raise DimensionMismatchError("all cubes must share a dimension")
        self.dim = dims.pop()

    def __repr__(self):
        return f"IndicatorMixture(n={len(self.cubes)}, d={self.dim})"

    @property
    def total_mass(self):
        return float(math.fsum(w * Q.volume for w, Q in zip(self.weights, self.cubes)))

    def __call__(self, x):
        x = _points(x, self.dim)
        out = np.zeros(len(x))
        for w, Q in zip(self.weights, self.cubes):
            inside = np.all((x >= Q.lo) & (x <= Q.hi), axis=1)
            out += w * inside
        return out

    def mass(self, Q):
        self._check_cube(Q)
        value = math.fsum(w * float(np.prod(_overlap(Q.lo, Q.hi, P.lo, P.hi)))
                          for w, P in zip(self.weights, self.cubes))
        return ErrorEstimate(value, 4 * self.dim * EPS * abs(value))

    def ball_mass(self, u, R):
        u = self._check_ball(u, R)
        parts = [ball_box_volume(u, R, P.lo, P.hi) for P in self.cubes]
        value = math.fsum(w * float(p) for w, p in zip(self.weights, parts))
        err = math.fsum(w * p.stderr for w, p in zip(self.weights, parts))
        return ErrorEstimate(value, err + 8 * EPS * abs(value))

    def scaled(self, factor):
        return IndicatorMixture(self.weights * factor, self.cubes)

    def to_dict(self):
        return {"kind": "indicator", "weights": self.weights.tolist(),
                "cubes": [Q.to_dict() for Q in self.cubes]}


class GridSampled(Density):
    """Multilinear interpolation of node samples on a cube, clamped at zero and zero outside."""

    kind = "grid"

    def __init__(self, cube: Cube, samples):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != cube.dim or min(samples.shape) < 2:
            raise InvalidParameterError("samples must be a d-dimensional array with >= 2 nodes per axis")
        self.cube = cube
        self.samples = samples
        self.dim = cube.dim
        self.axes = [np.linspace(a, b, n) for a, b, n in zip(cube.lo, cube.hi, samples.shape)]
        self._interp = RegularGridInterpolator(self.axes, samples, method="linear",
                                               bounds_error=False, fill_value=0.0)

    def __repr__(self):
        return f"GridSampled(shape={self.samples.shape})"

    def __call__(self, x):
        x = _points(x, self.dim)
        return np.maximum(self._interp(x), 0.0)

    def _box_rule(self, lo, hi):
        """Composite two-point Gauss rule with breakpoints at grid nodes."""
        g2 = gauss_legendre(2)
        axes, wax = [], []
        for a, b, nodes in zip(lo, hi, self.axes):
            cuts = np.concatenate(([a], nodes[(nodes > a) & (nodes < b)], [b]))
            xs, ws = [], []
            for s, t in zip(cuts[:-1], cuts[1:]):
                x, w = g2.on_interval(s, t)
                xs.append(x)
                ws.append(w)
            axes.append(np.concatenate(xs))
            wax.append(np.concatenate(ws))
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        w = wax[0]
        for extra in wax[1:]:
            w = np.multiply.outer(w, extra)
        return pts, w.ravel()

    def mass(self, Q):
        self._check_cube(Q)
        lo = np.maximum(Q.lo, self.cube.lo)
        hi = np.minimum(Q.hi, self.cube.hi)
        if np.any(hi <= lo):
            return ErrorEstimate(0.0, 0.0)
        pts, w = self._box_rule(lo, hi)
        value = float(np.dot(w, self(pts)))
        return ErrorEstimate(value, 16 * EPS * np.dot(np.abs(w), np.abs(self(pts))))

    @property
    def total_mass(self):
        return float(self.mass(self.cube))

    def ball_mass(self, u, R):
        u = self._check_ball(u, R)
        return polar_ball_mass(self, u, R)

    def scaled(self, factor):
        return GridSampled(self.cube, self.samples * factor)

    def to_dict(self):
        return {"kind": "grid", "cube": self.cube.to_dict(), "shape": list(self.samples.shape)}


# ---------------------------------------------------------------------------
# Ball integrals


def _sphere_rule(d, n):
    """Directions (m, d) and weights summing to the sphere area."""
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        m = 2 * n
        phi = 2 * math.pi * np.arange(m) / m
        return np.stack([np.cos(phi), np.sin(phi)], axis=1), np.full(m, 2 * math.pi / m)
    if d == 3:
        ct, wt = gauss_legendre(n).nodes, gauss_legendre(n).weights
        m = 2 * n
        phi = 2 * math.pi * np.arange(m) / m
        st = np.sqrt(1 - ct ** 2)
        dirs = np.stack([np.outer(st, np.cos(phi)), np.outer(st, np.sin(phi)),
                         np.outer(ct, np.ones(m))], axis=-1).reshape(-1, 3)
        return dirs, np.outer(wt, np.full(m, 2 * math.pi / m)).ravel()
    raise CapabilityError("polar quadrature implemented for d <= 3")


def _polar_sum(f, u, R, d, n):
    t, wt = gauss_legendre(n).on_interval(0.0, R)
    dirs, wd = _sphere_rule(d, n)
    pts = u[None, None, :] + t[:, None, None] * dirs[None, :, :]
    vals = f(pts.reshape(-1, d)).reshape(len(t), len(wd))
    return float(np.dot(wt * t ** (d - 1), vals @ wd))


def polar_ball_mass(f, u, R, order: int = 32) -> ErrorEstimate:
    """Polar-coordinate quadrature of f over B(u, R), error from orders n and 2n."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    d = len(u)
    coarse = _polar_sum(f, u, R, d, order)
    fine = _polar_sum(f, u, R, d, 2 * order)
    return ErrorEstimate(fine, abs(fine - coarse))


def _critical_radii(u, lo, hi):
    """Radii at which the ball-box volume is not smooth as a function of radius."""
    options = [(0.0, abs(ui - a), abs(ui - b)) for ui, a, b in zip(u, lo, hi)]
    radii = set()
    for combo in np.array(np.meshgrid(*options, indexing="ij")).reshape(len(u), -1).T:
        r = float(np.sqrt(np.sum(combo ** 2)))
        if r > 0:
            radii.add(r)
    return sorted(radii)


def _ball_box(u, R, lo, hi, n):
    d = len(u)
    if d == 1:
        return max(0.0, min(u[0] + R, hi[0]) - max(u[0] - R, lo[0]))
    gap = np.maximum(0.0, np.maximum(lo - u, u - hi))
    if np.sum(gap ** 2) >= R * R:
        return 0.0
    far = np.maximum(np.abs(u - lo), np.abs(u - hi))
    if np.sum(far ** 2) <= R * R:
        return float(np.prod(hi - lo))
    if np.all(u - R >= lo) and np.all(u + R <= hi):
        return ball_volume(d) * R ** d
    # slice along the first axis with x0 = u0 + R sin(phi)
    p_lo = math.asin(min(1.0, max(-1.0, (lo[0] - u[0]) / R)))
    p_hi = math.asin(min(1.0, max(-1.0, (hi[0] - u[0]) / R)))
    if p_hi <= p_lo:
        return 0.0
    cuts = {p_lo, p_hi}
    for rc in _critical_radii(u[1:], lo[1:], hi[1:]):
        if rc < R:
            a = math.acos(rc / R)
            cuts.update((a, -a))
    cuts = sorted(c for c in cuts if p_lo <= c <= p_hi)
    rule = gauss_legendre(n)
    value = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        phis, ws = rule.on_interval(a, b)
        for phi, w in zip(phis, ws):
            rho = R * math.cos(phi)
            if rho <= 0:
                continue
            value += w * rho * _ball_box(u[1:], rho, lo[1:], hi[1:], n)
    return value


def ball_box_volume(u, R, lo, hi, order: int = 24) -> ErrorEstimate:
    """Volume of B(u, R) intersected with the box [lo, hi]."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    coarse = _ball_box(u, R, lo, hi, order)
    if len(u) == 1:
        return ErrorEstimate(coarse, 0.0)
    fine = _ball_box(u, R, lo, hi, order + 8)
    return ErrorEstimate(fine, abs(fine - coarse))


def ball_mass(rho: Density, u, R: float) -> ErrorEstimate:
    """Mass of rho in the ball B(u, R)."""
    return rho.ball_mass(u, R)


def mass(rho: Density, Q: Cube) -> ErrorEstimate:
    return rho.mass(Q)


def ball_average(rho: Density, u, R: float) -> float:
    d = rho.dim
    return float(rho.ball_mass(u, R)) / (ball_volume(d) * R ** d)


def geometric_grid(r_min: float, r_max: float, num: int = 64) -> np.ndarray:
    if num < 1 or not 0 < r_min <= r_max:
        raise InvalidParameterError("grid needs num >= 1 and 0 < r_min <= r_max")
    return np.geomspace(r_min, r_max, num)


def maximal_function(rho: Density, u, r_grid=None, *, r_min: float = 1e-3, r_max: float = 1e3,
                     num: int = 64, refine_steps: int = 40) -> float:
    """Grid lower bound of sup_R (ball average of rho around u), refined once near the argmax."""
    if r_grid is None:
        r_grid = geometric_grid(r_min, r_max, num)
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.size == 0:
        raise InvalidParameterError("empty radius grid")
    averages = np.array([ball_average(rho, u, R) for R in r_grid])
    i = int(np.argmax(averages))
    best = float(averages[i])
    lo = math.log(r_grid[max(i - 1, 0)])
    hi = math.log(r_grid[min(i + 1, len(r_grid) - 1)])
    if hi > lo:
        f = lambda t: ball_average(rho, u, math.exp(t))
        a, b = lo, hi
        invphi = (math.sqrt(5) - 1) / 2
        c, e = b - invphi * (b - a), a + invphi * (b - a)
        fc, fe = f(c), f(e)
        for _ in range(refine_steps):
            if fc > fe:
                b, e, fe = e, c, fc
                c = b - invphi * (b - a)
                fc = f(c)
            else:
                a, c, fc = c, e, fe
                e = a + invphi * (b - a)
                fe = f(e)
        best = max(best, fc, fe)
    return best


# ---------------------------------------------------------------------------
# Trial functions


def bessel_ratio(mu: float, z):
    """z^(-mu) J_mu(z), continuous at z = 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    big = jv(mu, zs) * zs ** (-mu)
    series = (0.5 ** mu / math.gamma(mu + 1)) * (1 - z * z / (4 * (mu + 1))
                                                 + z ** 4 / (32 * (mu + 1) * (mu + 2)))
    return np.where(small, series, big)


def _hermite_factor(n, y, w):
    """n-th derivative of exp(-y^2 / (2 w^2)) divided by that exponential."""
    if n == 0:
        return np.ones_like(y)
    a = 1.0 / (w * math.sqrt(2.0))
    return (-a) ** n * eval_hermite(n, a * y)


class TrialFunction:
    """Real one-body function u on R^d."""

    dim: int

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, alpha, x) -> np.ndarray:
        raise MissingDerivativeError(f"{type(self).__name__} provides no derivatives")

    def l2_norm_sq(self) -> float:
        raise CapabilityError(f"{type(self).__name__} has no closed-form L2 norm")

    def lp_integral(self, p: float) -> float:
        raise CapabilityError(f"{type(self).__name__} has no closed-form L^p integral")

    def fourier_abs_sq(self, p) -> np.ndarray:
        raise CapabilityError(
            f"{type(self).__name__} has no analytic Fourier transform; use cube semi-norms instead")

    def fourier_scale(self) -> float:
        """Frequency scale used to place quadrature breakpoints."""
        return 1.0

    def fourier_breakpoints(self) -> np.ndarray:
        """Radial frequencies where the Fourier integrand changes character."""
        return self.fourier_scale() * np.array([0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0])

    def density(self) -> Density:
        raise CapabilityError(f"{type(self).__name__} does not induce an analytic density")

    def power_density(self, q: float) -> Density:
        raise CapabilityError(f"{type(self).__name__} does not induce an analytic |u|^q density")

    def gradient_power_integral(self, q: float) -> ErrorEstimate:
        raise CapabilityError(f"{type(self).__name__} has no radial gradient integral")

    def normalized(self) -> "TrialFunction":
        n2 = self.l2_norm_sq()
        if not n2 > 0:
            raise InvalidParameterError("cannot normalize the zero function")
        return self.rescaled(1.0 / math.sqrt(n2))

    def rescaled(self, factor: float) -> "TrialFunction":
        return ScaledProfile(self, np.zeros(self.dim), 1.0, factor)

    def dilate(self, lam: float, normalized: bool = True) -> "TrialFunction":
        """x -> lam^(d/2) u(lam x), or u(lam x) when normalized is False."""
        amp = lam ** (self.dim / 2) if normalized else 1.0
        return ScaledProfile(self, np.zeros(self.dim), lam, amp)

    def translate(self, shift) -> "TrialFunction":
        return ScaledProfile(self, np.asarray(shift, dtype=float), 1.0, 1.0)


class Gaussian(TrialFunction):
    """u(x) = A exp(-|x - c|^2 / (2 w^2)); A defaults to the L2-normalizing value."""

    def __init__(self, center, width: float, amplitude: float | None = None):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.dim = len(self.center)
        if not width > 0:
            raise InvalidParameterError("width must be positive")
        self.width = float(width)
        self.amplitude = (math.pi * width * width) ** (-self.dim / 4) if amplitude is None else float(amplitude)

    def __repr__(self):
        return f"Gaussian(center={self.center.tolist()}, width={self.width}, amplitude={self.amplitude})"

    def __call__(self, x):
        x = _points(x, self.dim)
        r2 = np.sum((x - self.center) ** 2, axis=1)
        return self.amplitude * np.exp(-0.5 * r2 / self.width ** 2)

    def derivative(self, alpha, x):
        x = _points(x, self.dim)
        out = self(x)
        for i, n in enumerate(alpha):
            if n:
                out = out * _hermite_factor(n, x[:, i] - self.center[i], self.width)
        return out

    def l2_norm_sq(self):
        return self.amplitude ** 2 * (math.pi * self.width ** 2) ** (self.dim / 2)

    def lp_integral(self, p):
        return abs(self.amplitude) ** p * (2 * math.pi * self.width ** 2 / p) ** (self.dim / 2)

    def fourier_abs_sq(self, p):
        p = np.asarray(p, dtype=float)
        return self.amplitude ** 2 * self.width ** (2 * self.dim) * np.exp(-(self.width * p) ** 2)

    def fourier_scale(self):
        return 1.0 / self.width

    def density(self):
        return GaussianMixture([self.l2_norm_sq()], self.center[None], [self.width / math.sqrt(2)])

    def power_density(self, q):
        return GaussianMixture([self.lp_integral(q)], self.center[None], [self.width / math.sqrt(q)])

    def gradient_power_integral(self, q):
        d, w, A = self.dim, self.width, abs(self.amplitude)
        prefactor = sphere_area(d) * A ** q * w ** (-2 * q)
        est = integrate_radial(lambda r: np.exp(-0.5 * q * r * r / (w * w)), 0.0, math.inf,
                               power=q + d - 1, scale=w)
        return est.scaled(prefactor)

    def rescaled(self, factor):
        return Gaussian(self.center, self.width, self.amplitude * factor)

    def dilate(self, lam, normalized=True):
        amp = lam ** (self.dim / 2) if normalized else 1.0
        return Gaussian(self.center / lam, self.width / lam, self.amplitude * amp)

    def translate(self, shift):
        return Gaussian(self.center + np.asarray(shift, dtype=float), self.width, self.amplitude)

    def to_dict(self):
        return {"kind": "gauss", "center": self.center.tolist(), "width": self.width,
                "amplitude": self.amplitude}


class BumpCompact(TrialFunction):
    """u(x) = A (1 - |x - c|^2 / r^2)_+^nu; A defaults to the L2-normalizing value."""

    def __init__(self, center, radius: float, power: float = 4.0, amplitude: float | None = None):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.dim = len(self.center)
        if not radius > 0 or not power > 0:
            raise InvalidParameterError("radius and power must be positive")
        self.radius = float(radius)
        self.power = float(power)
        if amplitude is None:
            amplitude = 1.0 / math.sqrt(self._unit_lp(2.0))
        self.amplitude = float(amplitude)

    def __repr__(self):
        return (f"BumpCompact(center={self.center.tolist()}, radius={self.radius}, "
                f"power={self.power}, amplitude={self.amplitude})")

    def _unit_lp(self, p):
        d = self.dim
        return self.radius ** d * sphere_area(d) / 2 * beta_fn(d / 2, self.power * p + 1)

    def __call__(self, x):
        x = _points(x, self.dim)
        q = np.maximum(0.0, 1.0 - np.sum((x - self.center) ** 2, axis=1) / self.radius ** 2)
        return self.amplitude * np.where(q > 0, q ** self.power, 0.0)

    def _phi(self, k, q):
        nu = self.power
        coef = 1.0
        for j in range(k):
            coef *= nu - j
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(q > 0, coef * np.power(np.where(q > 0, q, 1.0), nu - k), 0.0)
        return val

    def derivative(self, alpha, x):
        alpha = tuple(int(a) for a in alpha)
        order = sum(alpha)
        x = _points(x, self.dim)
        y = x - self.center
        r2 = self.radius ** 2
        q = np.maximum(0.0, 1.0 - np.sum(y ** 2, axis=1) / r2)
        A = self.amplitude
        if order == 0:
            return A * self._phi(0, q)
        if order == 1:
            i = alpha.index(1)
            return A * self._phi(1, q) * (-2.0 * y[:, i] / r2)
        if order == 2:
            idx = [i for i, a in enumerate(alpha) for _ in range(a)]
            i, j = idx
            out = self._phi(2, q) * 4.0 * y[:, i] * y[:, j] / r2 ** 2
            if i == j:
                out = out - 2.0 * self._phi(1, q) / r2
            return A * out
        raise MissingDerivativeError("bump derivatives are implemented up to order 2")

    def l2_norm_sq(self):
        return self.amplitude ** 2 * self._unit_lp(2.0)

    def lp_integral(self, p):
        return abs(self.amplitude) ** p * self._unit_lp(p)

    def fourier_abs_sq(self, p):
        d, r, nu = self.dim, self.radius, self.power
        mu = d / 2 + nu
        amp = self.amplitude * r ** d * 2 ** nu * math.gamma(nu + 1)
        return (amp * bessel_ratio(mu, r * np.asarray(p, dtype=float))) ** 2

    def fourier_scale(self):
        return 1.0 / self.radius

    def fourier_breakpoints(self):
        # the transform oscillates with period about pi / radius
        base = super().fourier_breakpoints()
        return np.union1d(base, math.pi / self.radius * np.arange(1, 200))

    def density(self):
        return BumpMixture([self.amplitude ** 2], self.center[None], [self.radius], [2 * self.power])

    def power_density(self, q):
        return BumpMixture([abs(self.amplitude) ** q], self.center[None], [self.radius], [q * self.power])

    def gradient_power_integral(self, q):
        d, r, nu, A = self.dim, self.radius, self.power, abs(self.amplitude)
        prefactor = sphere_area(d) * (A * 2 * nu / r ** 2) ** q
        expo = q * (nu - 1)
        est = integrate_radial(lambda t: np.maximum(0.0, 1 - (t / r) ** 2) ** expo, 0.0, r,
                               power=q + d - 1)
        return est.scaled(prefactor)

    def rescaled(self, factor):
        return BumpCompact(self.center, self.radius, self.power, self.amplitude * factor)

    def dilate(self, lam, normalized=True):
        amp = lam ** (self.dim / 2) if normalized else 1.0
        return BumpCompact(self.center / lam, self.radius / lam, self.power, self.amplitude * amp)

    def translate(self, shift):
        return BumpCompact(self.center + np.asarray(shift, dtype=float), self.radius, self.power,
                           self.amplitude)

    def to_dict(self):
        return {"kind": "bump", "center": self.center.tolist(), "radius": self.radius,
                "power": self.power, "amplitude": self.amplitude}


class ScaledProfile(TrialFunction):
    """x -> amplitude * base(dilation * (x - shift))."""

    def __init__(self, base: TrialFunction, shift, dilation: float = 1.0, amplitude: float = 1.0):
        if not dilation > 0:
            raise InvalidParameterError("dilation must be positive")
        self.base = base
        self.dim = base.dim
        self.shift = np.broadcast_to(np.asarray(shift, dtype=float), (self.dim,)).copy()
        self.dilation = float(dilation)
        self.amplitude = float(amplitude)

    def __repr__(self):
        return (f"ScaledProfile({self.base!r}, shift={self.shift.tolist()}, "
                f"dilation={self.dilation}, amplitude={self.amplitude})")

    def _inner(self, x):
        return self.dilation * (_points(x, self.dim) - self.shift)

    def __call__(self, x):
        return self.amplitude * self.base(self._inner(x))

    def derivative(self, alpha, x):
        order = sum(alpha)
        return self.amplitude * self.dilation ** order * self.base.derivative(alpha, self._inner(x))

    def l2_norm_sq(self):
        return self.amplitude ** 2 * self.dilation ** (-self.dim) * self.base.l2_norm_sq()

    def lp_integral(self, p):
        return abs(self.amplitude) ** p * self.dilation ** (-self.dim) * self.base.lp_integral(p)

    def fourier_abs_sq(self, p):
        lam = self.dilation
        return self.amplitude ** 2 * lam ** (-2 * self.dim) * self.base.fourier_abs_sq(np.asarray(p) / lam)

    def fourier_scale(self):
        return self.base.fourier_scale() * self.dilation

    def fourier_breakpoints(self):
        return self.base.fourier_breakpoints() * self.dilation

    def density(self):
        base = self.base.density()
        if not hasattr(base, "affine"):
            raise CapabilityError("base density does not support affine maps")
        return base.affine(self.shift, self.dilation, self.amplitude ** 2)

    def power_density(self, q):
        base = self.base.power_density(q)
        return base.affine(self.shift, self.dilation, abs(self.amplitude) ** q)

    def gradient_power_integral(self, q):
        est = self.base.gradient_power_integral(q)
        return est.scaled(abs(self.amplitude) ** q * self.dilation ** (q - self.dim))

    def rescaled(self, factor):
        return ScaledProfile(self.base, self.shift, self.dilation, self.amplitude * factor)

    def dilate(self, lam, normalized=True):
        amp = lam ** (self.dim / 2) if normalized else 1.0
        return ScaledProfile(self.base, self.shift / lam, self.dilation * lam, self.amplitude * amp)

    def translate(self, shift):
        return ScaledProfile(self.base, self.shift + np.asarray(shift, dtype=float), self.dilation,
                             self.amplitude)

    def to_dict(self):
        return {"kind": "scaled", "base": getattr(self.base, "to_dict", lambda: repr(self.base))(),
                "shift": self.shift.tolist(), "dilation": self.dilation, "amplitude": self.amplitude}


_FD_FIRST = (np.array([-2, -1, 1, 2]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0)
_FD_SECOND = (np.array([-2, -1, 0, 1, 2]), np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0)


class Custom(TrialFunction):
    """User-supplied function, optionally with derivatives.

    Without a derivative callable, derivatives of order <= 2 per axis come from
    fourth-order central differences when ``fd_step`` is given.
    """

    def __init__(self, fn: Callable, dim: int, derivative: Callable | None = None,
                 fd_step: float | None = None, l2: float | None = None, name: str = "custom"):
        self.fn = fn
        self.dim = int(dim)
        self._derivative = derivative
        self.fd_step = fd_step
        self._l2 = l2
        self.name = name

    def __repr__(self):
        return f"Custom({self.name}, d={self.dim})"

    def __call__(self, x):
        x = _points(x, self.dim)
        return np.broadcast_to(np.asarray(self.fn(x), dtype=float), (len(x),))

    def derivative(self, alpha, x):
        alpha = tuple(int(a) for a in alpha)
        x = _points(x, self.dim)
        if sum(alpha) == 0:
            return self(x)
        if self._derivative is not None:
            return np.broadcast_to(np.asarray(self._derivative(alpha, x), dtype=float), (len(x),))
        if self.fd_step is None:
            raise MissingDerivativeError(f"{self.name}: no derivative callable and no finite-difference step")
        if max(alpha) > 2:
            raise MissingDerivativeError("finite differences support order <= 2 per axis")
        h = self.fd_step
        stencils = []
        for a in alpha:
            if a == 0:
                stencils.append((np.array([0]), np.array([1.0]), 1.0))
            elif a == 1:
                stencils.append((*_FD_FIRST, h))
            else:
                stencils.append((*_FD_SECOND, h * h))
        out = np.zeros(len(x))
        offsets = [s[0] for s in stencils]
        coeffs = [s[1] for s in stencils]
        scale = np.prod([s[2] for s in stencils])
        for idx in np.ndindex(*[len(o) for o in offsets]):
            shift = np.array([offsets[i][j] for i, j in enumerate(idx)], dtype=float) * h
            c = np.prod([coeffs[i][j] for i, j in enumerate(idx)])
            out += c * self(x + shift)
        return out / scale

    def l2_norm_sq(self):
        if self._l2 is None:
            raise CapabilityError(f"{self.name}: L2 norm not supplied")
        return self._l2
