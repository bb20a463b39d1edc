"""Fractional semi-norms, Riesz energies, Hardy functionals and ball-kernel representations."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import betainc, ive

from .density import (BumpMixture, Density, GaussianMixture, GridSampled, IndicatorMixture,
                      TrialFunction, ball_volume, bessel_ratio, sphere_area)
from .errors import (CapabilityError, DivergenceError, InvalidParameterError,
                     NumericalConsistencyError, PartitionOfUnityError)
from .geometry import Cube
from .quadrature import (ErrorEstimate, _jacobi_01, gauss_legendre, integrate_cube,
                         integrate_radial, integrate_singular_pair, tensor_nodes, total)


def fractional_constant(d: int, sigma: float) -> float:
    """Normalisation c_{d,sigma} of the Gagliardo form of (-Delta)^sigma."""
    if not 0.0 < sigma < 1.0:
        raise InvalidParameterError(f"sigma must lie in (0, 1), got {sigma}")
    return 2 ** (2 * sigma - 1) * math.pi ** (-d / 2) * math.gamma((d + 2 * sigma) / 2) / abs(math.gamma(-sigma))


def hardy_constant(d: int, s: float) -> float:
    """Sharp constant of the fractional Hardy inequality."""
    if not 0.0 < s < d / 2:
        raise InvalidParameterError(f"need 0 < s < d/2, got s={s}, d={d}")
    return 2 ** (2 * s) * (math.gamma((d + 2 * s) / 4) / math.gamma((d - 2 * s) / 4)) ** 2


@dataclass(frozen=True)
class SemiNormParams:
    """Split s = m + sigma together with the multi-index table for |alpha| = m."""

    s: float
    d: int
    m: int = field(init=False)
    sigma: float = field(init=False)
    multi_indices: tuple = field(init=False)

    def __post_init__(self):
        if not self.s > 0:
            raise InvalidParameterError("s must be positive")
        m = int(math.floor(self.s + 1e-12))
        sigma = self.s - m
        if abs(sigma) < 1e-12:
            sigma = 0.0
        table = []
        for alpha in itertools.product(range(m + 1), repeat=self.d):
            if sum(alpha) == m:
                weight = math.factorial(m) // math.prod(math.factorial(a) for a in alpha)
                table.append((alpha, weight))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "multi_indices", tuple(table))


def hs_seminorm_cube(u: TrialFunction, Q: Cube, s: float, rule=None) -> ErrorEstimate:
    """Squared H^s semi-norm of u restricted to the cube Q."""
    params = SemiNormParams(s, Q.dim)
    parts = []
    for alpha, weight in params.multi_indices:
        if params.sigma == 0.0:
            f = lambda x, a=alpha: u.derivative(a, x) ** 2
            parts.append(integrate_cube(f, Q, rule).scaled(weight))
        else:
            G = lambda x, y, a=alpha: (u.derivative(a, x) - u.derivative(a, y)) ** 2
            est = integrate_singular_pair(G, Q, params.sigma, rule)
            parts.append(est.scaled(weight * fractional_constant(Q.dim, params.sigma)))
    return total(parts)


def _radial_breaks(scale: float):
    return scale * np.array([0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0])


def hs_fullspace(u: TrialFunction, s: float, rtol: float = 1e-11) -> ErrorEstimate:
    """<u, (-Delta)^s u> as a radial integral of |p|^(2s) |u^(p)|^2."""
    if s < 0:
        raise InvalidParameterError("s must be nonnegative")
    d = u.dim
    u.fourier_abs_sq(np.array([1.0]))  # raises CapabilityError for unsupported families
    est = integrate_radial(u.fourier_abs_sq, 0.0, math.inf, power=2 * s + d - 1,
                           breakpoints=u.fourier_breakpoints(), rtol=rtol, max_panels=20000)
    return est.scaled(sphere_area(d))


# ---------------------------------------------------------------------------
# Riesz energies


def _check_gamma(gam, d):
    if gam >= d:
        raise DivergenceError(f"Riesz energy diverges for gamma >= d (gamma={gam}, d={d})")
    if not gam > 0:
        raise InvalidParameterError("gamma must be positive")


def gaussian_inverse_moment(d: int, offset: float, var: float, gam: float) -> ErrorEstimate:
    """E|Z|^(-gam) for Z ~ N(m, var I_d) with |m| = offset."""
    tau2 = float(var)
    base = (2 * tau2) ** (-gam / 2) * math.gamma((d - gam) / 2) / math.gamma(d / 2)
    if offset == 0.0:
        return ErrorEstimate(base, 0.0)
    m = float(offset)
    tau = math.sqrt(tau2)
    norm = sphere_area(d) * (2 * math.pi * tau2) ** (-d / 2) * math.gamma(d / 2)
    nu = d / 2 - 1

    def g(r):
        z = r * m / tau2
        # exp(-(r^2 + m^2)/(2 tau^2)) * I_nu(z) written with the scaled Bessel function
        return np.exp(-0.5 * (r - m) ** 2 / tau2) * (z / 2) ** (-nu) * ive(nu, z)

    breaks = [max(m - 8 * tau, 0.0), m, m + 8 * tau] if m > 8 * tau else [tau, m + 8 * tau]
    est = integrate_radial(g, 0.0, math.inf, power=d - 1 - gam, breakpoints=breaks, scale=tau)
    return est.scaled(norm)


def riesz_kernel_constant(d: int, gam: float) -> float:
    """Factor K with  |x|^(-gam) paired through  K |p|^(gam - d)  on the unitary Fourier side."""
    return 2 ** (d - gam) * math.pi ** (d / 2) * math.gamma((d - gam) / 2) / math.gamma(gam / 2)


def angular_average(d: int, z):
    """Average of exp(i p.D) over directions, as a function of z = |p||D|."""
    return math.gamma(d / 2) * 2 ** (d / 2 - 1) * bessel_ratio(d / 2 - 1, z)


def fourier_pair_energy(fi, fj, dist: float, d: int, gam: float, scale: float,
                        rtol: float = 1e-10) -> ErrorEstimate:
    """Riesz interaction of two radial densities given their unitary Fourier profiles."""
    K = riesz_kernel_constant(d, gam)
    if dist > 0:
        g = lambda p: fi(p) * fj(p) * angular_average(d, p * dist)
        top = 80.0 * scale
        step = math.pi / max(dist, 1.0 / scale)
        count = min(int(top / step), 20000)
        breaks = np.concatenate((_radial_breaks(scale), step * np.arange(1, count + 1)))
    else:
        g = lambda p: fi(p) * fj(p)
        breaks = _radial_breaks(scale)
    est = integrate_radial(g, 0.0, math.inf, power=gam - 1, breakpoints=breaks, rtol=rtol,
                           max_panels=200000)
    return est.scaled(K * sphere_area(d))


def _bump_profile(d, w, r, mu):
    amp = w * r ** d * 2 ** mu * math.gamma(mu + 1)
    return lambda p: amp * bessel_ratio(d / 2 + mu, r * np.asarray(p, dtype=float))


def _bump_riesz(rho: BumpMixture, gam: float) -> ErrorEstimate:
    d = rho.dim
    profiles = [_bump_profile(d, w, r, mu) for w, r, mu in zip(rho.weights, rho.radii, rho.powers)]
    parts = []
    n = len(profiles)
    for i in range(n):
        for j in range(i, n):
            dist = float(np.linalg.norm(rho.centers[i] - rho.centers[j]))
            scale = 1.0 / min(rho.radii[i], rho.radii[j])
            e = fourier_pair_energy(profiles[i], profiles[j], dist, d, gam, scale)
            parts.append(e if i == j else e.scaled(2.0))
    return total(parts)


def _gaussian_riesz(rho: GaussianMixture, gam: float) -> ErrorEstimate:
    parts = []
    n = len(rho.weights)
    for i in range(n):
        for j in range(i, n):
            dist = float(np.linalg.norm(rho.centers[i] - rho.centers[j]))
            var = rho.widths[i] ** 2 + rho.widths[j] ** 2
            e = gaussian_inverse_moment(rho.dim, dist, var, gam)
            factor = rho.weights[i] * rho.weights[j] * (1.0 if i == j else 2.0)
            parts.append(e.scaled(factor))
    return total(parts)


def _axis_overlap_breaks(la, ha, lb, hb):
    pts = sorted({la - hb, ha - hb, la - lb, ha - lb, 0.0})
    return [p for p in pts if la - hb <= p <= ha - lb]


def _overlap_length(z, la, ha, lb, hb):
    return np.maximum(0.0, np.minimum(hb, ha - z) - np.maximum(lb, la - z))


def _box_pair_energy(lo_a, hi_a, lo_b, hi_b, gam, n):
    """Integral of |x - y|^(-gam) over x in box a, y in box b."""
    d = len(lo_a)
    breaks = [_axis_overlap_breaks(lo_a[i], hi_a[i], lo_b[i], hi_b[i]) for i in range(d)]
    rule = gauss_legendre(n)
    t01, wt01 = _jacobi_01(n, d - 1 - gam)
    if d > 1:
        eta, weta = tensor_nodes(np.zeros(d - 1), np.ones(d - 1), rule)
    else:
        eta, weta = np.zeros((1, 0)), np.ones(1)

    def weight(z):
        out = np.ones(len(z))
        for i in range(d):
            out *= _overlap_length(z[:, i], lo_a[i], hi_a[i], lo_b[i], hi_b[i])
        return out

    value = 0.0
    for cell in itertools.product(*[list(zip(b[:-1], b[1:])) for b in breaks]):
        lo = np.array([c[0] for c in cell])
        hi = np.array([c[1] for c in cell])
        if np.any(hi <= lo):
            continue
        at_corner = np.all((lo == 0.0) | (hi == 0.0))
        if not at_corner:
            pts, w = tensor_nodes(lo, hi, rule)
            value += float(np.dot(w, np.sum(pts ** 2, axis=1) ** (-gam / 2) * weight(pts)))
            continue
        # origin is a corner: scaled Duffy pyramids with radial Jacobi weight
        sign = np.where(hi > 0, 1.0, -1.0)
        ell = hi - lo
        for j in range(d):
            e = np.empty((len(eta), d))
            e[:, j] = 1.0
            others = [i for i in range(d) if i != j]
            if others:
                e[:, others] = eta
            enorm = np.sqrt(np.sum((ell * e) ** 2, axis=1)) ** (-gam)
            for t, wt in zip(t01, wt01):
                z = sign * ell * t * e
                value += wt * float(np.dot(weta, enorm * weight(z))) * np.prod(ell)
    return value


def _indicator_riesz(rho: IndicatorMixture, gam: float, order: int = 24) -> ErrorEstimate:
    parts = []
    cubes = rho.cubes
    for i in range(len(cubes)):
        for j in range(i, len(cubes)):
            a, b = cubes[i], cubes[j]
            coarse = _box_pair_energy(a.lo, a.hi, b.lo, b.hi, gam, order)
            fine = _box_pair_energy(a.lo, a.hi, b.lo, b.hi, gam, order + 4)
            factor = rho.weights[i] * rho.weights[j] * (1.0 if i == j else 2.0)
            parts.append(ErrorEstimate(fine, abs(fine - coarse)).scaled(factor))
    return total(parts)


def riesz_energy(rho: Density, gam: float) -> ErrorEstimate:
    """Double integral of rho(x) rho(y) |x - y|^(-gam)."""
    _check_gamma(gam, rho.dim)
    if isinstance(rho, GaussianMixture):
        return _gaussian_riesz(rho, gam)
    if isinstance(rho, BumpMixture):
        return _bump_riesz(rho, gam)
    if isinstance(rho, IndicatorMixture):
        return _indicator_riesz(rho, gam)
    if isinstance(rho, GridSampled):
        return _indicator_riesz(grid_to_cells(rho), gam, order=8)
    raise CapabilityError(f"no Riesz energy route for {type(rho).__name__}")


def grid_to_cells(rho: GridSampled) -> IndicatorMixture:
    """Piecewise-constant approximation of a grid density by its cell averages."""
    cubes, weights = [], []
    h = rho.cube.side / (np.array(rho.samples.shape) - 1)
    if not np.allclose(h, h[0]):
        raise CapabilityError("cell conversion needs equal spacing on all axes")
    h = float(h[0])
    for idx in np.ndindex(*(n - 1 for n in rho.samples.shape)):
        lo = rho.cube.lo + h * np.array(idx)
        cell = Cube.from_corner(lo, h)
        weights.append(float(rho.mass(cell)) / cell.volume)
        cubes.append(cell)
    return IndicatorMixture(weights, cubes)


def point_moment(rho: Density, gam: float, point=None) -> ErrorEstimate:
    """Integral of rho(x) |x - point|^(-gam)."""
    d = rho.dim
    if gam >= d:
        raise DivergenceError(f"|x|^-{gam} is not locally integrable in dimension {d}")
    point = np.zeros(d) if point is None else np.asarray(point, dtype=float)
    parts = []
    if isinstance(rho, GaussianMixture):
        for w, c, s in zip(rho.weights, rho.centers, rho.widths):
            e = gaussian_inverse_moment(d, float(np.linalg.norm(c - point)), s * s, gam)
            parts.append(e.scaled(w))
        return total(parts)
    if isinstance(rho, BumpMixture):
        delta = lambda p: np.full_like(np.asarray(p, dtype=float), (2 * math.pi) ** (-d / 2))
        for w, c, r, mu in zip(rho.weights, rho.centers, rho.radii, rho.powers):
            dist = float(np.linalg.norm(c - point))
            if dist == 0.0:
                est = integrate_radial(lambda t: np.maximum(0.0, 1 - (t / r) ** 2) ** mu, 0.0, r,
                                       power=d - 1 - gam)
                parts.append(est.scaled(w * sphere_area(d)))
            else:
                parts.append(fourier_pair_energy(_bump_profile(d, w, r, mu), delta, dist, d, gam, 1.0 / r))
        return total(parts)
    raise CapabilityError(f"no point-moment route for {type(rho).__name__}")


def hardy_functional(u: TrialFunction, s: float) -> ErrorEstimate:
    """Integral of |u(x)|^2 / |x|^(2s)."""
    if 2 * s >= u.dim:
        raise InvalidParameterError(f"need 2s < d for the Hardy functional (s={s}, d={u.dim})")
    return point_moment(u.density(), 2 * s)


# ---------------------------------------------------------------------------
# Ball-kernel representation of |x - y|^(-gamma)


def lens_volume(d: int, t, R):
    """Volume of the intersection of two radius-R balls with centers at distance t."""
    t = np.asarray(t, dtype=float)
    R = np.asarray(R, dtype=float)
    x = np.clip(1.0 - t * t / (4.0 * R * R), 0.0, 1.0)
    return np.where(2 * R > t, ball_volume(d) * R ** d * betainc((d + 1) / 2, 0.5, x), 0.0)


def _fdll_J(d, gam, t):
    g = lambda R: lens_volume(d, t, R) * R ** (-d - gam - 1.0)
    return integrate_radial(g, t / 2, math.inf, scale=t, rtol=1e-13)


@lru_cache(maxsize=None)
def _fdll_cached(d, gam):
    J1 = _fdll_J(d, gam, 1.0)
    J2 = _fdll_J(d, gam, 2.0)
    residual = abs(float(J1) - 2 ** gam * float(J2)) / float(J1)
    return 1.0 / float(J1), residual


def fdll_residual(d: int, gam: float) -> float:
    """Relative deviation of t^gamma J(t) between t = 1 and t = 2."""
    if not 0 < gam < d:
        raise InvalidParameterError("need 0 < gamma < d")
    return _fdll_cached(int(d), float(gam))[1]


def fdll_constant(d: int, gam: float) -> float:
    """Constant c with |x-y|^-gam = c * int int 1_{B_R}(x-u) 1_{B_R}(y-u) du dR / R^(d+gam+1)."""
    if not 0 < gam < d:
        raise InvalidParameterError("need 0 < gamma < d")
    c, residual = _fdll_cached(int(d), float(gam))
    if residual > 1e-6:
        raise NumericalConsistencyError(f"t-independence check failed (residual {residual:.3g})")
    return c


def fdll_reconstruct(d: int, gam: float, t: float) -> float:
    if not t > 0:
        raise InvalidParameterError("t must be positive")
    return fdll_constant(d, gam) * float(_fdll_J(d, gam, t))


# ---------------------------------------------------------------------------
# Localisation identity and energy summaries


def loss_identity_residual(chi, eta, u, x, y, tol: float = 1e-12):
    """LHS minus RHS of the two-point localisation identity for a partition chi^2 + eta^2 = 1."""
    cx, cy = np.asarray(chi(x), dtype=float), np.asarray(chi(y), dtype=float)
    ex, ey = np.asarray(eta(x), dtype=float), np.asarray(eta(y), dtype=float)
    for c, e in ((cx, ex), (cy, ey)):
        if np.any(np.abs(c * c + e * e - 1.0) > tol):
            raise PartitionOfUnityError("chi^2 + eta^2 deviates from 1")
    ux, uy = np.asarray(u(x)), np.asarray(u(y))
    lhs = np.abs(cx * ux - cy * uy) ** 2 + np.abs(ex * ux - ey * uy) ** 2 - np.abs(ux - uy) ** 2
    rhs = ((cx - cy) ** 2 + (ex - ey) ** 2) * np.real(np.conj(ux) * uy)
    return lhs - rhs


@dataclass
class EnergyBreakdown:
    kinetic: float
    hardy: float | None
    riesz: float | None
    l2: float
    lp: float
    stderr: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def energy_breakdown(u: TrialFunction, s: float) -> EnergyBreakdown:
    d = u.dim
    theta = 2 * s / d
    kin = hs_fullspace(u, s)
    hardy = riesz = None
    errs = {"kinetic": kin.stderr}
    if 2 * s < d:
        h = hardy_functional(u, s)
        r = riesz_energy(u.density(), 2 * s)
        hardy, riesz = float(h), float(r)
        errs.update(hardy=h.stderr, riesz=r.stderr)
    return EnergyBreakdown(float(kin), hardy, riesz, u.l2_norm_sq(), u.lp_integral(2 * (1 + theta)), errs)
