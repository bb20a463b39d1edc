"""Quotient evaluators and experiment drivers for the interpolation and many-body inequalities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .covering import build_covering, covering_constant_a
from .density import BumpCompact, Gaussian, ScaledProfile, TrialFunction, ball_volume
from .errors import DivergenceError, FitError, InvalidParameterError, NumericalConsistencyError
from .geometry import Cube
from .quadrature import ErrorEstimate, integrate_cube
from .reports import InequalityReport
from .seminorm import (fdll_constant, fourier_pair_energy, hardy_constant, hardy_functional,
                       hs_fullspace, hs_seminorm_cube, riesz_energy, _bump_profile)

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class QuotientResult:
    numerator: float
    denominator: float
    quotient: float
    params: dict
    tol: float = 0.0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.denominator > 0:
            raise InvalidParameterError("quotient denominator must be positive")

    def to_dict(self):
        return {"numerator": self.numerator, "denominator": self.denominator, "quotient": self.quotient,
                "params": self.params, "tol": self.tol, "details": self.details}


def golden_max(f, a: float, b: float, iters: int = 200, xtol: float = 1e-12):
    """Golden-section search for a maximum of a unimodal f on [a, b]."""
    c, d = b - INVPHI * (b - a), a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if abs(b - a) <= xtol * (1 + abs(a) + abs(b)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc > fd else (d, fd)


def golden_min(f, a, b, iters=200, xtol=1e-12):
    x, v = golden_max(lambda t: -f(t), a, b, iters, xtol)
    return x, -v


def _unit(u: TrialFunction) -> TrialFunction:
    n2 = u.l2_norm_sq()
    if not n2 > 0:
        raise InvalidParameterError("trial function is zero")
    if abs(n2 - 1.0) > 1e-12:
        return u.normalized()
    return u


def _check_dim(u, d):
    if d is not None and d != u.dim:
        raise InvalidParameterError(f"trial function dimension {u.dim} != d={d}")
    return u.dim


def _rel(est) -> float:
    v = float(est)
    return getattr(est, "stderr", 0.0) / abs(v) if v else 0.0


def gn_quotient(u: TrialFunction, s: float, d: int | None = None) -> QuotientResult:
    """<u, (-Delta)^s u> / int |u|^(2(1+2s/d)) for normalized u."""
    d = _check_dim(u, d)
    u = _unit(u)
    theta = 2 * s / d
    kin = hs_fullspace(u, s)
    lp = u.lp_integral(2 * (1 + theta))
    q = float(kin) / lp
    return QuotientResult(float(kin), lp, q, {"d": d, "s": s}, q * _rel(kin), {"kinetic": float(kin)})


def lt_interpolation_quotient(u: TrialFunction, s: float, d: int | None = None) -> QuotientResult:
    """kinetic^(1-theta) riesz^theta / int |u|^(2(1+theta)), theta = 2s/d."""
    d = _check_dim(u, d)
    if not 0 < 2 * s < d:
        raise DivergenceError(f"Riesz energy with exponent 2s={2 * s} diverges in dimension {d}")
    u = _unit(u)
    theta = 2 * s / d
    kin = hs_fullspace(u, s)
    rz = riesz_energy(u.density(), 2 * s)
    lp = u.lp_integral(2 * (1 + theta))
    num = float(kin) ** (1 - theta) * float(rz) ** theta
    q = num / lp
    tol = q * ((1 - theta) * _rel(kin) + theta * _rel(rz))
    return QuotientResult(num, lp, q, {"d": d, "s": s}, tol,
                          {"kinetic": float(kin), "riesz": float(rz), "lp": lp})


def hlt_interpolation_quotient(u: TrialFunction, s: float, d: int | None = None) -> QuotientResult:
    """As the LT quotient with the kinetic energy reduced by the sharp Hardy term."""
    d = _check_dim(u, d)
    if not 0 < 2 * s < d:
        raise DivergenceError(f"Riesz energy with exponent 2s={2 * s} diverges in dimension {d}")
    u = _unit(u)
    theta = 2 * s / d
    kin = hs_fullspace(u, s)
    hardy = hardy_functional(u, s)
    C = hardy_constant(d, s)
    gap = float(kin) - C * float(hardy)
    gap_tol = kin.stderr + C * hardy.stderr + 1e-13 * abs(float(kin))
    if gap < -gap_tol:
        raise NumericalConsistencyError(f"Hardy-subtracted kinetic energy is negative ({gap:.3g})")
    gap = max(gap, 0.0)
    rz = riesz_energy(u.density(), 2 * s)
    lp = u.lp_integral(2 * (1 + theta))
    num = gap ** (1 - theta) * float(rz) ** theta
    q = num / lp
    tol = q * ((1 - theta) * (gap_tol / gap if gap else 0.0) + theta * _rel(rz))
    return QuotientResult(num, lp, q, {"d": d, "s": s}, tol,
                          {"kinetic": float(kin), "hardy": float(hardy), "hardy_gap": gap,
                           "riesz": float(rz), "lp": lp})


def iso_quotient(u: TrialFunction, s: float, d: int | None = None) -> QuotientResult:
    """(int |grad u|^(2s))^(1-theta) (Riesz energy of |u|^(2s))^theta / int |u|^(2s(1+theta))."""
    d = _check_dim(u, d)
    if d < 2 or not 0.5 <= s < d / 2:
        raise InvalidParameterError(f"need d >= 2 and 1/2 <= s < d/2 (got d={d}, s={s})")
    theta = 2 * s / d
    grad = u.gradient_power_integral(2 * s)
    rz = riesz_energy(u.power_density(2 * s), 2 * s)
    lp = u.lp_integral(2 * s * (1 + theta))
    num = float(grad) ** (1 - theta) * float(rz) ** theta
    q = num / lp
    tol = q * ((1 - theta) * _rel(grad) + theta * _rel(rz))
    return QuotientResult(num, lp, q, {"d": d, "s": s}, tol,
                          {"gradient": float(grad), "riesz": float(rz), "lp": lp})


@dataclass(frozen=True)
class OneBodyEnergies:
    kinetic: float
    riesz: float
    lp: float
    stderr: float = 0.0


def one_body_energies(u: TrialFunction, s: float) -> OneBodyEnergies:
    u = _unit(u)
    d = u.dim
    if not 0 < 2 * s < d:
        raise DivergenceError(f"Riesz energy with exponent 2s={2 * s} diverges in dimension {d}")
    kin = hs_fullspace(u, s)
    rz = riesz_energy(u.density(), 2 * s)
    lp = u.lp_integral(2 * (1 + 2 * s / d))
    return OneBodyEnergies(float(kin), float(rz), lp, kin.stderr + rz.stderr)


def _product_value(e: OneBodyEnergies, N, lam, theta):
    num = N * e.kinetic + lam * N * (N - 1) / 2 * e.riesz
    den = N ** (1 + theta) * e.lp
    return num, den


def product_state_quotient(u: TrialFunction, N: int, lam: float, s: float, d: int | None = None,
                           energies: OneBodyEnergies | None = None) -> QuotientResult:
    """[N T + lam N(N-1)/2 D] / (N^(1+theta) int|u|^(2(1+theta))) for the product state u^N."""
    d = _check_dim(u, d)
    if int(N) != N or N < 1:
        raise InvalidParameterError("N must be a positive integer")
    if lam < 0:
        raise InvalidParameterError("coupling must be nonnegative")
    theta = 2 * s / d
    e = energies if energies is not None else one_body_energies(u, s)
    num, den = _product_value(e, N, lam, theta)
    q = num / den
    return QuotientResult(num, den, q, {"d": d, "s": s, "lambda": lam, "N": int(N)},
                          q * e.stderr / max(e.kinetic, 1e-300),
                          {"kinetic": e.kinetic, "riesz": e.riesz, "lp": e.lp})


def mu_ratio_closed_form(s: float, d: int) -> float:
    theta = 2 * s / d
    return (1 - theta) ** (-1 + theta) * (1 / (2 * theta)) ** theta


def mu_ratio_numeric(s: float, d: int) -> float:
    """Infimum of (1 + t/2) t^(-theta) from a log-grid followed by golden refinement."""
    theta = 2 * s / d
    f = lambda lt: (1 + math.exp(lt) / 2) * math.exp(-theta * lt)
    grid = np.linspace(math.log(1e-8), math.log(1e8), 4001)
    vals = np.array([f(x) for x in grid])
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    _, v = golden_min(f, a, b)
    return min(v, float(vals[i]))


def mu_optimized_ratio(s: float, d: int) -> float:
    """Closed-form C1/C, cross-checked against the numerical infimum."""
    if not 0 < 2 * s < d:
        raise InvalidParameterError("need 0 < 2s < d")
    closed = mu_ratio_closed_form(s, d)
    numeric = mu_ratio_numeric(s, d)
    if abs(closed - numeric) > 1e-6 * closed:
        raise NumericalConsistencyError(f"closed form {closed} and grid infimum {numeric} disagree")
    return closed


def _support_radius(profile: TrialFunction) -> float:
    if isinstance(profile, BumpCompact):
        return profile.radius
    if isinstance(profile, ScaledProfile):
        return _support_radius(profile.base) / profile.dilation
    raise InvalidParameterError("separated trial states need a compactly supported bump profile")


def default_centers(N: int, d: int) -> np.ndarray:
    """Points 1.5 apart on the first axis."""
    c = np.zeros((N, d))
    c[:, 0] = 1.5 * np.arange(N)
    return c


def separated_trial_quotient(profile: TrialFunction, N: int, R: float, lam: float, s: float,
                             d: int | None = None, centers=None) -> QuotientResult:
    """Energy quotient of N disjoint translated copies of a bump placed at R * y_i."""
    d = _check_dim(profile, d)
    if not 0 < 2 * s < d:
        raise DivergenceError("need 2s < d for a finite interaction")
    profile = _unit(profile)
    r_p = _support_radius(profile)
    if r_p > R / 3 * (1 + 1e-12):
        raise InvalidParameterError(f"profile support radius {r_p} exceeds R/3 = {R / 3}")
    centers = default_centers(N, d) if centers is None else np.asarray(centers, dtype=float)
    if centers.shape != (N, d):
        raise InvalidParameterError("need one center per particle")
    for i in range(N):
        for j in range(i + 1, N):
            if np.linalg.norm(centers[i] - centers[j]) <= 1.0:
                raise InvalidParameterError("overlapping supports: centers must be more than 1 apart")
    theta = 2 * s / d
    kin = hs_fullspace(profile, s)
    lp = profile.lp_integral(2 * (1 + theta))
    rho = profile.density()
    prof = _bump_profile(d, rho.weights[0], rho.radii[0], rho.powers[0])
    pair_cache = {}
    interaction, inter_err = 0.0, 0.0
    for i in range(N):
        for j in range(i + 1, N):
            dist = R * float(np.linalg.norm(centers[i] - centers[j]))
            key = round(dist, 12)
            if key not in pair_cache:
                pair_cache[key] = fourier_pair_energy(prof, prof, dist, d, 2 * s, 1.0 / r_p)
            e = pair_cache[key]
            interaction += float(e)
            inter_err += e.stderr
    num = N * float(kin) + lam * interaction
    den = N * lp
    bound_const = 3 ** (2 * s) / 2
    bound_num = N * float(kin) + lam * bound_const * N * N * R ** (-2 * s)
    q = num / den
    return QuotientResult(num, den, q, {"d": d, "s": s, "lambda": lam, "N": N, "R": R},
                          (N * kin.stderr + lam * inter_err) / den,
                          {"kinetic": float(kin), "interaction": interaction, "lp": lp,
                           "gn_quotient": float(kin) / lp, "bound_constant": bound_const,
                           "bound_quotient": bound_num / den})


@dataclass
class ScalingResult:
    slope: float
    intercept: float
    rows: list
    expected: float

    @property
    def relative_error(self) -> float:
        return abs(self.slope - self.expected) / self.expected

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "expected": self.expected,
                "relative_error": self.relative_error, "rows": self.rows}


def best_product_state(e: OneBodyEnergies, lam: float, theta: float, n_min: int = 2):
    """Integer N minimising the product-state quotient for fixed one-body energies."""
    if lam > 0:
        A = e.kinetic - lam * e.riesz / 2
        B = lam * e.riesz / 2
        n_star = theta * A / ((1 - theta) * B) if A > 0 else n_min
    else:
        n_star = 1e6
    hi = max(n_min + 4, 4 * n_star + 10)
    cands = set(np.unique(np.round(np.geomspace(n_min, hi, 400))).astype(int).tolist())
    for off in range(-3, 4):
        cands.add(int(math.floor(n_star)) + off)
    cands = sorted(c for c in cands if c >= n_min)
    best = None
    for N in cands:
        num, den = _product_value(e, N, lam, theta)
        q = num / den
        if best is None or q < best[1]:
            best = (N, q)
    return best


def lambda_scaling_experiment(s: float, d: int, lambdas=None, widths=None) -> ScalingResult:
    """Fit the exponent of the best product-state bound against the coupling."""
    if not 0 < 2 * s < d:
        raise InvalidParameterError("need 0 < 2s < d")
    lambdas = np.geomspace(1e-4, 1e-1, 13) if lambdas is None else np.asarray(lambdas, dtype=float)
    widths = [0.5, 1.0, 2.0] if widths is None else list(widths)
    if len(np.unique(lambdas)) < 2:
        raise FitError("need at least two distinct coupling values to fit a slope")
    if np.any(lambdas <= 0):
        raise InvalidParameterError("couplings must be positive")
    theta = 2 * s / d
    energies = [one_body_energies(Gaussian(np.zeros(d), w), s) for w in widths]
    rows = []
    for lam in lambdas:
        best = None
        for w, e in zip(widths, energies):
            N, q = best_product_state(e, lam, theta)
            if best is None or q < best[2]:
                best = (w, N, q)
        rows.append({"lambda": float(lam), "width": best[0], "N": best[1], "quotient": best[2]})
    x = np.log([r["lambda"] for r in rows])
    y = np.log([r["quotient"] for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    return ScalingResult(float(slope), float(intercept), rows, theta)


def coupling_envelope(s: float, d: int, lambdas, widths=(1.0,)) -> dict:
    """Minimum of product-state quotients over N and widths on a coupling grid.

    Returns the envelope and whether it is nondecreasing with nonincreasing slopes.
    """
    theta = 2 * s / d
    lambdas = np.asarray(lambdas, dtype=float)
    energies = [one_body_energies(Gaussian(np.zeros(d), w), s) for w in widths]
    values = np.array([min(best_product_state(e, lam, theta)[1] for e in energies) for lam in lambdas])
    slopes = np.diff(values) / np.diff(lambdas)
    scale = 1e-10 * max(1.0, float(np.max(np.abs(slopes)))) if len(slopes) else 0.0
    return {"lambdas": lambdas.tolist(), "values": values.tolist(),
            "nondecreasing": bool(np.all(np.diff(values) >= -1e-12 * np.abs(values[1:]))),
            "concave": bool(np.all(np.diff(slopes) <= scale))}


@dataclass(frozen=True)
class PipelineConfig:
    C_S: float = 0.75 * (2 * math.pi ** 2) ** (2 / 3)
    C_P: float = 27 / (16 * (1 + 3 ** (2 / 3)) ** 2 * (2 * math.pi) ** (4 / 3))
    a: float = covering_constant_a(2, 3, 2 / 3)
    eps_min: float = 1e-6
    eps_max: float = 1 - 1e-6
    grid_points: int = 2001
    s: float = 1.0
    d: int = 3

    def __post_init__(self):
        if min(self.C_S, self.C_P, self.a) <= 0:
            raise InvalidParameterError("pipeline constants must be positive")
        if not 0 < self.eps_min < self.eps_max < 1:
            raise InvalidParameterError("epsilon range must lie in (0, 1)")


def pipeline_value(config: PipelineConfig, eps: float) -> float:
    """min{(1-eps) C_P, C_S} / Lambda0^theta with Lambda0 = a (1 + 2 d^s C_P (1/eps - 1))."""
    theta = 2 * config.s / config.d
    lam0 = config.a * (1 + 2 * config.d ** config.s * config.C_P * (1 / eps - 1))
    return min((1 - eps) * config.C_P, config.C_S) / lam0 ** theta


def explicit_constant_pipeline(config: PipelineConfig | None = None) -> tuple:
    """Maximise the assembled constant over eps; returns (C*, eps*)."""
    config = PipelineConfig() if config is None else config
    grid = np.linspace(config.eps_min, config.eps_max, config.grid_points)
    vals = np.array([pipeline_value(config, e) for e in grid])
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    eps, val = golden_max(lambda e: pipeline_value(config, e), a, b)
    if vals[i] > val:
        eps, val = float(grid[i]), float(vals[i])
    return float(val), float(eps)


@dataclass(frozen=True)
class UncertaintyPieces:
    seminorm: ErrorEstimate
    l2: ErrorEstimate
    lp: ErrorEstimate
    volume: float
    theta: float

    def rhs(self, C):
        return (1 / C) * float(self.lp) / float(self.l2) ** self.theta - C * float(self.l2) / self.volume ** self.theta

    def minimal_constant(self) -> float:
        """Smallest C > 0 with seminorm >= lp/(C l2^theta) - C l2/|Q|^theta."""
        A = float(self.lp) / float(self.l2) ** self.theta
        B = float(self.l2) / self.volume ** self.theta
        L = float(self.seminorm)
        return 2 * A / (L + math.sqrt(L * L + 4 * A * B))


def uncertainty_pieces(u: TrialFunction, Q: Cube, s: float, rule=None) -> UncertaintyPieces:
    theta = 2 * s / Q.dim
    sem = hs_seminorm_cube(u, Q, s, rule)
    l2 = integrate_cube(lambda x: u(x) ** 2, Q, rule)
    lp = integrate_cube(lambda x: np.abs(u(x)) ** (2 * (1 + theta)), Q, rule)
    if not float(l2) > 0:
        raise InvalidParameterError("trial function vanishes on the cube")
    return UncertaintyPieces(sem, l2, lp, Q.volume, theta)


def local_uncertainty_gap(u: TrialFunction, Q: Cube, s: float, C: float, rule=None) -> InequalityReport:
    """Cube-level uncertainty inequality at the candidate constant C."""
    if not C > 0:
        raise InvalidParameterError("candidate constant must be positive")
    pc = uncertainty_pieces(u, Q, s, rule)
    rhs = pc.rhs(C)
    th = pc.theta
    tol = (pc.seminorm.stderr + pc.lp.stderr / (C * float(pc.l2) ** th)
           + abs(rhs) * th * _rel(pc.l2) + C * pc.l2.stderr / pc.volume ** th
           + 1e-12 * (abs(float(pc.seminorm)) + abs(rhs)))
    return InequalityReport("local_uncertainty", float(pc.seminorm), rhs, tol,
                            {"C": C, "s": s, "l2": float(pc.l2), "lp": float(pc.lp),
                             "minimal_C": pc.minimal_constant()})


def empirical_uncertainty_constant(family, Q: Cube, s: float, rule=None) -> tuple:
    """Largest minimal constant over a trial family: (C*, per-member constants)."""
    consts = [uncertainty_pieces(u, Q, s, rule).minimal_constant() for u in family]
    return max(consts), consts


def _root_cube(u: TrialFunction, margin: float = 6.0) -> Cube:
    if isinstance(u, Gaussian):
        return Cube(tuple(u.center), 2 * margin * u.width)
    if isinstance(u, BumpCompact):
        return Cube(tuple(u.center), 2 * u.radius)
    raise InvalidParameterError("pass an explicit root cube for this trial family")


def lt_assembly_experiment(u: TrialFunction, N: int, lam: float, s: float, d: int | None = None,
                           Lam: float | None = None, root: Cube | None = None, k: int = 2,
                           max_iter: int = 12, rule=None) -> InequalityReport:
    """Check the chain  LHS >= assembled local bound >= final LT form  for the product state u^N.

    The uncertainty constant C is the largest per-leaf minimal constant and
    Lambda defaults to a (1 + 2 d^s C / lam); the two are iterated to a fixed
    point.  When N is below Lambda no proper covering exists and the root cube
    alone is used as the partition.
    """
    d = _check_dim(u, d)
    if not 0 < 2 * s < d:
        raise DivergenceError("need 0 < 2s < d")
    if not lam > 0:
        raise InvalidParameterError("coupling must be positive")
    root = _root_cube(u) if root is None else root
    u = _unit(u)
    theta = 2 * s / d
    rho = u.density().scaled(N)
    kin = hs_fullspace(u, s)
    rz = riesz_energy(u.density(), 2 * s)
    lhs = N * float(kin) + lam * N * (N - 1) / 2 * float(rz)
    lhs_err = N * kin.stderr + lam * N * (N - 1) / 2 * rz.stderr
    a = covering_constant_a(k, d, theta)
    cache = {}

    def leaf_pieces(Q):
        key = (Q.center, Q.side)
        if key not in cache:
            try:
                cache[key] = uncertainty_pieces(u, Q, s, rule)
            except InvalidParameterError:
                cache[key] = None
        return cache[key]

    def partition_for(level):
        if level is not None and float(rho.mass(root)) >= level:
            P = build_covering(rho, root, level, k, group=False)
            return [n.cube for n in (P.nodes[i] for i in P.leaf_nodes)], "covering"
        return [root], "trivial"

    fixed_lam = Lam
    level = fixed_lam
    C = None
    history = []
    for _ in range(max_iter):
        leaves, mode = partition_for(level)
        pieces = [leaf_pieces(Q) for Q in leaves]
        C_new = max(p.minimal_constant() for p in pieces if p is not None)
        C = C_new if C is None else max(C, C_new)
        new_level = fixed_lam if fixed_lam is not None else a * (1 + 2 * d ** s * C / lam)
        history.append({"C": C, "Lambda": new_level, "leaves": len(leaves), "mode": mode})
        if new_level == level:
            break
        level = new_level
    Lam_used = level
    leaves, mode = partition_for(Lam_used)
    pieces = [leaf_pieces(Q) for Q in leaves]
    if any(p is not None and p.minimal_constant() > C * (1 + 1e-12) for p in pieces):
        raise NumericalConsistencyError("uncertainty constant fixed point did not converge")

    middle_terms, final_lp, final_mass, err = [], [], [], 0.0
    for Q, p in zip(leaves, pieces):
        if p is None:
            continue
        m = N * float(p.l2)
        vol_t = Q.volume ** theta
        rho_lp = N ** (1 + theta) * float(p.lp)
        middle_terms.append(rho_lp / (C * m ** theta) - C * m / vol_t
                            + lam * max(m * m - m, 0.0) / (2 * d ** s * vol_t))
        final_lp.append(rho_lp)
        final_mass.append(m / (2 * d ** s * vol_t))
        err += (N ** (1 + theta) * p.lp.stderr / (C * m ** theta)
                + (C + lam * (2 * m + 1)) * N * p.l2.stderr / vol_t)
    middle = math.fsum(middle_terms)
    coeff = lam * (Lam_used / a - 1) - 2 * d ** s * C
    final = math.fsum(final_lp) / (C * Lam_used ** theta) + coeff * math.fsum(final_mass)
    tol = lhs_err + err + 1e-12 * (abs(lhs) + abs(middle) + abs(final))
    leaf_mass_ok = all(N * float(p.l2) < Lam_used for p in pieces if p is not None)
    details = {"N": N, "lambda": lam, "s": s, "d": d, "k": k, "a": a, "C": C, "Lambda": Lam_used,
               "covering_mode": mode, "leaves": len(leaves), "middle": middle, "final": final,
               "lhs_ge_middle": lhs - middle >= -tol, "middle_ge_final": middle - final >= -tol,
               "leaf_mass_below_Lambda": leaf_mass_ok, "iterations": history}
    report = InequalityReport("lt_assembly", lhs, final, tol, details)
    return report


def lt_assembly_satisfied(report: InequalityReport) -> bool:
    det = report.details
    return bool(det["lhs_ge_middle"] and det["middle_ge_final"] and report.satisfied)


def lieb_oxford_constant(d: int, gam: float, M: float) -> float:
    """d c M |B_1|^(1+gam/d) / (2 gam (d - gam))."""
    return d * fdll_constant(d, gam) * M / (2 * gam * (d - gam)) * ball_volume(d) ** (1 + gam / d)


def lieb_oxford_chain_check(u: TrialFunction, N: int, gam: float, d: int | None = None,
                            R_grid=None, points=None, M: float | None = None) -> InequalityReport:
    """Pointwise chain g_R >= f_R^2/2 - min(f_R, f_R^2)/2 for u^N and the final Lieb-Oxford form."""
    d = _check_dim(u, d)
    if not 0 < gam < d:
        raise InvalidParameterError("need 0 < gamma < d")
    u = _unit(u)
    R_grid = np.geomspace(0.05, 20.0, 24) if R_grid is None else np.asarray(R_grid, dtype=float)
    if points is None:
        points = np.zeros((1, d))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if R_grid.size == 0 or points.size == 0:
        raise InvalidParameterError("empty (R, v) grid")
    rho1 = u.density()
    max_identity = 0.0
    chain_ok = True
    rows = []
    for v in points:
        for R in R_grid:
            p = float(rho1.ball_mass(v, R))
            f = N * p
            g = N * (N - 1) / 2 * p * p
            identity = g - 0.5 * f * f + 0.5 * f - 0.5 * N * p * (1 - p)
            max_identity = max(max_identity, abs(identity))
            lower = 0.5 * f * f - 0.5 * min(f, f * f)
            ok = g >= lower - 1e-12 * max(1.0, f * f) and g >= 0.5 * f * f - 0.5 * f - 1e-12 * max(1.0, f * f)
            chain_ok &= ok
            rows.append({"v": v.tolist(), "R": float(R), "p": p, "f": f, "g": g,
                         "identity_residual": identity})
    e1 = riesz_energy(rho1, gam)
    lp = u.lp_integral(2 * (1 + gam / d))
    K1 = lieb_oxford_constant(d, gam, 1.0)
    M_min = (N * float(e1) / 2) / (K1 * N ** (1 + gam / d) * lp)
    M_used = M_min if M is None else float(M)
    lhs = N * (N - 1) / 2 * float(e1)
    rhs = 0.5 * N * N * float(e1) - K1 * M_used * N ** (1 + gam / d) * lp
    tol = N * N * e1.stderr + 1e-12 * abs(lhs)
    return InequalityReport("lieb_oxford", lhs, rhs, tol,
                            {"N": N, "gamma": gam, "d": d, "M": M_used, "M_min": M_min,
                             "fdll_constant": fdll_constant(d, gam), "max_identity_residual": max_identity,
                             "chain_holds": bool(chain_ok), "grid_points": len(rows), "rows": rows})
