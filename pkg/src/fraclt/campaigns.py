"""Seeded verification campaigns built on the covering, seminorm and inequality modules."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .covering import (build_covering, check_family_invariants, covering_constant_a, covering_constant_b,
                       exclusion_functional, weak_exclusion_functional)
from .density import Gaussian, GaussianMixture
from .errors import InvalidParameterError
from .geometry import Cube
from .inequalities import lieb_oxford_chain_check, lt_assembly_experiment, lt_assembly_satisfied
from .seminorm import loss_identity_residual

DEFAULT_SEED = 7
S_VALUES = (0.25, 0.5, 1.0)
Q_VALUES = (1, 2)


@dataclass
class CampaignResult:
    name: str
    runs: int
    passed: int
    rows: list
    summary: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.passed == self.runs

    def to_dict(self):
        return {"name": self.name, "runs": self.runs, "passed": self.passed, "ok": self.ok,
                "summary": self.summary, "rows": self.rows}


def random_mixture(rng: np.random.Generator, d: int, root: Cube, target_mass: float,
                   max_components: int = 4) -> GaussianMixture:
    """Gaussian mixture with centers in the root cube, log-uniform widths in [0.02, 0.3],
    rescaled so that the root cube carries target_mass."""
    n = int(rng.integers(1, max_components + 1))
    centers = np.asarray(root.lo) + root.side * rng.random((n, d))
    widths = np.exp(rng.uniform(math.log(0.02), math.log(0.3), n))
    weights = rng.dirichlet(np.ones(n))
    mix = GaussianMixture(weights, centers, widths)
    return mix.scaled(target_mass / float(mix.mass(root)))


def covering_run(rng, d: int, k: int, s_values=S_VALUES, q_values=Q_VALUES) -> dict:
    """One campaign item: build a covering and evaluate every guarantee on it."""
    root = Cube.unit(d)
    q_max = max(q_values)
    lam = q_max * k ** d * rng.uniform(1.2, 3.0)
    rho = random_mixture(rng, d, root, lam * rng.uniform(1.5, 20.0))
    P = build_covering(rho, root, lam, k)
    masses = P.leaf_masses() + P.leaf_stderr()
    row = {"d": d, "k": k, "lambda": lam, "components": len(rho.weights), "leaves": len(P.leaf_nodes),
           "families": len(P.families), "max_leaf_mass": float(masses.max()),
           "leaf_mass_ok": bool(np.all(masses < lam))}
    ok = row["leaf_mass_ok"]
    for s in s_values:
        alpha = 2 * s / d
        a = covering_constant_a(k, d, alpha)
        rep = exclusion_functional(P, alpha, a)
        fam = check_family_invariants(P, alpha, a)
        row[f"exclusion_s{s}"] = rep.value
        row[f"exclusion_ok_s{s}"] = rep.satisfied
        row[f"families_ok_s{s}"] = fam["holds"]
        ok &= rep.satisfied and fam["holds"]
        for q in q_values:
            b = covering_constant_b(k, d, alpha, q, lam)
            wrep = weak_exclusion_functional(P, alpha, q, b)
            row[f"weak_ok_s{s}_q{q}"] = wrep.satisfied
            ok &= wrep.satisfied
    if k % 2 == 1:
        row["center_property"] = P.center_property()["holds"]
        ok &= row["center_property"]
    row["ok"] = bool(ok)
    return row


def covering_campaign(runs: int = 100, seed: int = DEFAULT_SEED, dims=(1, 2, 3), ks=(2, 3),
                      s_values=S_VALUES, q_values=Q_VALUES) -> CampaignResult:
    """runs random densities for every (d, k); each item checks all s and q values."""
    rng = np.random.default_rng(seed)
    rows = []
    start = time.perf_counter()
    for d in dims:
        for k in ks:
            for i in range(runs):
                row = covering_run(rng, d, k, s_values, q_values)
                row["run"] = i
                rows.append(row)
    passed = sum(r["ok"] for r in rows)
    summary = {"seed": seed, "dims": list(dims), "ks": list(ks), "s_values": list(s_values),
               "q_values": list(q_values), "max_leaves": max(r["leaves"] for r in rows),
               "elapsed_s": time.perf_counter() - start}
    return CampaignResult("covering", len(rows), passed, rows, summary)


def raised_cosine(width: float = 1.0):
    """Smooth pair (chi, eta) with chi^2 + eta^2 = 1, switching across |x_1| in [0, width]."""
    def phase(x):
        t = np.clip(np.abs(np.atleast_2d(x)[:, 0]) / width, 0.0, 1.0)
        return 0.5 * math.pi * (0.5 - 0.5 * np.cos(math.pi * t))
    return (lambda x: np.cos(phase(x))), (lambda x: np.sin(phase(x)))


def random_complex_function(rng, d: int, terms: int = 3):
    amps = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    freqs = rng.normal(scale=2.0, size=(terms, d))
    def u(x):
        x = np.atleast_2d(x)
        return np.exp(-np.sum(x * x, axis=1)) * (np.exp(1j * x @ freqs.T) @ amps)
    return u


def loss_identity_campaign(samples: int = 1000, seed: int = DEFAULT_SEED, dims=(1, 2, 3)) -> CampaignResult:
    """Residual of the two-point localisation identity at random point pairs, split across dims."""
    if samples < 1:
        raise InvalidParameterError("need at least one sample")
    rng = np.random.default_rng(seed)
    chi, eta = raised_cosine(rng.uniform(0.5, 2.0))
    counts = [len(c) for c in np.array_split(np.arange(samples), len(dims))]
    rows, passed, worst = [], 0, 0.0
    for d, n in zip(dims, counts):
        if n == 0:
            continue
        u = random_complex_function(rng, d)
        x = rng.uniform(-2, 2, (n, d))
        y = rng.uniform(-2, 2, (n, d))
        res = np.abs(loss_identity_residual(chi, eta, u, x, y))
        worst = max(worst, float(res.max()))
        passed += int(np.sum(res < 1e-12))
        rows.append({"d": d, "samples": n, "max_residual": float(res.max())})
    return CampaignResult("loss_identity", samples, passed, rows, {"max_residual": worst})


def lt_assembly_configs(count: int = 10, seed: int = DEFAULT_SEED, Ns=(5, 10, 20)):
    rng = np.random.default_rng(seed)
    return [{"N": Ns[i % len(Ns)], "width": float(np.exp(rng.uniform(math.log(0.5), math.log(2.0)))),
             "center": rng.uniform(-1, 1, 3).tolist()} for i in range(count)]


def lt_assembly_campaign(count: int = 10, seed: int = DEFAULT_SEED, lam: float = 1.0, s: float = 1.0,
                         Ns=(5, 10, 20)) -> CampaignResult:
    rows = []
    for cfg in lt_assembly_configs(count, seed, Ns):
        u = Gaussian(cfg["center"], cfg["width"])
        rep = lt_assembly_experiment(u, cfg["N"], lam, s)
        det = rep.details
        rows.append({**cfg, "lhs": rep.lhs, "middle": det["middle"], "final": rep.rhs, "tol": rep.tol,
                     "C": det["C"], "Lambda": det["Lambda"], "covering_mode": det["covering_mode"],
                     "leaves": det["leaves"], "ok": lt_assembly_satisfied(rep)})
    passed = sum(r["ok"] for r in rows)
    return CampaignResult("lt_assembly", len(rows), passed, rows, {"seed": seed, "lambda": lam, "s": s})


def lieb_oxford_campaign(N: int = 4, gam: float = 1.0, d: int = 3, seed: int = DEFAULT_SEED,
                         points: int = 8) -> CampaignResult:
    rng = np.random.default_rng(seed)
    u = Gaussian(np.zeros(d), 1.0)
    pts = np.vstack([np.zeros(d), rng.uniform(-2, 2, (points - 1, d))])
    rep = lieb_oxford_chain_check(u, N, gam, d, points=pts)
    det = rep.details
    ok = det["max_identity_residual"] < 1e-12 and det["chain_holds"] and rep.satisfied
    row = {k: v for k, v in det.items() if k != "rows"}
    row.update({"lhs": rep.lhs, "rhs": rep.rhs, "ok": bool(ok)})
    return CampaignResult("lieb_oxford", 1, int(ok), [row], {"grid_points": det["grid_points"]})
