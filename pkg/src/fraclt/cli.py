"""Command-line front end.

Subcommands: covering, quotient, constants, verify.  Every run writes
``report.json`` (deterministic for a fixed config and seed) and
``run_meta.json`` (timestamp and timing) into ``--out``; sweeps and
campaigns also write ``sweep.csv``, and ``covering`` writes
``partition.json``.  ``--plot`` adds PNG figures next to them.

Exit codes: 0 success, 1 inequality violation or failed check,
2 parse or precondition error.

Settings come from flags, then from a TOML file given by ``--config``
(top-level keys or a table named after the subcommand, keys spelled like
the flags), then from built-in defaults.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .campaigns import (DEFAULT_SEED, covering_campaign, lieb_oxford_campaign, loss_identity_campaign,
                        lt_assembly_campaign)
from .covering import (build_covering, check_family_invariants, covering_constant_a, covering_constants,
                       exclusion_functional, weak_exclusion_functional)
from .density import BumpCompact, BumpMixture, Gaussian, GaussianMixture, IndicatorMixture
from .errors import (CapabilityError, DivergenceError, FracLTError, InvalidParameterError,
                     NonTerminationError, ParseError, PreconditionError)
from .exprs import parse_density, parse_terms, parse_trial
from .geometry import Cube
from .inequalities import (PipelineConfig, explicit_constant_pipeline, gn_quotient,
                           hlt_interpolation_quotient, iso_quotient, lambda_scaling_experiment,
                           lt_interpolation_quotient, mu_optimized_ratio, mu_ratio_closed_form,
                           mu_ratio_numeric, product_state_quotient, separated_trial_quotient)
from .quadrature import default_order
from .reports import write_csv, write_json
from .seminorm import fdll_constant, fdll_reconstruct, fdll_residual, fractional_constant, hardy_constant

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "covering": {"density": None, "lambda": None, "k": 2, "alpha": None, "s": 1.0, "q": 1.0,
                 "root": None, "max_depth": 40},
    "quotient": {"d": None, "s": None, "trial": None, "N": 2, "lambda": 1.0, "R": 10.0, "widths": None},
    "constants": {"d": 3, "s": 1.0, "gamma": 1.0, "k": 2, "alpha": None, "q": 1.0, "lambda": None},
    "verify": {"runs": 100, "seed": DEFAULT_SEED, "samples": 1000, "count": 10, "d": None, "s": None,
               "N": None, "gamma": 1.0, "lambda": 1.0},
}
USAGE_ERRORS = (ParseError, InvalidParameterError, PreconditionError, DivergenceError,
                NonTerminationError, tomllib.TOMLDecodeError, OSError)


# ---------------------------------------------------------------------------
# configuration


def load_config(path, command: str) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    flat = {k: v for k, v in raw.items() if not isinstance(v, dict)}
    flat.update(raw.get(command, {}))
    cfg = {}
    for key, value in flat.items():
        key = key.replace("-", "_")
        if key not in DEFAULTS[command]:
            raise ParseError(f"unknown config key {key!r} for {command}")
        cfg[key] = value
    return cfg


def resolve(args, command: str) -> dict:
    """Flags override the config file, which overrides defaults."""
    cfg = load_config(args.config, command)
    out = {}
    for key, default in DEFAULTS[command].items():
        flag = getattr(args, key, None)
        out[key] = flag if flag is not None else cfg.get(key, default)
    return out


def parse_range(text: str) -> np.ndarray:
    """a:b:n -> n evenly spaced values from a to b."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise ParseError(f"expected a:b:n, got {text!r}") from None
    if n < 1 or not (a > 0 and b > 0):
        raise ParseError("sweep needs n >= 1 and positive endpoints")
    return np.linspace(a, b, n)


def parse_cube(text: str) -> Cube:
    """Root cube written as [a,b]^d."""
    terms = parse_terms(f"root(cube={text})")
    spec = terms[0][2]["cube"]
    if not hasattr(spec, "interval"):
        raise ParseError("root must be written as [a,b]^d")
    a, b = spec.interval
    if not b > a:
        raise ParseError("root interval must have b > a")
    return Cube.from_corner([a] * spec.dim, b - a)


def default_root(rho) -> Cube:
    """Smallest cube containing the support, or 6 widths around each Gaussian component."""
    if isinstance(rho, IndicatorMixture):
        lo = np.min([Q.lo for Q in rho.cubes], axis=0)
        hi = np.max([Q.hi for Q in rho.cubes], axis=0)
    elif isinstance(rho, GaussianMixture):
        lo = np.min(rho.centers - 6 * rho.widths[:, None], axis=0)
        hi = np.max(rho.centers + 6 * rho.widths[:, None], axis=0)
    elif isinstance(rho, BumpMixture):
        lo = np.min(rho.centers - rho.radii[:, None], axis=0)
        hi = np.max(rho.centers + rho.radii[:, None], axis=0)
    else:
        raise ParseError("pass --root for this density")
    return Cube(tuple((lo + hi) / 2), float(np.max(hi - lo)))


def _require(cfg, *keys):
    for key in keys:
        if cfg.get(key) is None:
            raise ParseError(f"--{key} is required")


# ---------------------------------------------------------------------------
# output


class Output:
    def __init__(self, out_dir, plot: bool):
        self.dir = Path(out_dir)
        self.plot = plot
        self.started = time.perf_counter()
        self.meta = {}

    def report(self, command, cfg, result, ok, **extra):
        payload = {"command": command, "config": cfg, "quadrature_order": default_order(),
                   "version": __version__, "ok": bool(ok), "result": result, **extra}
        path = write_json(self.dir / "report.json", payload)
        write_json(self.dir / "run_meta.json",
                   {"timestamp": datetime.now(timezone.utc).isoformat(), "argv": sys.argv[1:],
                    "elapsed_s": time.perf_counter() - self.started, **self.meta})
        return path

    def figure(self, fn, *args, name):
        if not self.plot:
            return None
        try:
            return fn(*args, self.dir / name)
        except CapabilityError as exc:
            print(f"warning: {exc}", file=sys.stderr)
            return None


def emit(pairs):
    """Print tab-delimited key/value lines."""
    for key, value in pairs:
        if isinstance(value, float):
            value = f"{value:.10g}"
        print(f"{key}\t{value}")


# ---------------------------------------------------------------------------
# commands


def cmd_covering(args, out: Output) -> int:
    cfg = resolve(args, "covering")
    _require(cfg, "density", "lambda")
    rho = parse_density(cfg["density"])
    d = rho.dim
    root = parse_cube(cfg["root"]) if cfg["root"] else default_root(rho)
    if root.dim != d:
        raise ParseError(f"root dimension {root.dim} != density dimension {d}")
    k, lam, q = int(cfg["k"]), float(cfg["lambda"]), float(cfg["q"])
    alpha = float(cfg["alpha"]) if cfg["alpha"] is not None else 2 * float(cfg["s"]) / d
    cfg["alpha"] = alpha
    P = build_covering(rho, root, lam, k, max_depth=int(cfg["max_depth"]))
    const = covering_constants(k, d, alpha, q, lam)
    excl = exclusion_functional(P, alpha, const.a)
    weak = weak_exclusion_functional(P, alpha, q, const.b)
    fam = check_family_invariants(P, alpha, const.a)
    masses = P.leaf_masses() + P.leaf_stderr()
    leaf_ok = bool(np.all(masses < lam))
    result = {"leaves": len(P.leaf_nodes), "families": len(P.families), "max_leaf_mass": float(masses.max()),
              "leaf_mass_below_lambda": leaf_ok, "a": const.a, "b": const.b, "b_positive": const.b_positive,
              "exclusion": excl.to_dict(), "weak_exclusion": weak.to_dict(), "family_check": fam}
    ok = leaf_ok and excl.satisfied and weak.satisfied and fam["holds"]
    if k % 2 == 1:
        result["center_property"] = P.center_property()
        ok &= result["center_property"]["holds"]
    write_json(out.dir / "partition.json", P.to_dict())
    path = out.report("covering", cfg, result, ok)
    if d <= 2:
        from .plots import plot_partition
        out.figure(plot_partition, P, name="partition.png")
    emit([("leaves", len(P.leaf_nodes)), ("families", len(P.families)), ("a", const.a),
          ("exclusion", excl.value), ("weak_exclusion", weak.value),
          ("center_property", result.get("center_property", {}).get("holds", "n/a")),
          ("status", "PASS" if ok else "FAIL"), ("report", str(path))])
    return EXIT_OK if ok else EXIT_VIOLATION


QUOTIENTS = ("gn", "lt", "hlt", "iso", "product", "separated")


def _with_width(u, w):
    if isinstance(u, Gaussian):
        return Gaussian(u.center, w)
    if isinstance(u, BumpCompact):
        return BumpCompact(u.center, w, u.power)
    raise ParseError("width sweeps need a gauss(...) or bump(...) trial function")


def _quotient(kind, u, cfg):
    s, d = float(cfg["s"]), cfg["d"]
    if kind == "gn":
        return gn_quotient(u, s, d)
    if kind == "lt":
        return lt_interpolation_quotient(u, s, d)
    if kind == "hlt":
        return hlt_interpolation_quotient(u, s, d)
    if kind == "iso":
        return iso_quotient(u, s, d)
    if kind == "product":
        return product_state_quotient(u, int(cfg["N"]), float(cfg["lambda"]), s, d)
    return separated_trial_quotient(u, int(cfg["N"]), float(cfg["R"]), float(cfg["lambda"]), s, d)


def cmd_quotient(args, out: Output) -> int:
    cfg = resolve(args, "quotient")
    kind = args.kind
    _require(cfg, "s")
    if cfg["trial"] is None:
        cfg["trial"] = "bump(r=1)" if kind == "separated" else "gauss(s=1)"
    d = int(cfg["d"]) if cfg["d"] is not None else None
    if d is None:
        try:
            d = parse_trial(cfg["trial"]).dim
        except ParseError:
            raise ParseError("--d is required when the trial center is not given") from None
    cfg["d"] = d
    s = float(cfg["s"])
    if kind in ("lt", "hlt", "product", "separated") and not 0 < 2 * s < d:
        raise PreconditionError(f"{kind} needs 0 < 2s < d (got s={s}, d={d})")
    u = parse_trial(cfg["trial"], d)
    res = _quotient(kind, u, cfg)
    rows = []
    if cfg["widths"]:
        for w in parse_range(cfg["widths"]):
            r = _quotient(kind, _with_width(u, float(w)), cfg)
            rows.append({"width": float(w), "quotient": r.quotient, "numerator": r.numerator,
                         "denominator": r.denominator, "tol": r.tol})
        write_csv(out.dir / "sweep.csv", rows)
        from .plots import plot_sweep
        out.figure(plot_sweep, rows, "width", "quotient", name="sweep.png")
    path = out.report("quotient", {**cfg, "kind": kind}, res.to_dict(), True, sweep_rows=len(rows))
    emit([("quotient", kind), ("value", res.quotient), ("tol", res.tol)]
         + [(k, v) for k, v in sorted(res.details.items()) if isinstance(v, float)]
         + [("sweep_rows", len(rows)), ("report", str(path))])
    return EXIT_OK


FORMULAS = {
    "hardy": "2^(2s) Gamma((d+2s)/4)^2 / Gamma((d-2s)/4)^2",
    "fractional": "2^(2sigma-1) pi^(-d/2) Gamma((d+2sigma)/2) / |Gamma(-sigma)|",
    "a": "(k^d/2) (1 + sqrt(1 + (1 - k^-d) / (k^(d alpha) - 1)))",
    "b": "(1 - q k^d / lambda) (k^(d alpha) - 1) / (k^(d alpha) + k^d - 2)",
    "pipeline": "max_eps min{(1-eps) C_P, C_S} / (a (1 + 2 d^s C_P (1/eps - 1)))^(2s/d)",
    "mu": "(1-theta)^(theta-1) (2 theta)^(-theta), theta = 2s/d",
    "fdll": "1 / int_{t/2}^inf |B_R(0) cap B_R(t e)| R^(-d-gamma-1) dR at t = 1",
}


def _golden_checks():
    pipeline, eps = explicit_constant_pipeline()
    a = covering_constant_a(2, 3, 2 / 3)
    rows = [
        ("hardy(3,1)", hardy_constant(3, 1.0), 0.25, 1e-12),
        ("a(2,3,2/3)", a, 4 + math.sqrt(186) / 3, 1e-12),
        ("pipeline C*", pipeline, 0.002384, 5e-7),
        ("mu ratio closed - numeric (3,1)", mu_ratio_closed_form(1.0, 3) - mu_ratio_numeric(1.0, 3), 0.0, 1e-6),
        ("fractional_constant(1,1/2)", fractional_constant(1, 0.5), 1 / (2 * math.pi), 1e-12),
    ]
    return [{"name": n, "value": v, "expected": e, "tol": t, "ok": abs(v - e) <= t} for n, v, e, t in rows], eps


def cmd_constants(args, out: Output) -> int:
    cfg = resolve(args, "constants")
    d, s, gam, k = int(cfg["d"]), float(cfg["s"]), float(cfg["gamma"]), int(cfg["k"])
    alpha = float(cfg["alpha"]) if cfg["alpha"] is not None else 2 * s / d
    selected = [name for name in ("check", "hardy", "fdll", "covering", "pipeline", "mu") if getattr(args, name)]
    if not selected:
        selected = ["pipeline", "hardy", "covering", "mu"]
    table, ok = [], True
    if "check" in selected:
        checks, eps = _golden_checks()
        for row in checks:
            table.append({"name": row["name"], "value": row["value"], "formula": f"expected {row['expected']!r}",
                          "ok": row["ok"]})
        ok = all(r["ok"] for r in checks)
    if "hardy" in selected:
        table.append({"name": f"hardy({d},{s:g})", "value": hardy_constant(d, s), "formula": FORMULAS["hardy"]})
    if "covering" in selected:
        table.append({"name": f"a(k={k},d={d},alpha={alpha:g})", "value": covering_constant_a(k, d, alpha),
                      "formula": FORMULAS["a"]})
        if cfg["lambda"] is not None:
            const = covering_constants(k, d, alpha, float(cfg["q"]), float(cfg["lambda"]))
            table.append({"name": f"b(q={cfg['q']:g},lambda={cfg['lambda']:g})", "value": const.b,
                          "formula": FORMULAS["b"]})
    if "pipeline" in selected:
        C, eps = explicit_constant_pipeline(PipelineConfig())
        table.append({"name": "pipeline C*", "value": C, "formula": FORMULAS["pipeline"]})
        table.append({"name": "pipeline eps*", "value": eps, "formula": "argmax of the above"})
    if "mu" in selected:
        if 2 * s < d:
            table.append({"name": f"mu ratio({d},{s:g})", "value": mu_optimized_ratio(s, d),
                          "formula": FORMULAS["mu"]})
    if "fdll" in selected:
        c = fdll_constant(d, gam)
        table.append({"name": f"fdll({d},{gam:g})", "value": c, "formula": FORMULAS["fdll"]})
        table.append({"name": "fdll t-residual", "value": fdll_residual(d, gam), "formula": "|J(1) - 2^gamma J(2)| / J(1)"})
        for t in (0.5, 1.0, 2.0, 4.0):
            table.append({"name": f"fdll t^gamma*reconstruct(t={t:g})", "value": t ** gam * fdll_reconstruct(d, gam, t),
                          "formula": "should equal 1"})
    path = out.report("constants", {**cfg, "selected": selected}, table, ok)
    for row in table:
        mark = "" if "ok" not in row else ("\tok" if row["ok"] else "\tFAILED")
        print(f"{row['name']}\t{row['value']:.12g}\t{row['formula']}{mark}")
    print(f"report\t{path}")
    return EXIT_OK if ok else EXIT_VIOLATION


CAMPAIGNS = ("covering-campaign", "lambda-scaling", "loss-identity", "lt-assembly", "lieb-oxford")


def cmd_verify(args, out: Output) -> int:
    cfg = resolve(args, "verify")
    name = args.campaign
    seed = int(cfg["seed"])
    if name == "covering-campaign":
        res = covering_campaign(int(cfg["runs"]), seed)
    elif name == "loss-identity":
        res = loss_identity_campaign(int(cfg["samples"]), seed)
    elif name == "lt-assembly":
        res = lt_assembly_campaign(int(cfg["count"]), seed, float(cfg["lambda"]), float(cfg["s"] or 1.0))
    elif name == "lieb-oxford":
        res = lieb_oxford_campaign(int(cfg["N"] or 4), float(cfg["gamma"]), int(cfg["d"] or 3), seed)
    else:
        d, s = int(cfg["d"] or 3), float(cfg["s"] or 1.0)
        fit = lambda_scaling_experiment(s, d)
        ok = 0.9 * fit.expected <= fit.slope <= 1.1 * fit.expected
        write_csv(out.dir / "sweep.csv", fit.rows)
        from .plots import plot_scaling
        out.figure(plot_scaling, fit, name="scaling.png")
        path = out.report("verify", {**cfg, "campaign": name}, fit.to_dict(), ok)
        emit([("slope", fit.slope), ("expected", fit.expected), ("relative_error", fit.relative_error),
              ("status", "PASS" if ok else "FAIL"), ("report", str(path))])
        return EXIT_OK if ok else EXIT_VIOLATION
    elapsed = res.summary.pop("elapsed_s", None)
    if elapsed is not None:
        out.meta["campaign_elapsed_s"] = elapsed
    write_csv(out.dir / "sweep.csv", [{k: v for k, v in r.items() if k != "center"} for r in res.rows])
    path = out.report("verify", {**cfg, "campaign": name}, res.to_dict(), res.ok)
    emit([("campaign", name), ("passed", f"{res.passed}/{res.runs}"),
          ("status", "PASS" if res.ok else "FAIL"), ("report", str(path))])
    return EXIT_OK if res.ok else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with default settings")
    common.add_argument("--out", default="fraclt-out", help="output directory (default: fraclt-out)")
    common.add_argument("--plot", action="store_true", help="also write PNG figures (needs matplotlib)")
    common.add_argument("--quad-order", type=int, help="quadrature order per axis")

    parser = argparse.ArgumentParser(prog="fraclt", description="Fractional Lieb-Thirring toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("covering", parents=[common], help="adaptive covering and exclusion checks")
    p.add_argument("--density", help="density expression, e.g. 'uniform(cube=[0,1]^2)'")
    p.add_argument("--lambda", dest="lambda", type=float, help="mass threshold")
    p.add_argument("--k", type=int, help="split factor per axis (default 2)")
    p.add_argument("--alpha", type=float, help="volume exponent (default 2s/d)")
    p.add_argument("--s", type=float, help="order used for the default alpha (default 1)")
    p.add_argument("--q", type=float, help="weak-covering offset (default 1)")
    p.add_argument("--root", help="root cube as [a,b]^d (default: bounding cube of the density)")
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.set_defaults(func=cmd_covering)

    p = sub.add_parser("quotient", parents=[common], help="evaluate an inequality quotient")
    p.add_argument("kind", choices=QUOTIENTS)
    p.add_argument("--d", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--trial", help="trial function, e.g. 'gauss(s=1)' or 'bump(r=1,p=4)'")
    p.add_argument("--N", type=int, help="particle number (product, separated)")
    p.add_argument("--lambda", dest="lambda", type=float, help="coupling (product, separated)")
    p.add_argument("--R", type=float, help="separation scale (separated)")
    p.add_argument("--widths", help="width sweep a:b:n written to sweep.csv")
    p.set_defaults(func=cmd_quotient)

    p = sub.add_parser("constants", parents=[common], help="print constants and golden checks")
    for flag, text in (("check", "golden-value checks (exit 1 on mismatch)"), ("hardy", "sharp Hardy constant"),
                       ("fdll", "Fefferman-de la Llave constant and its t-scaling"),
                       ("covering", "covering constants a (and b with --lambda)"),
                       ("pipeline", "explicit-constant pipeline"), ("mu", "mu-optimized ratio")):
        p.add_argument(f"--{flag}", action="store_true", help=text)
    p.add_argument("--d", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--lambda", dest="lambda", type=float)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("verify", parents=[common], help="run a seeded verification campaign")
    p.add_argument("campaign", choices=CAMPAIGNS)
    p.add_argument("--runs", type=int, help="densities per (d, k) for covering-campaign")
    p.add_argument("--seed", type=int, help=f"RNG seed (default {DEFAULT_SEED})")
    p.add_argument("--samples", type=int, help="sample count for loss-identity")
    p.add_argument("--count", type=int, help="configurations for lt-assembly")
    p.add_argument("--d", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--lambda", dest="lambda", type=float)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.quad_order is not None:
        if args.quad_order < 1:
            print("error: --quad-order must be >= 1", file=sys.stderr)
            return EXIT_USAGE
        os.environ["FRAC_LT_QUAD_ORDER"] = str(args.quad_order)
    out = Output(args.out, args.plot)
    try:
        return args.func(args, out)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FracLTError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
