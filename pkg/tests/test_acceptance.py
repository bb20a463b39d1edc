"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

A DEVIATION label marks a criterion whose literal wording cannot hold; the check
then asserts the corrected property instead.

Run under pytest for the summary section, or directly with
``python tests/test_acceptance.py`` to print the lines without pytest.
"""

import math
import time
from functools import lru_cache

import numpy as np

from fraclt.campaigns import S_VALUES, Q_VALUES, covering_campaign, lieb_oxford_campaign, loss_identity_campaign
from fraclt.campaigns import lt_assembly_campaign
from fraclt.density import BumpCompact, Custom, Gaussian
from fraclt.geometry import Cube
from fraclt.inequalities import (explicit_constant_pipeline, hlt_interpolation_quotient, iso_quotient,
                                 lambda_scaling_experiment, lt_interpolation_quotient, mu_ratio_closed_form,
                                 mu_ratio_numeric, separated_trial_quotient)
from fraclt.quadrature import gauss_legendre
from fraclt.seminorm import (fdll_reconstruct, fdll_residual, fractional_constant, hardy_constant, hs_fullspace,
                             hs_seminorm_cube)


@lru_cache(maxsize=None)
def _campaign():
    start = time.perf_counter()
    res = covering_campaign(runs=100, seed=7)
    return res, time.perf_counter() - start


def check_1():
    start = time.perf_counter()
    C, eps = explicit_constant_pipeline()
    elapsed = time.perf_counter() - start
    ok = 0.0023835 <= C <= 0.0023845 and elapsed < 1.0
    return ok, f"C*={C:.10f} eps*={eps:.5f} time={elapsed:.3f}s"


def check_2():
    # the sharp constant runs from 1 at s -> 0 down to 0 at s -> d/2, so it is strictly
    # monotone but decreasing; an increasing sequence is unattainable and is reported as a deviation
    h = hardy_constant(3, 1.0)
    ss = np.linspace(0, 1.5, 22)[1:-1]
    vals = np.array([hardy_constant(3, float(s)) for s in ss])
    steps = np.diff(vals)
    increasing = bool(np.all(steps > 0))
    decreasing = bool(np.all(steps < 0))
    ok = abs(h - 0.25) <= 1e-12 and bool(np.all(vals > 0)) and (increasing or decreasing)
    detail = (f"hardy(3,1)={h:.15f} points={len(vals)} min={vals.min():.3e} "
              f"increasing={increasing} decreasing={decreasing}")
    return ok, detail, None if increasing else "DEVIATION"


def check_3():
    res, elapsed = _campaign()
    rows = res.rows
    leaf = all(r["leaf_mass_ok"] for r in rows)
    excl = all(r[f"exclusion_ok_s{s}"] for r in rows for s in S_VALUES)
    center = all(r["center_property"] for r in rows if r["k"] == 3)
    ok = leaf and excl and center and elapsed < 300
    return ok, (f"runs={len(rows)} leaf_mass={leaf} exclusion={excl} center={center} "
                f"time={elapsed:.1f}s")


def check_4():
    res, _ = _campaign()
    keys = [f"weak_ok_s{s}_q{q}" for s in S_VALUES for q in Q_VALUES]
    n = sum(all(r[k] for k in keys) for r in res.rows)
    return n == len(res.rows) and set(Q_VALUES) == {1.0, 2.0}, f"weak exclusion {n}/{len(res.rows)} q={list(Q_VALUES)}"


def check_5():
    res, _ = _campaign()
    n = sum(all(r[f"families_ok_s{s}"] for s in S_VALUES) for r in res.rows)
    return n == len(res.rows), f"family invariants {n}/{len(res.rows)}"


def check_6():
    worst = 0.0
    for d, s in [(1, 0.25), (2, 0.5), (3, 1.0), (3, 0.5)]:
        exact = math.gamma(s + d / 2) / math.gamma(d / 2)
        worst = max(worst, abs(float(hs_fullspace(Gaussian(np.zeros(d), 1.0), s)) / exact - 1))
    return worst <= 1e-6, f"max rel err={worst:.2e}"


def check_7():
    u = Custom(lambda x: x[:, 0], 1, derivative=lambda a, x: np.ones(len(x)))
    expected = fractional_constant(1, 0.25) * 8 / 15
    a = float(hs_seminorm_cube(u, Cube.unit(1), 0.25, gauss_legendre(24)))
    b = float(hs_seminorm_cube(u, Cube.unit(1), 0.25, gauss_legendre(48)))
    rel = abs(a / expected - 1)
    ok = rel <= 1e-5 and abs(a - b) < 1e-6
    return ok, f"rel err={rel:.2e} doubling change={abs(a - b):.2e}"


def check_8():
    worst_fit, worst_res = 0.0, 0.0
    for d, gam in [(1, 0.5), (2, 1.0), (3, 1.0), (3, 2.0)]:
        worst_res = max(worst_res, fdll_residual(d, gam))
        for t in (0.5, 1.0, 2.0, 4.0):
            worst_fit = max(worst_fit, abs(t ** gam * fdll_reconstruct(d, gam, t) - 1))
    ok = worst_fit <= 1e-4 and worst_res < 1e-6
    return ok, f"max rel err={worst_fit:.2e} max residual={worst_res:.2e}"


MU_PAIRS = [(1, 0.1), (1, 0.25), (1, 0.4), (2, 0.25), (2, 0.5), (2, 0.9), (3, 0.5), (3, 1.0), (3, 1.4), (4, 1.5)]


def check_9():
    worst = max(abs(mu_ratio_closed_form(s, d) - mu_ratio_numeric(s, d)) for d, s in MU_PAIRS)
    return worst <= 1e-6, f"pairs={len(MU_PAIRS)} max diff={worst:.2e}"


def check_10():
    start = time.perf_counter()
    parts, ok = [], True
    for d, s in [(3, 1.0), (1, 0.25)]:
        fit = lambda_scaling_experiment(s, d, lambdas=np.geomspace(1e-4, 1e-1, 13))
        ok &= 0.9 * fit.expected <= fit.slope <= 1.1 * fit.expected
        parts.append(f"({d},{s:g}) slope={fit.slope:.4f} target={fit.expected:.4f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    return ok, " ".join(parts) + f" time={elapsed:.1f}s"


def check_11():
    profile = BumpCompact(np.zeros(3), 1.0)
    qs = [separated_trial_quotient(profile, 5, R, 1.0, 1.0) for R in (10.0, 20.0, 40.0, 80.0)]
    vals = [float(q.quotient) for q in qs]
    gn = qs[-1].details["gn_quotient"]
    decreasing = all(a > b for a, b in zip(vals, vals[1:]))
    excess = vals[-1] / gn - 1
    ok = decreasing and 0 <= excess < 0.02
    return ok, f"values={[round(v, 6) for v in vals]} gn={gn:.6f} excess={excess:.2e}"


def check_12():
    worst = 0.0
    for u in (Gaussian(np.zeros(3), 1.0), BumpCompact(np.zeros(3), 1.0, 3.0)):
        base_lt = lt_interpolation_quotient(u, 1.0).quotient
        base_iso = iso_quotient(u, 1.0).quotient
        for lam in (0.5, 2.0, 7.0):
            v = u.dilate(lam)
            worst = max(worst, abs(lt_interpolation_quotient(v, 1.0).quotient / base_lt - 1),
                        abs(iso_quotient(v, 1.0).quotient / base_iso - 1))
    return worst <= 1e-8, f"max rel change={worst:.2e}"


def hardy_family(d, size=50):
    gauss = [Gaussian(np.zeros(d), float(w)) for w in np.geomspace(0.2, 5.0, size // 2)]
    radii = np.geomspace(0.3, 4.0, size - size // 2)
    powers = [2.0, 3.0, 4.0, 6.0, 8.0]
    bumps = [BumpCompact(np.zeros(d), float(r), powers[i % len(powers)]) for i, r in enumerate(radii)]
    return gauss + bumps


def check_13():
    parts, ok = [], True
    for d, s in [(3, 1.0), (3, 0.5), (2, 0.5)]:
        reps = [hlt_interpolation_quotient(u, s) for u in hardy_family(d)]
        margins = [r.details["hardy_gap"] + r.tol for r in reps]
        ok &= len(reps) == 50 and min(margins) >= 0
        parts.append(f"({d},{s:g}) min gap={min(r.details['hardy_gap'] for r in reps):.3e}")
    unit = hlt_interpolation_quotient(Gaussian(np.zeros(3), 1.0), 1.0).details["hardy_gap"]
    ok &= abs(unit - 1.0) <= 1e-6
    return ok, " ".join(parts) + f" unit gap={unit:.10f}"


def check_14():
    loss = loss_identity_campaign(samples=1000, seed=7)
    lo = lieb_oxford_campaign()
    resid = lo.rows[0]["max_identity_residual"]
    ok = loss.ok and loss.runs == 1000 and lo.ok and resid < 1e-12
    return ok, f"loss identity {loss.passed}/{loss.runs} lieb-oxford residual={resid:.1e}"


def check_15():
    res = lt_assembly_campaign(count=10, seed=7, lam=1.0, s=1.0)
    modes = sorted({r["covering_mode"] for r in res.rows})
    return res.ok and res.runs == 10, f"configs {res.passed}/{res.runs} covering_mode={modes}"


CHECKS = {n: globals()[f"check_{n}"] for n in range(1, 16)}


def evaluate(number):
    """Return (ok, status label, detail) for one criterion."""
    ok, detail, *note = CHECKS[number]()
    label = "FAIL" if not ok else (note[0] if note and note[0] else "PASS")
    return ok, label, detail


def _run(number, acceptance_log):
    ok, label, detail = evaluate(number)
    acceptance_log(number, label, detail)
    print(f"criterion {number:2d}: {label}  {detail}")
    assert ok, detail


def test_criterion_01_pipeline_constant(acceptance_log):
    _run(1, acceptance_log)


def test_criterion_02_hardy_constant(acceptance_log):
    _run(2, acceptance_log)


def test_criterion_03_covering_campaign(acceptance_log):
    _run(3, acceptance_log)


def test_criterion_04_weak_covering(acceptance_log):
    _run(4, acceptance_log)


def test_criterion_05_family_invariants(acceptance_log):
    _run(5, acceptance_log)


def test_criterion_06_gaussian_kinetic(acceptance_log):
    _run(6, acceptance_log)


def test_criterion_07_cube_seminorm(acceptance_log):
    _run(7, acceptance_log)


def test_criterion_08_fdll(acceptance_log):
    _run(8, acceptance_log)


def test_criterion_09_mu_ratio(acceptance_log):
    _run(9, acceptance_log)


def test_criterion_10_lambda_scaling(acceptance_log):
    _run(10, acceptance_log)


def test_criterion_11_separated_trial(acceptance_log):
    _run(11, acceptance_log)


def test_criterion_12_dilation_invariance(acceptance_log):
    _run(12, acceptance_log)


def test_criterion_13_hardy_gap(acceptance_log):
    _run(13, acceptance_log)


def test_criterion_14_identities(acceptance_log):
    _run(14, acceptance_log)


def test_criterion_15_lt_assembly(acceptance_log):
    _run(15, acceptance_log)


if __name__ == "__main__":
    failures = 0
    for n in CHECKS:
        ok, label, detail = evaluate(n)
        failures += not ok
        print(f"criterion {n:2d}: {label}  {detail}", flush=True)
    raise SystemExit(1 if failures else 0)
