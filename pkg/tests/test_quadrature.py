import math
import pickle

import mpmath as mp
import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from fraclt.errors import DivergenceError, EvaluationError, InvalidParameterError, SingularityError
from fraclt.geometry import Cube
from fraclt.quadrature import (ErrorEstimate, default_order, gauss_legendre, integrate_box, integrate_cube,
                               integrate_radial, integrate_singular_pair, total)


def test_error_estimate_behaves_like_float():
    e = ErrorEstimate(2.0, -0.5)
    assert e + 1 == 3.0 and e.stderr == 0.5
    assert e.scaled(-2.0).stderr == 1.0
    back = pickle.loads(pickle.dumps(e))
    assert float(back) == 2.0 and back.stderr == 0.5
    t = total([e, ErrorEstimate(1.0, 0.25)])
    assert float(t) == 3.0 and t.stderr == 0.75


@given(st.integers(1, 20))
def test_gauss_legendre_exact_for_polynomials(n):
    rule = gauss_legendre(n)
    deg = 2 * n - 1
    assert float(np.sum(rule.weights * rule.nodes ** deg)) == pytest.approx(0.0, abs=1e-13)
    even = deg - 1
    assert float(np.sum(rule.weights * rule.nodes ** even)) == pytest.approx(2 / (even + 1), rel=1e-12)


def test_default_order_env(monkeypatch):
    monkeypatch.delenv("FRAC_LT_QUAD_ORDER", raising=False)
    assert default_order() == 24
    monkeypatch.setenv("FRAC_LT_QUAD_ORDER", "12")
    assert default_order() == 12
    monkeypatch.setenv("FRAC_LT_QUAD_ORDER", "x")
    with pytest.raises(InvalidParameterError):
        default_order()


def test_integrate_cube_smooth_oracle():
    # exact value of the integral of exp(x + 2y) over [0, 1]^2
    est = integrate_cube(lambda x: np.exp(x[:, 0] + 2 * x[:, 1]), Cube.unit(2))
    exact = (math.e - 1) * (math.e ** 2 - 1) / 2
    assert float(est) == pytest.approx(exact, rel=1e-13)
    assert est.stderr < 1e-12


def test_integrate_box_reports_bad_node():
    with pytest.raises(EvaluationError) as info:
        integrate_box(lambda x: np.where(x[:, 0] > 0.5, np.nan, 1.0), [0.0], [1.0])
    assert info.value.node is not None


def _singular_oracle(sigma):
    # int_0^1 int_0^1 |x-y|^(1-2 sigma) dx dy, from sympy
    t = sp.symbols("t", positive=True)
    s = sp.Rational(sigma).limit_denominator(100)
    return float(sp.integrate(2 * (1 - t) * t ** (1 - 2 * s), (t, 0, 1)))


@pytest.mark.parametrize("sigma", [0.25, 0.5, 0.75])
def test_singular_pair_linear_function(sigma):
    G = lambda x, y: (x[:, 0] - y[:, 0]) ** 2
    est = integrate_singular_pair(G, Cube.unit(1), sigma)
    assert float(est) == pytest.approx(_singular_oracle(sigma), rel=1e-10)


def test_singular_pair_two_dimensions_against_mpmath():
    # G = |x - y|^2 on [0,1]^2, sigma = 1/2: integrand |z|^-1 integrated over the difference body
    G = lambda x, y: np.sum((x - y) ** 2, axis=1)
    est = integrate_singular_pair(G, Cube.unit(2), 0.5)
    f = lambda a, b: (1 - a) * (1 - b) / mp.sqrt(a * a + b * b)
    oracle = 4 * mp.quad(f, [0, 1], [0, 1])
    assert float(est) == pytest.approx(float(oracle), rel=1e-8)


def test_singular_pair_rejects_non_vanishing_integrand():
    with pytest.raises(SingularityError):
        integrate_singular_pair(lambda x, y: np.ones(len(x)), Cube.unit(1), 0.5)


def test_singular_pair_exponent_mismatch():
    with pytest.raises(InvalidParameterError):
        integrate_singular_pair(lambda x, y: np.zeros(len(x)), Cube.unit(1), 0.5, exponent=3.0)


@pytest.mark.parametrize("g,power,exact", [
    (lambda r: np.exp(-r), 0.0, 1.0),
    (lambda r: np.exp(-r * r), 2.0, math.sqrt(math.pi) / 4),
    (lambda r: np.exp(-r), -0.5, math.gamma(0.5)),
    (lambda r: 1 / (1 + r * r), 0.0, math.pi / 2),
])
def test_integrate_radial_oracles(g, power, exact):
    est = integrate_radial(g, power=power)
    assert float(est) == pytest.approx(exact, rel=1e-11)


def test_integrate_radial_oscillatory_bessel():
    from scipy.special import j0
    # Laplace transform of J0: 1 / sqrt(1 + a^2)
    est = integrate_radial(lambda r: j0(r) * np.exp(-0.3 * r), breakpoints=np.pi * np.arange(1, 30))
    assert float(est) == pytest.approx(1 / math.sqrt(1.09), rel=1e-11)


@pytest.mark.parametrize("g,a,b,power", [
    (lambda r: 1 / r, 0.0, 1.0, 0.0),
    (lambda r: 1 / r, 1.0, math.inf, 0.0),
    (lambda r: np.ones_like(r), 0.0, math.inf, 0.0),
])
def test_integrate_radial_divergence(g, a, b, power):
    with pytest.raises(DivergenceError):
        integrate_radial(g, a, b, power=power)
