import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from shapely.geometry import Point

from fraclt.density import BumpCompact, BumpMixture, Custom, Gaussian, GaussianMixture, IndicatorMixture
from fraclt.errors import DivergenceError, InvalidParameterError, PartitionOfUnityError
from fraclt.geometry import Cube
from fraclt.quadrature import gauss_legendre
from fraclt.seminorm import (SemiNormParams, energy_breakdown, fdll_constant, fdll_reconstruct, fdll_residual,
                             fractional_constant, gaussian_inverse_moment, hardy_constant, hardy_functional,
                             hs_fullspace, hs_seminorm_cube, lens_volume, loss_identity_residual,
                             point_moment, riesz_energy)


def test_fractional_constant_examples():
    assert fractional_constant(1, 0.5) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    # direct evaluation of the defining expression in mpmath
    d, sig = 3, mp.mpf(1) / 4
    expected = 2 ** (2 * sig - 1) / mp.pi ** (mp.mpf(d) / 2) * mp.gamma((d + 2 * sig) / 2) / abs(mp.gamma(-sig))
    assert fractional_constant(3, 0.25) == pytest.approx(float(expected), rel=1e-13)
    with pytest.raises(InvalidParameterError):
        fractional_constant(1, 1.0)


def test_hardy_constant_values():
    assert hardy_constant(3, 1.0) == pytest.approx(0.25, abs=1e-12)
    # s = 1 reduces to (d - 2)^2 / 4
    assert hardy_constant(5, 1.0) == pytest.approx(9 / 4, rel=1e-13)
    with pytest.raises(InvalidParameterError):
        hardy_constant(2, 1.0)


def test_multi_index_weights():
    p = SemiNormParams(2.0, 2)
    weights = {alpha: w for alpha, w in p.multi_indices}
    assert weights == {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0}
    q = SemiNormParams(1.25, 3)
    assert q.m == 1 and q.sigma == pytest.approx(0.25)


@pytest.mark.parametrize("d,s,w", [(1, 0.25, 1.0), (2, 0.5, 0.6), (3, 1.0, 1.7), (3, 0.5, 1.0), (2, 1.5, 0.8)])
def test_gaussian_kinetic_closed_form(d, s, w):
    # hand derivation: <u,(-Delta)^s u> = Gamma(s + d/2) / Gamma(d/2) / w^(2s)
    est = hs_fullspace(Gaussian(np.zeros(d), w), s)
    assert float(est) == pytest.approx(math.gamma(s + d / 2) / math.gamma(d / 2) * w ** (-2 * s), rel=1e-9)


@pytest.mark.parametrize("power", [1.5, 2.0, 4.0])
def test_bump_kinetic_matches_real_space_gradient(power):
    u = BumpCompact(np.zeros(3), 1.3, power)
    assert float(hs_fullspace(u, 1.0)) == pytest.approx(float(u.gradient_power_integral(2.0)), rel=1e-9)


def test_cube_seminorm_linear_function():
    u = Custom(lambda x: x[:, 0], 1, derivative=lambda a, x: np.ones(len(x)))
    est = hs_seminorm_cube(u, Cube.unit(1), 0.25)
    assert float(est) == pytest.approx(fractional_constant(1, 0.25) * 8 / 15, rel=1e-10)


def test_cube_seminorm_higher_order_uses_derivative():
    # s = 1 + 1/4 on x^2 / 2 reduces to the s = 1/4 form of x
    u = Custom(lambda x: 0.5 * x[:, 0] ** 2, 1,
               derivative=lambda a, x: x[:, 0] if a == (1,) else np.ones(len(x)))
    est = hs_seminorm_cube(u, Cube.unit(1), 1.25)
    assert float(est) == pytest.approx(fractional_constant(1, 0.25) * 8 / 15, rel=1e-10)


def test_cube_seminorm_integer_order_against_nquad():
    u = Gaussian(np.array([0.2, -0.1]), 0.8)
    Q = Cube.from_corner([0.0, 0.0], 1.0)
    f = lambda x, y: sum(float(u.derivative(a, np.array([[x, y]]))[0]) ** 2 for a in ((1, 0), (0, 1)))
    oracle, _ = integrate.nquad(f, [[0, 1], [0, 1]], opts={"epsrel": 1e-12})
    assert float(hs_seminorm_cube(u, Q, 1.0)) == pytest.approx(oracle, rel=1e-10)


def test_cube_seminorm_order_doubling_is_stable():
    u = Gaussian(np.array([0.3]), 0.4)
    a = hs_seminorm_cube(u, Cube.unit(1), 0.5, gauss_legendre(24))
    b = hs_seminorm_cube(u, Cube.unit(1), 0.5, gauss_legendre(48))
    assert abs(float(a) - float(b)) < 1e-8 * abs(float(b))


def test_gaussian_inverse_moment_against_hypergeometric():
    for d, m, var, gam in [(3, 0.7, 0.5, 1.0), (2, 2.0, 1.3, 0.5), (1, 10.0, 0.2, 0.5)]:
        oracle = ((2 * var) ** (-gam / 2) * mp.gamma((d - gam) / 2) / mp.gamma(d / 2)
                  * mp.hyp1f1(gam / 2, d / 2, -m * m / (2 * var)))
        assert float(gaussian_inverse_moment(d, m, var, gam)) == pytest.approx(float(oracle), rel=1e-9)


def test_gaussian_riesz_against_convolution_route():
    rho = GaussianMixture([0.4, 0.6], [[0.0], [1.5]], [0.3, 0.5])
    gam = 0.5
    # rho * rho(-.) is a Gaussian mixture in the difference variable
    terms = []
    for wi, ci, si in zip(rho.weights, rho.centers[:, 0], rho.widths):
        for wj, cj, sj in zip(rho.weights, rho.centers[:, 0], rho.widths):
            v = si * si + sj * sj
            terms.append((wi * wj, ci - cj, v))
    f = lambda z: sum(w * mp.exp(-(z - m) ** 2 / (2 * v)) / mp.sqrt(2 * mp.pi * v) for w, m, v in terms) * abs(z) ** -gam
    oracle = mp.quad(f, [-mp.inf, -1.5, 0, 1.5, mp.inf])
    assert float(riesz_energy(rho, gam)) == pytest.approx(float(oracle), rel=1e-9)


def test_bump_riesz_against_autocorrelation():
    rho = BumpMixture([1.0], [[0.0]], [1.0], [2.0])
    gam = 0.5
    b = lambda x: max(0.0, 1 - x * x) ** 2
    A = lambda z: integrate.quad(lambda x: b(x) * b(x + z), -1, 1 - z, epsabs=1e-14)[0]
    oracle = 2 * integrate.quad(A, 0, 2, weight="alg", wvar=(-gam, 0), epsabs=1e-13)[0]
    assert float(riesz_energy(rho, gam)) == pytest.approx(oracle, rel=1e-8)


def test_indicator_riesz_unit_interval():
    rho = IndicatorMixture([1.0], [Cube.unit(1)])
    for gam in (0.25, 0.5, 0.75):
        assert float(riesz_energy(rho, gam)) == pytest.approx(2 / ((1 - gam) * (2 - gam)), rel=1e-9)


def test_riesz_diverges_for_large_gamma():
    with pytest.raises(DivergenceError):
        riesz_energy(GaussianMixture([1.0], [[0.0]], [1.0]), 1.0)


def test_hardy_functional_gaussian_radial_oracle():
    u = Gaussian(np.zeros(3), 1.0)
    oracle = mp.quad(lambda r: 4 * mp.pi * mp.pi ** -1.5 * mp.exp(-r * r), [0, mp.inf])
    assert float(hardy_functional(u, 1.0)) == pytest.approx(float(oracle), rel=1e-12)


def test_bump_point_moment_off_centre():
    rho = BumpMixture([1.0], [[0.0]], [1.0], [3.0])
    p, gam = 0.4, 0.5
    f = lambda x: max(0.0, 1 - x * x) ** 3
    left = integrate.quad(f, -1, p, weight="alg", wvar=(0, -gam))[0]
    right = integrate.quad(f, p, 1, weight="alg", wvar=(-gam, 0))[0]
    assert float(point_moment(rho, gam, [p])) == pytest.approx(left + right, rel=1e-8)


def test_fdll_one_dimensional_closed_form():
    # in d = 1 the lens is an interval of length 2R - t, giving c = gam (1 + gam) / 2^(gam + 1)
    for gam in (0.25, 0.5, 0.75):
        assert fdll_constant(1, gam) == pytest.approx(gam * (1 + gam) / 2 ** (gam + 1), rel=1e-10)


@pytest.mark.parametrize("d,gam", [(1, 0.5), (2, 1.0), (3, 1.0), (3, 2.0)])
def test_fdll_scaling(d, gam):
    assert fdll_residual(d, gam) < 1e-6
    for t in (0.5, 2.0):
        assert t ** gam * fdll_reconstruct(d, gam, t) == pytest.approx(1.0, rel=1e-8)


def test_lens_volume_against_shapely():
    R, t = 1.0, 0.7
    area = Point(0, 0).buffer(R, quad_segs=4096).intersection(Point(t, 0).buffer(R, quad_segs=4096)).area
    assert float(lens_volume(2, t, R)) == pytest.approx(area, rel=1e-6)
    assert float(lens_volume(3, 2.5, 1.0)) == 0.0


@given(st.integers(0, 10 ** 6))
def test_loss_identity_random_partitions(seed):
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0, math.pi / 2, 2)
    chi = lambda x: np.cos(phase[int(x[0, 0] > 0)]) * np.ones(len(x))
    eta = lambda x: np.sin(phase[int(x[0, 0] > 0)]) * np.ones(len(x))
    vals = rng.normal(size=2) + 1j * rng.normal(size=2)
    u = lambda x: vals[int(x[0, 0] > 0)] * np.ones(len(x))
    res = loss_identity_residual(chi, eta, u, np.array([[-1.0]]), np.array([[1.0]]))
    assert np.all(np.abs(res) < 1e-12)


def test_loss_identity_requires_partition_of_unity():
    one = lambda x: np.ones(len(x))
    with pytest.raises(PartitionOfUnityError):
        loss_identity_residual(one, one, one, np.zeros((1, 1)), np.ones((1, 1)))


def test_energy_breakdown_gaussian():
    e = energy_breakdown(Gaussian(np.zeros(3), 1.0), 1.0)
    assert e.kinetic == pytest.approx(1.5, rel=1e-10)
    assert e.hardy == pytest.approx(2.0, rel=1e-10)
    assert e.riesz == pytest.approx(1.0, rel=1e-10)
    assert e.l2 == pytest.approx(1.0)
