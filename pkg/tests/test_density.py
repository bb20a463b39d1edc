import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from shapely.geometry import Point, box

from fraclt.density import (BumpCompact, BumpMixture, Custom, Gaussian, GaussianMixture, GridSampled,
                            IndicatorMixture, ball_volume, bessel_ratio, maximal_function, sphere_area)
from fraclt.errors import CapabilityError, DimensionMismatchError, InvalidParameterError
from fraclt.geometry import Cube


def test_sphere_and_ball_constants():
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert ball_volume(2) == pytest.approx(math.pi)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_gaussian_mixture_cube_mass_against_nquad():
    rho = GaussianMixture([1.0, 2.0], [[0.2, 0.4], [0.7, 0.5]], [0.1, 0.3])
    Q = Cube.from_corner([0.0, 0.0], 0.6)
    oracle, _ = integrate.nquad(lambda x, y: float(rho(np.array([[x, y]]))[0]), [[0, 0.6], [0, 0.6]],
                                opts={"epsabs": 1e-13, "epsrel": 1e-12})
    assert float(rho.mass(Q)) == pytest.approx(oracle, rel=1e-9)


def test_gaussian_ball_mass_closed_forms():
    # centred balls follow a chi-square law; a ball in d = 1 is an interval
    rho = GaussianMixture([1.0], [[0.0]], [1.0])
    from scipy.stats import norm
    assert float(rho.ball_mass([0.3], 0.8)) == pytest.approx(norm.cdf(1.1) - norm.cdf(-0.5), rel=1e-13)
    rho3 = GaussianMixture([2.0], [[0.0, 0.0, 0.0]], [0.5])
    from scipy.stats import chi2
    assert float(rho3.ball_mass([0, 0, 0], 1.0)) == pytest.approx(2 * chi2.cdf(4.0, 3), rel=1e-13)


def test_gaussian_masses_vectorized_matches_scalar():
    rho = GaussianMixture([1.0, 0.5], [[0.1, 0.1, 0.1], [0.9, 0.2, 0.4]], [0.2, 0.05])
    cubes = [Cube((0.25, 0.25, 0.25), 0.5), Cube((0.75, 0.25, 0.25), 0.5)]
    for Q, m in zip(cubes, rho.masses(cubes)):
        assert float(m) == pytest.approx(float(rho.mass(Q)), rel=1e-14)


def test_bump_mixture_mass_and_total():
    rho = BumpMixture([3.0], [[0.0, 0.0]], [1.0], [2.0])
    # int (1 - r^2)^2 over the unit disc = pi / 3
    assert rho.total_mass == pytest.approx(math.pi, rel=1e-13)
    assert float(rho.mass(Cube.from_corner([0, 0], 1.0))) == pytest.approx(math.pi / 4, rel=1e-10)
    f = lambda y, x: 3 * max(0.0, 1 - x * x - y * y) ** 2
    oracle, _ = integrate.dblquad(f, -0.3, 0.6, 0.2, 1.1, epsabs=1e-13, epsrel=1e-12)
    assert float(rho.mass(Cube.from_corner([-0.3, 0.2], 0.9))) == pytest.approx(oracle, rel=1e-8)


def test_indicator_ball_mass_against_shapely():
    rho = IndicatorMixture([1.0], [Cube.from_corner([4.0, 4.0], 1.0)])
    disc = Point(4.5, 4.5).buffer(0.8, quad_segs=4096)
    oracle = disc.intersection(box(4, 4, 5, 5)).area
    assert float(rho.ball_mass([4.5, 4.5], 0.8)) == pytest.approx(oracle, rel=1e-6)


def test_indicator_mass_exact():
    rho = IndicatorMixture([2.0, 1.0], [Cube.unit(2), Cube.from_corner([0.5, 0.5], 1.0)])
    assert float(rho.mass(Cube.from_corner([0.5, 0.5], 0.5))) == pytest.approx(0.75)
    assert rho.total_mass == pytest.approx(3.0)


def test_grid_sampled_mass_of_linear_ramp():
    Q = Cube.unit(2)
    xs = np.linspace(0, 1, 5)
    samples = np.add.outer(xs, xs)
    rho = GridSampled(Q, samples)
    assert float(rho.mass(Q)) == pytest.approx(1.0, rel=1e-12)
    assert float(rho.mass(Cube.from_corner([0, 0], 0.5))) == pytest.approx(0.125, rel=1e-12)


def test_dimension_checks():
    rho = GaussianMixture([1.0], [[0.0, 0.0]], [1.0])
    with pytest.raises(DimensionMismatchError):
        rho.mass(Cube.unit(3))
    with pytest.raises(InvalidParameterError):
        rho.ball_mass([0.0, 0.0], -1.0)


@given(st.floats(0.2, 3.0), st.floats(-1, 1))
def test_maximal_function_dominates_value(width, shift):
    # the grid starts at R = 1e-3, so the small-ball average may sit below rho(u) by O(R^2 / width^2)
    rho = GaussianMixture([1.0], [[0.0]], [width])
    value = float(rho(np.array([[shift]]))[0])
    assert maximal_function(rho, [shift]) >= value * (1 - 1e-5)


def test_bessel_ratio_continuity():
    for mu in (0.5, 1.5, 4.5):
        small = bessel_ratio(mu, 1e-4 * (1 - 1e-9))
        big = bessel_ratio(mu, 1e-4 * (1 + 1e-9))
        assert small == pytest.approx(big, rel=1e-10)
        assert bessel_ratio(mu, 0.0) == pytest.approx(0.5 ** mu / math.gamma(mu + 1))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_gaussian_trial_normalized_and_density_mass(d):
    u = Gaussian(np.zeros(d), 0.7)
    assert u.l2_norm_sq() == pytest.approx(1.0, rel=1e-14)
    assert u.density().total_mass == pytest.approx(1.0, rel=1e-14)


def test_gaussian_fourier_plancherel():
    u = Gaussian(np.zeros(2), 1.3)
    val, _ = integrate.quad(lambda p: 2 * math.pi * p * float(u.fourier_abs_sq(np.array([p]))[0]), 0, np.inf)
    assert val == pytest.approx(1.0, rel=1e-10)


def test_bump_trial_normalization_and_gradient():
    u = BumpCompact(np.zeros(1), 1.0, 2.0)
    val, _ = integrate.quad(lambda x: float(u(np.array([[x]]))[0]) ** 2, -1, 1)
    assert val == pytest.approx(1.0, rel=1e-12)
    grad, _ = integrate.quad(lambda x: float(u.derivative((1,), np.array([[x]]))[0]) ** 2, -1, 1)
    assert float(u.gradient_power_integral(2.0)) == pytest.approx(grad, rel=1e-10)


def test_scaled_profile_dilation_keeps_norm():
    u = BumpCompact(np.zeros(3), 1.0)
    v = u.dilate(2.5)
    assert v.l2_norm_sq() == pytest.approx(1.0, rel=1e-13)
    assert v.density().total_mass == pytest.approx(1.0, rel=1e-12)


def test_custom_finite_difference_derivative():
    u = Custom(lambda x: np.sin(x[:, 0]), 1, fd_step=1e-3)
    x = np.array([[0.3]])
    assert float(u.derivative((1,), x)[0]) == pytest.approx(math.cos(0.3), rel=1e-10)
    with pytest.raises(CapabilityError):
        u.fourier_abs_sq(np.array([1.0]))
