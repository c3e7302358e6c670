import math

import numpy as np
import pytest

import appendix
from errors import DomainError

HALF_PI = 0.5 * math.pi


def test_ellipse_axes():
    axes = appendix.ellipse_axes(1.0, math.pi / 4)
    assert axes.a_axis == pytest.approx(math.sqrt(2.0))
    assert axes.b_axis == pytest.approx(0.0, abs=1e-15)
    assert axes.m == pytest.approx(1.0)
    assert appendix.ellipse_axes(0.5, 0.0).m == 0.0


def test_R0():
    assert appendix.R0(0.5, 0.0) == pytest.approx(3.0)
    assert appendix.R0(0.5, math.pi) == pytest.approx(1.0 / 3.0)
    np.testing.assert_allclose(appendix.R0(np.array([0.5, 0.5]), np.array([0.0, math.pi])), [3.0, 1.0 / 3.0])
    for p in (0.0, 1.0):
        with pytest.raises(DomainError):
            appendix.R0(p, 0.0)


@pytest.mark.parametrize("R, t", [(0.0, 0.3), (0.5, 0.7), (1.0, math.pi / 4), (2.5, 1.2), (3.0, 0.01)])
def test_h_closed_matches_quadrature(R, t):
    assert appendix.h_closed(R, t) == pytest.approx(appendix.h_direct(R, t), abs=1e-9)


def test_h_special_values():
    assert appendix.h_closed(0.0, 0.4) == pytest.approx(2.0 * math.pi * math.cos(0.4))
    assert appendix.h_closed(1.7, 0.0) == pytest.approx(2.0 * math.pi)
    values = appendix.h_closed(np.array([0.0, 1.0]), HALF_PI)
    np.testing.assert_allclose(values, [0.0, 2.0 * math.pi], atol=1e-14)


def test_h_grid_deviation():
    assert appendix.h_grid_deviation() < 1e-9


def test_h_prime_closed_matches_finite_difference():
    check = appendix.h_prime_check()
    assert check.closed == pytest.approx(check.finite_difference, rel=1e-6)
    assert check.ratio_to_display == pytest.approx(4.0, rel=1e-5)
    assert check.display == pytest.approx(check.closed / 4.0)


@pytest.mark.parametrize("R, t", [(0.3, 0.2), (2.0, 1.0), (1.0, 0.6)])
def test_h_prime_at_other_points(R, t):
    step = 1e-5
    fd = (appendix.h_closed(R, t + step) - appendix.h_closed(R, t - step)) / (2.0 * step)
    assert appendix.h_prime_closed(R, t) == pytest.approx(fd, rel=1e-5, abs=1e-7)


def test_h_prime_is_evaluated_inside_the_interval():
    for t in (0.0, HALF_PI):
        with pytest.raises(DomainError):
            appendix.h_prime_closed(0.5, t)


def test_h_prime_vanishes_at_the_endpoints():
    for R, eps, near_zero, near_half_pi in appendix.h_prime_endpoint_values():
        if eps == 1e-4:
            assert abs(near_zero) < 0.05
            assert abs(near_half_pi) < 0.05


@pytest.mark.parametrize("t, expected", [(0.0, 2.0), (math.pi / 4, 2.701288), (HALF_PI, math.pi)])
def test_radial_I(t, expected):
    estimate = appendix.I_of_t_radial(t)
    assert estimate.value == pytest.approx(expected, abs=2e-6)
    assert estimate.method == "radial-quadrature"


def test_radial_I_increases():
    values = [appendix.I_of_t_radial(t).value for t in np.linspace(0.0, HALF_PI, 7)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_radial_I_domain():
    with pytest.raises(DomainError):
        appendix.I_of_t_radial(-0.1)


def test_monte_carlo_I(quick_spec):
    estimate = appendix.I_of_t_many([0.0, math.pi / 4, HALF_PI], quick_spec)
    for i, target in enumerate((2.0, 2.701288, math.pi)):
        assert abs(estimate.value[i] - target) <= 4.0 * estimate.std_error[i]
    single = appendix.I_of_t(HALF_PI, quick_spec)
    assert single.value == pytest.approx(estimate.value[2])


def test_stationarity_functionals_on_a_line():
    ts, names, rows = appendix.stationarity_functionals()
    assert len(ts) == 8
    assert len(names) == len(rows) == 10
    values = dict(zip(names, rows @ (3.0 * ts + 1.0)))
    for name, value in values.items():
        expected = 0.0 if name.startswith("second_difference") else 3.0
        assert value == pytest.approx(expected, abs=1e-8)


def test_stationarity_report(quick_spec):
    report = appendix.stationarity_report(quick_spec)
    for end in ("zero", "half_pi"):
        name = f"extrapolated_slope_{end}"
        assert abs(report.radial[name]) < 1e-3
        value, sigma = report.monte_carlo[name]
        assert abs(value) <= 4.0 * sigma
    assert report.radial["second_difference_half_pi_h0.02"] == pytest.approx(-HALF_PI, rel=0.05)
    assert len(report.h_prime_limits) == 9
