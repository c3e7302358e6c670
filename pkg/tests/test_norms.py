import math

import numpy as np
import pytest

from ballgeom import Params
from errors import DivergenceError, DomainError, ParameterError, PreconditionError
from norms import (
    HALF_PI,
    TRIANGLE_FACTOR,
    C_const,
    J_ct_at_origin,
    J_ct_boundary,
    J_ct_closed,
    J_ct_mc,
    J_ct_series,
    MultiIndex,
    ball_moment,
    ell,
    ell_endpoints,
    ell_half_pi_series,
    ell_many,
    ell_scan,
    norm_bounds,
    scan_grid,
    sphere_moment,
)

C2 = Params(2, 0.0)


def assert_within(estimate, target, sigmas=4.0):
    assert abs(estimate.value - target) <= sigmas * estimate.std_error


def test_C_const_matches_params():
    for p in (Params(1, 0.0), C2, Params(4, -0.5)):
        assert C_const(p) == p.C_const
    assert C_const(C2) == pytest.approx(6.0, rel=1e-13)


def test_J_ct_at_origin():
    assert J_ct_at_origin(0.0, C2) == pytest.approx(1.0)
    assert J_ct_at_origin(1.0, C2) == pytest.approx(2.0 / 6.0)
    assert J_ct_closed(-1.0, 1.0, 0.0, C2) == pytest.approx(1.0 / 3.0)


@pytest.mark.parametrize("c, t, r", [(-1.0, 0.0, 0.5), (-1.0, 1.0, 0.9), (0.5, 0.0, 0.3), (-0.5, 2.0, 0.7)])
def test_series_agrees_with_closed_form(c, t, r):
    series = J_ct_series(c, t, r, C2, 2000)
    closed = J_ct_closed(c, t, r, C2)
    assert abs(series.value - closed) <= 1e-8 * closed + series.tail_bound
    assert series.terms == 2000


def test_series_tail_bound_holds_for_few_terms():
    series = J_ct_series(-1.0, 0.0, 0.5, C2, 5)
    closed = J_ct_closed(-1.0, 0.0, 0.5, C2)
    assert 0.0 < closed - series.value <= series.tail_bound


def test_closed_form_tends_to_boundary_value():
    near = J_ct_closed(-0.5, 0.0, math.sqrt(1.0 - 1e-8), C2)
    assert near == pytest.approx(J_ct_boundary(-0.5, 0.0, C2), rel=1e-3)


@pytest.mark.parametrize("p", [Params(1, 0.0), C2, Params(3, 0.5), Params(2, -0.5)])
def test_boundary_value_gives_C(p):
    assert p.theta * p.c_alpha * J_ct_boundary(-1.0, p.alpha, p) == pytest.approx(p.C_const, rel=1e-10)


def test_J_ct_domain():
    with pytest.raises(DivergenceError):
        J_ct_boundary(0.0, 0.0, C2)
    with pytest.raises(DomainError):
        J_ct_closed(-1.0, -1.0, 0.5, C2)
    with pytest.raises(DomainError):
        J_ct_closed(-1.0, 0.0, 1.0, C2)
    with pytest.raises(DomainError):
        J_ct_series(-1.0, 0.0, 0.5, C2, 0)


def test_J_ct_monte_carlo(quick_spec):
    z = np.array([0.5, 0.0])
    estimate = J_ct_mc(-1.0, 1.0, z, C2, quick_spec)
    assert_within(estimate, J_ct_closed(-1.0, 1.0, 0.5, C2))


def test_moments():
    assert sphere_moment(MultiIndex((1.0, 0.0))) == pytest.approx(2.0 / 3.0)
    assert sphere_moment(MultiIndex((0.0, 0.0, 0.0))) == pytest.approx(1.0)
    assert ball_moment(MultiIndex((2.0, 0.0)), C2) == pytest.approx(1.0 / 3.0)
    assert ball_moment(MultiIndex((0.0, 0.0)), Params(2, 1.5)) == pytest.approx(1.0)


def test_multi_index_validation():
    with pytest.raises(ParameterError):
        MultiIndex((-1.0, 0.0))
    with pytest.raises(ParameterError):
        MultiIndex(())
    with pytest.raises(ParameterError):
        ball_moment(MultiIndex((1.0,)), C2)
    assert MultiIndex((1, 2.5)).order == 3.5


def test_ball_moment_monte_carlo(quick_spec):
    from integrate import mc_integrate

    eta = MultiIndex((0.5, 1.5))
    p = Params(2, 1.0)
    assert_within(mc_integrate(eta.monomial, p, quick_spec), ball_moment(eta, p))


@pytest.mark.parametrize("p", [C2, Params(2, 1.0), Params(3, 0.5)])
def test_ell_half_pi_series_route(p):
    value, mismatch = ell_half_pi_series(p)
    assert mismatch < 1e-10
    assert value == pytest.approx(HALF_PI * p.C_const, rel=1e-9)


def test_ell_endpoints():
    left, right = ell_endpoints(C2)
    assert left == pytest.approx(6.0)
    assert right == pytest.approx(3.0 * math.pi)


def test_ell_preconditions(quick_spec):
    with pytest.raises(PreconditionError):
        ell(0.5, Params(1, 0.0), quick_spec)
    with pytest.raises(PreconditionError):
        ell_half_pi_series(Params(1, 0.0))
    with pytest.raises(DomainError):
        ell(2.0, C2, quick_spec)


def test_ell_endpoint_estimates(quick_spec):
    estimate = ell_many([0.0, HALF_PI], C2, quick_spec)
    assert estimate.method == "mc-stratified"
    assert_within(estimate.component(0), 6.0)
    assert_within(estimate.component(1), 3.0 * math.pi)


def test_ell_single_value_uses_reduced_law(quick_spec):
    p = Params(3, 0.5)
    estimate = ell(0.0, p, quick_spec)
    assert_within(estimate, p.C_const)


def test_ell_scan(quick_spec):
    scan = ell_scan(C2, 9, quick_spec)
    assert len(scan.rows) == 9
    np.testing.assert_allclose([row.t for row in scan.rows], scan_grid(9))
    assert scan.argmax_t in [row.t for row in scan.rows]
    assert scan.differences[-1] == 0.0
    assert scan.difference_errors[-1] == 0.0
    assert scan.conjectured_value == pytest.approx(3.0 * math.pi)
    assert scan.triangle_bound == pytest.approx(TRIANGLE_FACTOR * 6.0)
    for row in scan.rows:
        assert row.lower_bound <= row.upper_bound
        assert row.estimate <= row.upper_bound + 4.0 * row.std_error
        assert row.estimate >= row.lower_bound - 4.0 * row.std_error
    assert isinstance(scan.verdict, bool)


def test_ell_scan_needs_nine_points(quick_spec):
    with pytest.raises(ParameterError):
        ell_scan(C2, 8, quick_spec)


def test_norm_bounds():
    bounds = norm_bounds(C2)
    assert bounds.bloch_lower == pytest.approx(6.0)
    assert bounds.bloch_upper == pytest.approx(7.0)
    assert bounds.invariant_lower == pytest.approx(3.0 * math.pi)
    assert bounds.invariant_upper == pytest.approx(1.0 + 3.0 * math.sqrt(math.pi**2 + 4.0))


def test_ell_scan_argmax_survives_a_doubled_budget(quick_spec):
    from dataclasses import replace

    doubled = replace(quick_spec, samples=2 * quick_spec.samples, chunks=2 * quick_spec.chunks)
    assert ell_scan(C2, 9, quick_spec).argmax_t == ell_scan(C2, 9, doubled).argmax_t
