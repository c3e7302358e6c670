import numpy as np
import pytest

from ballgeom import Params, unit_vector
from errors import IntegrationError, ParameterError, PreconditionError
from integrate import (
    QuadratureSpec,
    chunk_generator,
    mc_integrate,
    mc_integrate_sphere,
    pole_frame,
    pole_of,
    reduce_marginal,
    sample_ball_valpha,
    sample_sphere,
    shell_count,
    shell_edges,
    stratified_singular,
)
from norms import J_ct_closed, MultiIndex, ball_moment


def assert_within(estimate, target, sigmas=4.0):
    assert abs(estimate.value - target) <= sigmas * estimate.std_error


@pytest.mark.parametrize("kwargs", [
    {"samples": 999, "chunks": 1},
    {"samples": 10000, "chunks": 3},
    {"seed": -1},
    {"seed": 2**64},
    {"workers": 0},
    {"shells": 0},
    {"exponent_guard": 0.0},
])
def test_spec_validation(kwargs):
    with pytest.raises(ParameterError):
        QuadratureSpec(**kwargs)


def test_spec_per_chunk():
    spec = QuadratureSpec(samples=64000, chunks=64)
    assert spec.per_chunk == 1000
    assert spec.with_samples(128000).per_chunk == 2000


def test_chunk_streams():
    first = chunk_generator(11, 3).random(5)
    np.testing.assert_array_equal(first, chunk_generator(11, 3).random(5))
    assert not np.array_equal(first, chunk_generator(11, 4).random(5))
    assert not np.array_equal(first, chunk_generator(12, 3).random(5))


def test_sphere_samples_have_unit_norm():
    points = sample_sphere(3, chunk_generator(1, 0), 500)
    assert points.shape == (500, 3)
    np.testing.assert_allclose(np.linalg.norm(points, axis=1), 1.0, rtol=1e-14)
    assert sample_sphere(2, chunk_generator(1, 0)).shape == (2,)


def test_ball_samples_mean_squared_radius():
    p = Params(2, 0.5)
    points = sample_ball_valpha(p, chunk_generator(5, 0), 40000)
    radius = np.sum(np.abs(points) ** 2, axis=1)
    assert np.all(radius < 1.0)
    error = radius.std(ddof=1) / np.sqrt(radius.size)
    assert abs(radius.mean() - p.n / (p.n + p.alpha + 1.0)) <= 4.0 * error


def test_reduce_marginal():
    assert reduce_marginal(Params(3, 0.5), 1) == Params(1, 2.5)
    assert reduce_marginal(Params(3, 0.5), 2) == Params(2, 1.5)
    p = Params(2, 0.0)
    assert reduce_marginal(p, 2) is p
    for k in (0, 3):
        with pytest.raises(PreconditionError):
            reduce_marginal(p, k)


def test_constant_integrand_is_exact(quick_spec):
    estimate = mc_integrate(lambda w: np.ones(w.shape[0]), Params(3, 1.0), quick_spec)
    assert estimate.value == 1.0
    assert estimate.std_error == 0.0
    assert estimate.samples == quick_spec.samples
    assert estimate.method == "mc"


def test_reduced_integration(quick_spec):
    p = Params(3, 0.5)
    f = lambda w: np.abs(w[:, 0]) ** 2  # noqa: E731
    reduced = mc_integrate(f, p, quick_spec, depends_on=1)
    assert reduced.method == "mc-reduced"
    assert_within(reduced, 1.0 / p.theta)
    assert mc_integrate(f, p, quick_spec, depends_on=3).method == "mc"


def test_results_do_not_depend_on_workers(quick_spec):
    p = Params(2, 0.0)
    f = lambda w: np.abs(w[:, 0] - 0.3 * w[:, 1])  # noqa: E731
    serial = mc_integrate(f, p, quick_spec)
    again = mc_integrate(f, p, quick_spec)
    threaded = mc_integrate(f, p, QuadratureSpec(seed=7, samples=64000, chunks=64, workers=4))
    assert serial.value == again.value
    assert serial.value == threaded.value
    assert serial.std_error == threaded.std_error


def test_vector_integrand_components(quick_spec):
    estimate = mc_integrate(lambda w: np.abs(w) ** 2, Params(2, 0.0), quick_spec)
    assert estimate.value.shape == (2,)
    assert_within(estimate.component(1), 1.0 / 3.0)
    assert estimate.scaled(-2.0).std_error[0] == pytest.approx(2.0 * estimate.std_error[0])


def test_non_finite_integrand_raises(quick_spec):
    with pytest.raises(IntegrationError):
        mc_integrate(lambda w: np.full(w.shape[0], np.nan), Params(1, 0.0), quick_spec)


def test_sphere_integration(quick_spec):
    estimate = mc_integrate_sphere(lambda z: np.abs(z[:, 0]) ** 2, 3, quick_spec)
    assert_within(estimate, 1.0 / 3.0)


def test_shell_edges():
    edges = shell_edges(16)
    assert len(edges) == 17
    assert edges[0] == (1.0, 2.0)
    assert edges[-1] == (0.0, 2.0 ** -15)
    assert all(lo == next_hi for (lo, _), (_, next_hi) in zip(edges[:-2], edges[1:-1]))


def test_shell_count_reaches_below_an_interior_pole():
    assert shell_count(16) == 16
    assert shell_count(16, 0.1) == 16
    assert shell_count(16, 1e-6) == 27
    edges = shell_edges(shell_count(16, 1e-6))
    assert edges[-1][1] <= 1e-6 / 64
    with pytest.raises(PreconditionError):
        shell_count(16, 0.0)


def test_pole_frame_is_unitary():
    pole = np.array([0.6, 0.8j, 0.0])
    frame = pole_frame(pole)
    np.testing.assert_allclose(frame.conj().T @ frame, np.eye(3), atol=1e-14)
    np.testing.assert_allclose(frame[:, 0], pole, atol=1e-14)


def test_pole_of():
    np.testing.assert_array_equal(pole_of(np.zeros(2)), unit_vector(2))
    np.testing.assert_allclose(pole_of(np.array([0.0, 0.5j])), [0.0, 1j])


def test_stratified_total_mass(quick_spec):
    estimate = stratified_singular(lambda w: np.ones(w.shape[0]), Params(2, 0.0), 2.0, quick_spec)
    assert estimate.method == "mc-stratified"
    assert_within(estimate, 1.0)


def test_stratified_singular_boundary_integral(quick_spec):
    # int |1 - w_1|^-2 dv on the ball of C^2 equals 2
    p = Params(2, 0.0)
    estimate = stratified_singular(lambda w: np.abs(1.0 - w[:, 0]) ** -2.0, p, 2.0, quick_spec)
    assert_within(estimate, 2.0)


def test_stratified_with_pole(quick_spec):
    pole = np.array([0.0, 1j])
    p = Params(2, 0.0)
    f = lambda w: np.abs(1.0 - w[:, 1] * np.conj(pole[1])) ** -2.0  # noqa: E731
    assert_within(stratified_singular(f, p, 2.0, quick_spec, pole=pole), 2.0)


def test_stratified_detects_divergence(quick_spec):
    with pytest.raises(IntegrationError):
        stratified_singular(lambda w: np.abs(1.0 - w[:, 0]) ** -4.0, Params(2, 0.0), 4.0, quick_spec)


def test_stratification_can_be_switched_off(quick_spec):
    from dataclasses import replace

    spec = replace(quick_spec, stratify_singularity=False)
    estimate = stratified_singular(lambda w: np.ones(w.shape[0]), Params(2, 0.0), 2.0, spec)
    assert estimate.method == "mc"


@pytest.mark.parametrize("distance", [1e-6, 1e-7])
def test_stratified_with_pole_just_outside_the_ball(distance, quick_spec):
    p = Params(2, 0.0)
    r = 1.0 - distance
    f = lambda w: np.abs(1.0 - r * w[:, 0]) ** -3.0  # noqa: E731
    estimate = stratified_singular(f, p, 3.0, quick_spec, distance=distance)
    assert_within(estimate, J_ct_closed(0.0, 0.0, r, p))


def test_monte_carlo_is_unbiased_across_seeds():
    p = Params(2, 0.0)
    exact = ball_moment(MultiIndex((1.0, 0.0)), p)
    hits = 0
    for seed in range(20):
        spec = QuadratureSpec(seed=seed, samples=4000, chunks=4)
        estimate = mc_integrate(lambda w: np.abs(w[:, 0]), p, spec)
        hits += abs(estimate.value - exact) <= 3.0 * estimate.std_error
    assert hits >= 18
