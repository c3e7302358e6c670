"""
Stationarity of I(t) = ell(t)/3 at (n, alpha) = (2, 0)

After a_1 = w_2/(1-w_1), a_2 = w_1 the integral becomes
I(t) = int_{B'} |cos t + a_1 sin t| dv(a), B' = {|a_1|^2 <= R0(a_2)},
and the circle integral over arg a_1 is the circumference h(t; R) = 4 a E(m)
of an ellipse with axes a = cos t + R sin t, b = |cos t - R sin t|.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import integrate

from ballgeom import Params, unit_vector
from config import H_GRID_MAX_RADIUS, H_GRID_POINTS, METHODS, SIGMA_GATE, SLOPE_TOLERANCE, STATIONARITY_STEPS
from errors import DomainError, IntegrationError
from integrate import IntegralEstimate, stratified_singular
from specfun import elliptic_E, elliptic_K

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
DISC = Params(1, 0.0)
# I(t) - 2 ~ c t^2 log(1/t) near 0 and pi - I(pi/2 - h) ~ (pi/4) h^2
SLOPE_MODELS = {
    "zero": lambda h: (1.0, h * math.log(h), h),
    "half_pi": lambda h: (1.0, h, h * h),
}


@dataclass(frozen=True)
class EllipseAxes:
    a_axis: float
    b_axis: float
    m: float


def ellipse_axes(R, t):
    """Axes of the ellipse traced by cos t + R e^{i sigma} sin t and its parameter m = eps^2"""
    a_axis = math.cos(t) + R * math.sin(t)
    b_axis = abs(math.cos(t) - R * math.sin(t))
    m = 0.0 if a_axis == 0.0 else 2.0 * R * math.sin(2.0 * t) / a_axis**2
    return EllipseAxes(a_axis=a_axis, b_axis=b_axis, m=min(max(m, 0.0), 1.0))


def R0(p, s):
    """Squared radius bound of a_1 over a_2 = p e^{is}: (1-p^2)/(1+p^2-2p cos s)"""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise DomainError("R0 needs 0 < p < 1")
    value = (1.0 - p * p) / (1.0 + p * p - 2.0 * p * np.cos(s))
    return float(value) if value.ndim == 0 else value


def h_direct(R, t):
    """int_0^{2 pi} |cos t + R e^{i sigma} sin t| d sigma by adaptive quadrature"""
    c, s = math.cos(t), R * math.sin(t)
    value, _ = integrate.quad(
        lambda sigma: abs(complex(c + s * math.cos(sigma), s * math.sin(sigma))),
        0.0, 2.0 * math.pi, points=[math.pi], epsabs=1e-12, epsrel=1e-12, limit=200,
    )
    return value


def h_closed(R, t):
    """Ellipse circumference 4 a E(m); vectorised over R"""
    R = np.asarray(R, dtype=float)
    a_axis = math.cos(t) + R * math.sin(t)
    safe = np.where(a_axis > 0.0, a_axis, 1.0)
    m = np.clip(2.0 * R * math.sin(2.0 * t) / safe**2, 0.0, 1.0)
    value = np.where(a_axis > 0.0, 4.0 * a_axis * elliptic_E(m), 0.0)
    return float(value) if value.ndim == 0 else value


def _check_open_interval(t):
    if not 0.0 < t < HALF_PI:
        raise DomainError("h' is evaluated for t in (0, pi/2); use the endpoint limits")


def _h_prime_terms(R, t):
    R = np.asarray(R, dtype=float)
    cos_t, sin_t = math.cos(t), math.sin(t)
    a_axis = cos_t + R * sin_t
    minus = R * sin_t - cos_t
    m = np.clip(2.0 * R * math.sin(2.0 * t) / a_axis**2, 0.0, 1.0)
    # where b = 0 the K term is 0 * log-infinite and vanishes
    flat = minus == 0.0
    k_value = elliptic_K(np.where(flat, 0.0, np.minimum(m, 1.0 - 1e-16)))
    first = np.where(flat, 0.0, k_value * minus / math.sin(2.0 * t))
    second = elliptic_E(m) * a_axis / math.tan(2.0 * t)
    return first + second


def h_prime_closed(R, t):
    """
    dh/dt = 4 [csc(2t) K(m) (R sin t - cos t) + cot(2t) E(m) (cos t + R sin t)]
    """
    _check_open_interval(t)
    value = 4.0 * _h_prime_terms(R, t)
    return float(value) if np.ndim(value) == 0 else value


def h_prime_display(R, t):
    """The bracket of h_prime_closed without the factor 4"""
    _check_open_interval(t)
    value = _h_prime_terms(R, t)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class HPrimeCheck:
    R: float
    t: float
    closed: float
    display: float
    finite_difference: float
    ratio_to_display: float


def h_prime_check(R=0.5, t=0.7, step=1e-5):
    """Centred difference of h_closed against both forms of h'"""
    fd = (h_closed(R, t + step) - h_closed(R, t - step)) / (2.0 * step)
    display = h_prime_display(R, t)
    return HPrimeCheck(
        R=R, t=t,
        closed=h_prime_closed(R, t),
        display=display,
        finite_difference=fd,
        ratio_to_display=fd / display if display != 0.0 else math.inf,
    )


def h_grid_deviation(points=H_GRID_POINTS, max_radius=H_GRID_MAX_RADIUS):
    """Largest |h_closed - h_direct| on a points x points grid of (R, t)"""
    worst = 0.0
    for t in np.linspace(0.0, HALF_PI, points):
        for R in np.linspace(0.0, max_radius, points):
            worst = max(worst, abs(h_closed(R, t) - h_direct(R, t)))
    return worst


def h_prime_endpoint_values(radii=(0.5, 1.0, 2.0), offsets=(1e-2, 1e-3, 1e-4)):
    """h' just inside both endpoints; both limits are 0"""
    rows = []
    for R in radii:
        for eps in offsets:
            rows.append((R, eps, h_prime_closed(R, eps), h_prime_closed(R, HALF_PI - eps)))
    return rows


def I_of_t_radial(t):
    """
    I(t) = (2/pi) int_0^inf R h(t; R) / (1 + R^2)^2 dR
    The a_2-area where R0 >= R^2 is pi / (1 + R^2)^2
    """
    if not 0.0 <= t <= HALF_PI:
        raise DomainError("I(t) is defined for t in [0, pi/2]")

    def integrand(R):
        return R * h_closed(R, t) / (1.0 + R * R) ** 2

    split = math.cos(t) / math.sin(t) if t > 0.0 else 1.0
    head, head_err, head_info = integrate.quad(integrand, 0.0, split, epsabs=1e-13, epsrel=1e-12, limit=200, full_output=1)[:3]
    tail, tail_err, tail_info = integrate.quad(integrand, split, math.inf, epsabs=1e-13, epsrel=1e-12, limit=200, full_output=1)[:3]
    if not (math.isfinite(head) and math.isfinite(tail)):
        raise IntegrationError(f"radial quadrature of I({t}) failed")
    return IntegralEstimate(
        value=2.0 / math.pi * (head + tail),
        std_error=2.0 / math.pi * (head_err + tail_err),
        samples=head_info["neval"] + tail_info["neval"],
        method=METHODS["RADIAL"],
    )


def _disc_integrand(ts):
    """(1/pi) R0 h(t; sqrt(R0 V)) with a_2 uniform on the disc and V uniform"""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))

    def integrand(points, aux):
        a2 = points[:, 0]
        # samples next to the pole can round onto the circle; R0 is then 0
        r0 = np.clip(1.0 - np.abs(a2) ** 2, 0.0, None) / np.abs(1.0 - a2) ** 2
        radius = np.sqrt(r0 * aux[:, 0])
        columns = [r0 * h_closed(radius, t) for t in ts]
        return np.column_stack(columns) / math.pi

    return integrand


def I_of_t_many(ts, spec, combinations=None):
    """Monte Carlo I(t) on a grid with common random numbers, plus linear combinations"""
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0.0) or np.any(ts > HALF_PI + 1e-15):
        raise DomainError("I(t) is defined for t in [0, pi/2]")
    values = _disc_integrand(ts)
    if combinations is None:
        integrand = values
    else:
        weights = np.asarray(combinations, dtype=float)

        def integrand(points, aux):
            base = values(points, aux)
            return np.concatenate([base, base @ weights.T], axis=1)

    return stratified_singular(integrand, DISC, 1.5, spec, pole=unit_vector(1), aux_dims=1)


def I_of_t(t, spec):
    """Monte Carlo estimate of I(t) = ell(t)/3 for (n, alpha) = (2, 0)"""
    return I_of_t_many([t], spec).component(0)


def _intercept_weights(model, steps):
    """Weights c with sum c_i D(h_i) = intercept of the fitted slope model"""
    basis = np.array([SLOPE_MODELS[model](h) for h in steps])
    return np.linalg.solve(basis.T, np.eye(len(steps))[0])


def stationarity_functionals(steps=STATIONARITY_STEPS):
    """
    Grid of t values and the rows of linear functionals on I over that grid:
    one-sided slopes at both ends, their extrapolations to h = 0 and the
    second differences at pi/2
    """
    steps = tuple(float(h) for h in steps)
    ts = [0.0] + list(steps) + [HALF_PI - h for h in reversed(steps)] + [HALF_PI]
    index = {round(t, 15): i for i, t in enumerate(ts)}
    size = len(ts)

    def at(t):
        return index[round(t, 15)]

    names, rows = [], []
    zero_rows, half_rows = [], []
    for h in steps:
        row = np.zeros(size)
        row[at(h)] += 1.0 / h
        row[at(0.0)] -= 1.0 / h
        zero_rows.append(row)
        names.append(f"slope_zero_h{h:g}")
        rows.append(row)
    for h in steps:
        row = np.zeros(size)
        row[at(HALF_PI)] += 1.0 / h
        row[at(HALF_PI - h)] -= 1.0 / h
        half_rows.append(row)
        names.append(f"slope_half_pi_h{h:g}")
        rows.append(row)

    names.append("extrapolated_slope_zero")
    rows.append(_intercept_weights("zero", steps) @ np.array(zero_rows))
    names.append("extrapolated_slope_half_pi")
    rows.append(_intercept_weights("half_pi", steps) @ np.array(half_rows))

    for h in steps:
        if 2.0 * h in steps:
            row = np.zeros(size)
            row[at(HALF_PI)] += 1.0 / h**2
            row[at(HALF_PI - h)] -= 2.0 / h**2
            row[at(HALF_PI - 2.0 * h)] += 1.0 / h**2
            names.append(f"second_difference_half_pi_h{h:g}")
            rows.append(row)
    return np.array(ts), names, np.array(rows)


@dataclass(frozen=True)
class StationarityReport:
    ts: Tuple[float, ...]
    radial: Dict[str, float]
    monte_carlo: Dict[str, Tuple[float, float]]
    h_prime_limits: Tuple[Tuple[float, float, float, float], ...]
    stationary: bool
    samples: int


def stationarity_report(spec, steps=STATIONARITY_STEPS, sigma_gate=SIGMA_GATE):
    """
    Endpoint slopes of I from the radial route and from Monte Carlo with common
    random numbers; a slope counts as stationary when its extrapolation to
    h = 0 vanishes
    """
    ts, names, rows = stationarity_functionals(steps)
    radial_values = np.array([I_of_t_radial(t).value for t in ts])
    radial = dict(zip(names, (float(v) for v in rows @ radial_values)))

    estimate = I_of_t_many(ts, spec, combinations=rows)
    offset = len(ts)
    monte_carlo = {
        name: (float(estimate.value[offset + i]), float(estimate.std_error[offset + i]))
        for i, name in enumerate(names)
    }

    stationary = True
    for end in ("zero", "half_pi"):
        name = f"extrapolated_slope_{end}"
        value, error = monte_carlo[name]
        stationary &= abs(radial[name]) < SLOPE_TOLERANCE
        stationary &= abs(value) <= sigma_gate * error
    logger.info("stationarity: radial %s", {k: round(v, 6) for k, v in radial.items() if "extrapolated" in k})

    return StationarityReport(
        ts=tuple(float(t) for t in ts),
        radial=radial,
        monte_carlo=monte_carlo,
        h_prime_limits=tuple(h_prime_endpoint_values()),
        stationary=bool(stationary),
        samples=estimate.samples,
    )
