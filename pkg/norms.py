"""
Closed forms and bounds behind the Bloch-norm theorems:
C_{alpha,n}, J_{c,t} in series / closed / boundary form, sphere and ball
moments, ell(t) with its endpoint identities and the scan for its maximum
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ballgeom import Params, as_point, check_ball_point, inner, norm
from config import CONJECTURE_SIGMA_GATE, ELL_SERIES_AGREEMENT, RADIUS_FLOOR, STRATIFY_ABOVE_RADIUS
from errors import DivergenceError, DomainError, IntegrationError, ParameterError, PreconditionError
from integrate import mc_integrate, pole_of, reduce_marginal, stratified_singular
from specfun import HypParams, hyp2f1, hyp2f1_at_1, log_gamma, pochhammer, real_binomial

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
TRIANGLE_FACTOR = 0.5 * math.sqrt(math.pi**2 + 4.0)


@dataclass(frozen=True)
class MultiIndex:
    """Real exponents eta_i > -1 of |z^eta| = prod |z_i|^eta_i"""
    entries: Tuple[float, ...]

    def __post_init__(self):
        entries = tuple(float(e) for e in self.entries)
        if not entries or any(not e > -1.0 for e in entries):
            raise ParameterError(f"multi-index entries must be > -1, got {self.entries}")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self):
        return len(self.entries)

    @property
    def order(self):
        return sum(self.entries)

    def monomial(self, points):
        """|z^eta| on a batch of points"""
        return np.prod(np.abs(points) ** np.asarray(self.entries), axis=-1)


def C_const(p):
    """C_{alpha,n} = Gamma(2+n+alpha) / Gamma((2+n+alpha)/2)^2"""
    return p.C_const


def _lambda_one(c, t, n):
    return 0.5 * (n + 1.0 + t + c)


def _check_t(t):
    if not t > -1.0:
        raise DomainError(f"J_(c,t) needs t > -1, got {t}")


def _check_radius(r):
    if not 0.0 <= r < 1.0:
        raise DomainError(f"radius must lie in [0, 1), got {r}")


def J_ct_at_origin(t, p):
    """Gamma(n+1) Gamma(1+t) / Gamma(n+1+t)"""
    return math.exp(log_gamma(p.n + 1.0) + log_gamma(1.0 + t) - log_gamma(p.n + 1.0 + t))


def J_ct_closed(c, t, r, p):
    """
    J_{c,t}(r e_1) = Gamma(1+n)Gamma(1+t)/Gamma(1+n+t) F(l, l; 1+n+t; r^2),
    l = (n+1+t+c)/2
    """
    _check_t(t)
    _check_radius(r)
    lam = _lambda_one(c, t, p.n)
    return J_ct_at_origin(t, p) * hyp2f1(HypParams(lam, lam, p.n + 1.0 + t, r * r))


def J_ct_boundary(c, t, p):
    """Value of J_{c,t} on the sphere: Gamma(1+n)Gamma(1+t)Gamma(-c)/Gamma((1-c+n+t)/2)^2"""
    _check_t(t)
    if c >= 0:
        raise DivergenceError(f"J_(c,t) is unbounded on the ball for c = {c} >= 0")
    return math.exp(
        log_gamma(1.0 + p.n) + log_gamma(1.0 + t) + log_gamma(-c)
        - 2.0 * log_gamma(0.5 * (1.0 - c + p.n + t))
    )


@dataclass(frozen=True)
class SeriesValue:
    value: float
    tail_bound: float
    terms: int


def J_ct_series(c, t, r, p, terms):
    """
    Truncated power series of J_{c,t}(r e_1) in r^2 with a bound on the omitted tail
    The bound holds once the term ratio stays below r^2; otherwise it is inf
    """
    _check_t(t)
    _check_radius(r)
    if terms < 1:
        raise DomainError("at least one term is required")
    lam = _lambda_one(c, t, p.n)
    rho = r * r
    top = p.n + 1.0 + t

    term = J_ct_at_origin(t, p)
    total = 0.0
    for k in range(terms):
        total += term
        last = term
        term *= (lam + k) ** 2 / ((k + 1.0) * (top + k)) * rho

    if rho == 0.0 or last == 0.0:
        tail = 0.0
    elif (terms - 1) * (c - 1.0) + lam**2 - top <= 0.0:
        tail = abs(last) * rho / (1.0 - rho)
    else:
        tail = math.inf
    return SeriesValue(value=total, tail_bound=tail, terms=terms)


def J_ct_mc(c, t, z, p, spec):
    """
    Direct Monte Carlo of int (1-|w|^2)^t |1 - <z, w>|^(-(n+1+t+c)) dv(w)
    with the unweighted measure v
    """
    _check_t(t)
    z = check_ball_point(as_point(z, p.n))
    law = Params(p.n, 0.0)
    exponent = p.n + 1.0 + t + c

    def integrand(w):
        gap = np.clip(1.0 - np.sum(np.abs(w) ** 2, axis=-1), RADIUS_FLOOR, 1.0)
        return gap**t / np.abs(1.0 - inner(z, w)) ** exponent

    radius = float(norm(z))
    if radius > STRATIFY_ABOVE_RADIUS:
        return stratified_singular(integrand, law, exponent, spec, pole=pole_of(z), distance=1.0 - radius)
    return mc_integrate(integrand, law, spec)


def sphere_moment(eta):
    """int_S |zeta^eta| dsigma = (n-1)! prod Gamma(1+eta_i/2) / Gamma(n + |eta|/2)"""
    n = eta.n
    log_value = log_gamma(n) + sum(log_gamma(1.0 + e / 2.0) for e in eta.entries)
    return math.exp(log_value - log_gamma(n + eta.order / 2.0))


def ball_moment(eta, p):
    """int_B |z^eta| dv_alpha = Gamma(1+alpha+n) prod Gamma(1+eta_i/2) / Gamma(1+alpha+n+|eta|/2)"""
    if eta.n != p.n:
        raise ParameterError(f"multi-index of length {eta.n} used on C^{p.n}")
    log_value = log_gamma(1.0 + p.alpha + p.n) + sum(log_gamma(1.0 + e / 2.0) for e in eta.entries)
    return math.exp(log_value - log_gamma(1.0 + p.alpha + p.n + eta.order / 2.0))


def _check_ell_params(p):
    if p.n < 2:
        raise PreconditionError("ell(t) is defined for n >= 2")


def _ell_values(ts, theta):
    """Integrand of ell at every t of the grid, on a batch of (w_1, w_2) points"""
    cos_t = np.cos(ts)
    sin_t = np.sin(ts)

    def integrand(w):
        one_minus = 1.0 - w[:, 0]
        numerator = np.abs(one_minus[:, None] * cos_t + w[:, 1, None] * sin_t)
        return theta * numerator / np.abs(one_minus)[:, None] ** theta

    return integrand


def ell_many(ts, p, spec, combinations=None):
    """
    ell at every t in ts on common samples; optional rows of `combinations`
    add linear combinations of those values as further components
    """
    _check_ell_params(p)
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0.0) or np.any(ts > HALF_PI + 1e-15):
        raise DomainError("ell(t) is defined for t in [0, pi/2]")
    law = reduce_marginal(p, 2) if spec.reduction else p
    values = _ell_values(ts, p.theta)

    if combinations is None:
        integrand = values
    else:
        weights = np.asarray(combinations, dtype=float)

        def integrand(w):
            base = values(w)
            return np.concatenate([base, base @ weights.T], axis=1)

    return stratified_singular(integrand, law, p.theta, spec)


def ell(t, p, spec):
    """ell(t) = (n+1+alpha) int |(1-w_1) cos t + w_2 sin t| / |1 - w_1|^(n+1+alpha) dv_alpha"""
    return ell_many([t], p, spec).component(0)


def ell_half_pi_series(p, check_terms=25):
    """
    ell(pi/2) through the power series of |1-w_1|^(-theta): the k-th term is
    C(-theta/2, k)^2 int |w_1|^(2k) |w_2| dv_alpha, a hypergeometric series at 1
    Returns (value, largest relative mismatch of the first terms)
    """
    _check_ell_params(p)
    half = p.theta / 2.0
    top = p.alpha + p.n + 1.5
    prefactor = math.exp(log_gamma(1.5) + log_gamma(1.0 + p.alpha + p.n) - log_gamma(top))

    mismatch = 0.0
    for k in range(check_terms):
        eta = MultiIndex((2.0 * k, 1.0) + (0.0,) * (p.n - 2))
        direct = real_binomial(-half, k) ** 2 * ball_moment(eta, p)
        hypergeometric = prefactor * pochhammer(half, k) ** 2 / (pochhammer(top, k) * math.factorial(k))
        mismatch = max(mismatch, abs(direct - hypergeometric) / abs(hypergeometric))

    value = p.theta * prefactor * hyp2f1_at_1(half, half, top)
    return value, mismatch


def ell_endpoints(p):
    """
    (ell(0), ell(pi/2)) = (C, pi/2 C); for n >= 2 the second value is
    recomputed through the hypergeometric series and must agree to 1e-8
    """
    left = C_const(p)
    right = HALF_PI * left
    if p.n >= 2:
        series, mismatch = ell_half_pi_series(p)
        if mismatch > ELL_SERIES_AGREEMENT or abs(series - right) > ELL_SERIES_AGREEMENT * right:
            raise IntegrationError(
                f"ell(pi/2) series route {series!r} disagrees with (pi/2) C = {right!r} "
                f"(term mismatch {mismatch:.2e})"
            )
    return left, right


@dataclass(frozen=True)
class ScanRow:
    t: float
    estimate: float
    std_error: float
    lower_bound: float
    upper_bound: float


@dataclass(frozen=True)
class ScanResult:
    rows: Tuple[ScanRow, ...]
    argmax_t: float
    max_value: float
    max_std_error: float
    ell_zero: float
    ell_half_pi: float
    differences: Tuple[float, ...]
    difference_errors: Tuple[float, ...]
    verdict: bool
    samples: int
    method: str

    @property
    def conjectured_value(self):
        return self.ell_half_pi

    @property
    def triangle_bound(self):
        return TRIANGLE_FACTOR * self.ell_zero


def scan_grid(grid_points):
    return np.linspace(0.0, HALF_PI, grid_points)


def ell_scan(p, grid_points, spec):
    """
    ell on a uniform grid of [0, pi/2] with common random numbers
    The verdict holds when ell(pi/2) >= ell(t) - 2 sigma at every grid point,
    sigma being the error of the paired difference
    """
    _check_ell_params(p)
    if grid_points < 9:
        raise ParameterError("the scan needs at least 9 grid points")
    ts = scan_grid(grid_points)
    count = len(ts)
    # rows: ell(pi/2) - ell(t_j)
    combinations = -np.eye(count)
    combinations[:, -1] += 1.0
    estimate = ell_many(ts, p, spec, combinations=combinations)

    values = estimate.value[:count]
    errors = estimate.std_error[:count]
    differences = estimate.value[count:]
    difference_errors = estimate.std_error[count:]
    left, right = ell_endpoints(p)

    rows = tuple(
        ScanRow(
            t=float(t), estimate=float(v), std_error=float(e),
            lower_bound=float(max(math.cos(t) * left, math.sin(t) * right)),
            upper_bound=float(math.cos(t) * left + math.sin(t) * right),
        )
        for t, v, e in zip(ts, values, errors)
    )
    best = int(np.argmax(values))
    verdict = bool(np.all(differences + CONJECTURE_SIGMA_GATE * difference_errors >= 0.0))
    logger.info("ell scan n=%d alpha=%g: argmax t=%.4f, verdict=%s", p.n, p.alpha, ts[best], verdict)
    return ScanResult(
        rows=rows,
        argmax_t=float(ts[best]),
        max_value=float(values[best]),
        max_std_error=float(errors[best]),
        ell_zero=left,
        ell_half_pi=right,
        differences=tuple(float(d) for d in differences),
        difference_errors=tuple(float(e) for e in difference_errors),
        verdict=verdict,
        samples=estimate.samples,
        method=estimate.method,
    )


@dataclass(frozen=True)
class NormBounds:
    bloch_lower: float
    bloch_upper: float
    invariant_lower: float
    invariant_upper: float


def norm_bounds(p):
    """C <= |P| <= 1 + C and (pi/2) C <= |P|~ <= 1 + sqrt(pi^2+4)/2 C"""
    c = C_const(p)
    return NormBounds(
        bloch_lower=c,
        bloch_upper=1.0 + c,
        invariant_lower=HALF_PI * c,
        invariant_upper=1.0 + TRIANGLE_FACTOR * c,
    )
