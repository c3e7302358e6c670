"""
Real special functions used by the closed forms
log-Gamma, Pochhammer symbol, real binomial, Gauss 2F1 and the complete
elliptic integrals K and E in the parameter convention m = eps**2
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from config import (
    AGM_MAX_ITERATIONS,
    AGM_TOLERANCE,
    HYP_AGREEMENT,
    HYP_SERIES_CUTOFF,
    HYP_SERIES_MAX_TERMS,
)
from errors import DivergenceError, DomainError, IntegrationError, ParameterError, PreconditionError

logger = logging.getLogger(__name__)

# Lanczos approximation, g = 7, nine coefficients
LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
LOG_SQRT_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def _is_nonpositive_integer(x):
    return x <= 0 and float(x).is_integer()


def log_gamma(x):
    """
    Natural logarithm of Gamma(x) for x > 0
    Lanczos series for x >= 0.5, shifted by Gamma(x+1) = x Gamma(x) below
    """
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"log_gamma needs a positive finite argument, got {x}")
    if x < 0.5:
        return log_gamma(x + 1.0) - math.log(x)

    z = x - 1.0
    series = LANCZOS_COEFFICIENTS[0]
    for i, coefficient in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        series += coefficient / (z + i)
    t = z + LANCZOS_G + 0.5
    return LOG_SQRT_TWO_PI + (z + 0.5) * math.log(t) - t + math.log(series)


def log_gamma_signed(x):
    """
    Return (log|Gamma(x)|, sign of Gamma(x)) for real x that is not a pole
    Negative arguments go through the reflection formula
    """
    x = float(x)
    if _is_nonpositive_integer(x):
        raise DomainError(f"Gamma has a pole at {x}")
    if x > 0:
        return log_gamma(x), 1.0
    s = math.sin(math.pi * x)
    return math.log(math.pi) - math.log(abs(s)) - log_gamma(1.0 - x), math.copysign(1.0, s)


def pochhammer(d, k):
    """Rising factorial (d)_k = d (d+1) ... (d+k-1); (d)_0 = 1"""
    k = int(k)
    if k < 0:
        raise DomainError(f"pochhammer needs k >= 0, got {k}")
    if k == 0:
        return 1.0
    d = float(d)
    if _is_nonpositive_integer(d) and k > -d:
        return 0.0

    log_top, sign_top = log_gamma_signed(d + k)
    log_bottom, sign_bottom = log_gamma_signed(d)
    return sign_top * sign_bottom * math.exp(log_top - log_bottom)


def real_binomial(x, n):
    """
    Binomial coefficient C(x, n) for real x and integer n >= 0
    Gamma route when x > -1, falling factorial otherwise
    """
    n = int(n)
    if n < 0:
        raise DomainError(f"real_binomial needs n >= 0, got {n}")
    x = float(x)
    if x > -1.0:
        rest = x - n + 1.0
        if _is_nonpositive_integer(rest):
            return 0.0
        log_rest, sign_rest = log_gamma_signed(rest)
        return sign_rest * math.exp(log_gamma(x + 1.0) - log_gamma(n + 1.0) - log_rest)
    return (-1.0) ** n * pochhammer(-x, n) / math.exp(log_gamma(n + 1.0))


@dataclass(frozen=True)
class HypParams:
    """Parameters of F(a, b; c; z)"""
    a: float
    b: float
    c: float
    z: float = 0.0

    def __post_init__(self):
        if _is_nonpositive_integer(self.c):
            raise ParameterError(f"2F1 is undefined for c = {self.c}")


def hyp2f1_series(a, b, c, z, terms=None):
    """
    Truncated hypergeometric series
    Returns (value, number of terms used); stops once terms stop contributing
    """
    max_terms = HYP_SERIES_MAX_TERMS if terms is None else int(terms)
    total = 0.0
    term = 1.0
    used = 0
    for k in range(max_terms):
        total += term
        used = k + 1
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        if terms is None and abs(term) <= 1e-17 * abs(total):
            break
    return total, used


def hyp2f1(p):
    """
    Gauss hypergeometric function F(a, b; c; z) for z in [0, 1)
    Euler integral with algebraic endpoint weights, cross-checked against
    the series when z <= 0.5
    """
    a, b, c, z = p.a, p.b, p.c, p.z
    if not 0.0 <= z < 1.0:
        raise DomainError(f"hyp2f1 is evaluated for z in [0, 1), got {z}")
    if not (b > 0 and c > b):
        raise PreconditionError(f"Euler integral needs c > b > 0, got b={b}, c={c}")
    if z == 0.0:
        return 1.0

    integral, abserr = integrate.quad(
        lambda t: (1.0 - t * z) ** (-a),
        0.0, 1.0,
        weight="alg", wvar=(b - 1.0, c - b - 1.0),
        epsabs=0.0, epsrel=1e-12, limit=200,
    )
    log_prefactor = log_gamma(c) - log_gamma(b) - log_gamma(c - b)
    value = math.exp(log_prefactor) * integral

    if z <= HYP_SERIES_CUTOFF:
        series, used = hyp2f1_series(a, b, c, z)
        if abs(series - value) > HYP_AGREEMENT * max(1.0, abs(value)):
            raise IntegrationError(
                f"2F1({a}, {b}; {c}; {z}): Euler integral {value!r} "
                f"disagrees with {used}-term series {series!r}"
            )
    logger.debug("hyp2f1(%s, %s; %s; %s) = %r (quad abserr %.1e)", a, b, c, z, value, abserr)
    return value


def hyp2f1_at_1(a, b, c):
    """F(a, b; c; 1) by the Gauss summation formula, in log space"""
    if not c > a + b:
        raise DivergenceError(f"F(a, b; c; 1) diverges for c <= a + b (a={a}, b={b}, c={c})")
    if a == 0 or b == 0:
        return 1.0
    if _is_nonpositive_integer(c - a) or _is_nonpositive_integer(c - b):
        return 0.0

    log_c, sign_c = log_gamma_signed(c)
    log_cab, sign_cab = log_gamma_signed(c - a - b)
    log_ca, sign_ca = log_gamma_signed(c - a)
    log_cb, sign_cb = log_gamma_signed(c - b)
    sign = sign_c * sign_cab * sign_ca * sign_cb
    return sign * math.exp(log_c + log_cab - log_ca - log_cb)


def _check_parameter(m, allow_one):
    m = np.asarray(m, dtype=float)
    if np.any(~np.isfinite(m)) or np.any(m < 0.0) or np.any(m > 1.0):
        raise DomainError("elliptic parameter m must lie in [0, 1]")
    if not allow_one and np.any(m == 1.0):
        raise DivergenceError("K(m) diverges at m = 1")
    return m


def _agm(m):
    """Return (K, sum_k 2**(k-1) c_k**2) by arithmetic-geometric mean iteration"""
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    c = np.sqrt(m)
    power = 0.5
    total = power * c**2
    for _ in range(AGM_MAX_ITERATIONS):
        if np.all(np.abs(a - b) <= AGM_TOLERANCE * a):
            break
        a_next = 0.5 * (a + b)
        # a and b can settle one ulp apart and cycle there
        settled = np.array_equal(a_next, a)
        a, b, c = a_next, np.sqrt(a * b), 0.5 * (a - b)
        power *= 2.0
        total = total + power * c**2
        if settled:
            break
    else:
        raise IntegrationError("AGM iteration did not converge")
    return np.pi / (2.0 * a), total


def _as_output(values, m):
    return float(values) if np.ndim(m) == 0 else values


def elliptic_K(m):
    """Complete elliptic integral of the first kind, K(m) = int_0^{pi/2} (1 - m sin^2)^{-1/2}"""
    m = _check_parameter(m, allow_one=False)
    k_value, _ = _agm(m)
    return _as_output(k_value, m)


def elliptic_E(m):
    """Complete elliptic integral of the second kind; E(1) = 1"""
    m = _check_parameter(m, allow_one=True)
    flat = m == 1.0
    k_value, total = _agm(np.where(flat, 0.0, m))
    e_value = np.where(flat, 1.0, k_value * (1.0 - total))
    return _as_output(e_value, m)
