"""
The unit ball of C^n: parameters (n, alpha) of the weighted measure v_alpha,
points and the Moebius automorphisms phi_a
Points are numpy complex arrays; batches carry the coordinates on the last axis
"""
import math
from dataclasses import dataclass, field

import numpy as np

from config import BOUNDARY_GUARD, SPHERE_TOLERANCE, ZERO_BASE_RADIUS
from errors import DomainError, ParameterError
from specfun import log_gamma, real_binomial


@dataclass(frozen=True)
class Params:
    """
    Complex dimension n and weight exponent alpha of
    dv_alpha = c_alpha (1 - |z|^2)^alpha dv
    """
    n: int
    alpha: float = 0.0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"dimension n must be an integer >= 1, got {self.n!r}")
        if not math.isfinite(self.alpha) or self.alpha <= -1.0:
            raise ParameterError(f"alpha must be a real number > -1, got {self.alpha!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def c_alpha(self):
        return real_binomial(self.n + self.alpha, self.n)

    @property
    def theta(self):
        return self.n + 1.0 + self.alpha

    @property
    def theta_prime(self):
        return self.c_alpha * self.theta

    @property
    def C_const(self):
        """Gamma(2+n+alpha) / Gamma((2+n+alpha)/2)^2"""
        s = 2.0 + self.n + self.alpha
        return math.exp(log_gamma(s) - 2.0 * log_gamma(s / 2.0))


def as_point(coords, n=None):
    """Coerce coordinates to a complex vector, optionally checking its dimension"""
    z = np.asarray(coords, dtype=complex)
    if z.ndim == 0:
        z = z.reshape(1)
    if n is not None and z.shape[-1] != n:
        raise ParameterError(f"expected a point of C^{n}, got {z.shape[-1]} coordinates")
    return z


def unit_vector(n, index=0):
    """Standard basis vector e_{index+1} of C^n"""
    e = np.zeros(n, dtype=complex)
    e[index] = 1.0
    return e


def norm(z):
    return np.sqrt(np.sum(np.abs(z) ** 2, axis=-1))


def inner(z, w):
    """<z, w> = sum_k z_k conj(w_k), broadcast over leading axes"""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if z.shape[-1] != w.shape[-1]:
        raise ParameterError(f"dimension mismatch: {z.shape[-1]} vs {w.shape[-1]}")
    return np.sum(z * np.conj(w), axis=-1)


def check_ball_point(w):
    if np.any(norm(w) >= 1.0):
        raise DomainError("point is not inside the open unit ball")
    return w


def check_sphere_point(zeta):
    zeta = as_point(zeta)
    if abs(float(norm(zeta)) - 1.0) > SPHERE_TOLERANCE:
        raise DomainError(f"|zeta| = {float(norm(zeta))!r} is not on the unit sphere")
    return zeta


@dataclass(frozen=True)
class Automorphism:
    """
    phi_a(w) = (a - P_a w - s Q_a w) / (1 - <w, a>), s = sqrt(1 - |a|^2)
    P_a is the orthogonal projection onto C a; phi_0 = -Id
    """
    base: np.ndarray = field(compare=False)

    def __post_init__(self):
        a = as_point(self.base)
        radius = float(norm(a))
        if radius > 1.0 - BOUNDARY_GUARD:
            raise DomainError(f"|a| = {radius!r} exceeds the boundary guard 1 - {BOUNDARY_GUARD}")
        object.__setattr__(self, "base", a)

    @property
    def n(self):
        return self.base.shape[-1]

    @property
    def radius_squared(self):
        return float(np.sum(np.abs(self.base) ** 2))

    def __call__(self, w):
        a = self.base
        w = as_point(w, self.n)
        a2 = self.radius_squared
        if math.sqrt(a2) < ZERO_BASE_RADIUS:
            return -w
        ip = inner(w, a)[..., None]
        projected = ip * a / a2
        s = math.sqrt(1.0 - a2)
        return (a - projected - s * (w - projected)) / (1.0 - ip)

    def differential_at_zero(self):
        """Complex Jacobian matrix of phi_a at 0: -(1-|a|^2) P_a - s Q_a"""
        n = self.n
        a2 = self.radius_squared
        if math.sqrt(a2) < ZERO_BASE_RADIUS:
            return -np.eye(n, dtype=complex)
        projection = np.outer(self.base, np.conj(self.base)) / a2
        s = math.sqrt(1.0 - a2)
        return -(1.0 - a2) * projection - s * (np.eye(n) - projection)


def mobius_apply(a, w):
    """phi_a(w) for w in the open ball"""
    w = check_ball_point(as_point(w, a.n))
    return a(w)


def real_jacobian(a, w):
    """((1 - |a|^2) / |1 - <w, a>|^2)^(n+1)"""
    w = check_ball_point(as_point(w, a.n))
    ratio = (1.0 - a.radius_squared) / np.abs(1.0 - inner(w, a.base)) ** 2
    return ratio ** (a.n + 1)


def pullback_density(a, w, p):
    """Density of v_alpha o phi_a with respect to v_alpha"""
    w = check_ball_point(as_point(w, a.n))
    ratio = (1.0 - a.radius_squared) / np.abs(1.0 - inner(w, a.base)) ** 2
    return ratio ** p.theta


@dataclass(frozen=True)
class IdentityReport:
    relation_one: float
    relation_two: float
    involution: float

    @property
    def worst(self):
        return max(self.relation_one, self.relation_two, self.involution)


def identity_checks(a, w):
    """
    Residuals of
    1 - |phi_a(w)|^2 = (1 - |a|^2)(1 - |w|^2) / |1 - <w, a>|^2,
    (1 - <w, a>)(1 - <phi_a(w), a>) = 1 - |a|^2 and phi_a(phi_a(w)) = w
    """
    w = check_ball_point(as_point(w, a.n))
    image = a(w)
    a2 = a.radius_squared
    ip = inner(w, a.base)

    lhs_one = 1.0 - np.sum(np.abs(image) ** 2, axis=-1)
    rhs_one = (1.0 - a2) * (1.0 - np.sum(np.abs(w) ** 2, axis=-1)) / np.abs(1.0 - ip) ** 2
    lhs_two = (1.0 - ip) * (1.0 - inner(image, a.base))
    involution = np.max(np.abs(a(image) - w))

    return IdentityReport(
        relation_one=float(np.max(np.abs(lhs_one - rhs_one))),
        relation_two=float(np.max(np.abs(lhs_two - (1.0 - a2)))),
        involution=float(involution),
    )


def realify(z):
    """C^n -> R^(2n): (Re z, Im z)"""
    return np.concatenate([z.real, z.imag], axis=-1)


def complexify(x):
    n = x.shape[-1] // 2
    return x[..., :n] + 1j * x[..., n:]


def finite_difference_jacobian(a, w, step=1e-5):
    """Determinant of the real 2n x 2n Jacobian of phi_a at w by central differences"""
    w = check_ball_point(as_point(w, a.n))
    x = realify(w)
    columns = []
    for j in range(x.size):
        dx = np.zeros_like(x)
        dx[j] = step
        forward = realify(a(complexify(x + dx)))
        backward = realify(a(complexify(x - dx)))
        columns.append((forward - backward) / (2.0 * step))
    return float(np.linalg.det(np.column_stack(columns)))
