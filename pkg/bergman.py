"""
The weighted Bergman kernel and the projection P_alpha by Monte Carlo:
gradients, invariant gradients, the comparison functions F_zeta, the
extremal symbols g_k and the boundary integral Phi(zeta)
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ballgeom import Automorphism, as_point, check_ball_point, check_sphere_point, inner, norm, unit_vector
from config import METHODS, STRATIFY_ABOVE_RADIUS
from errors import ParameterError
from integrate import mc_integrate, pole_of, reduce_marginal, stratified_singular

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Symbol:
    """A bounded measurable symbol g evaluated on batches of points"""
    rule: Callable[[np.ndarray], np.ndarray]
    bounded: bool = True
    name: str = ""

    def __call__(self, w):
        return np.asarray(self.rule(np.atleast_2d(w)))

    def spot_check(self, points):
        """Largest |g| on the given points; exceeding 1 breaks a bounded symbol"""
        largest = float(np.max(np.abs(self(points))))
        return largest <= 1.0 + 1e-12 or not self.bounded, largest


def constant_symbol(value=1.0):
    return Symbol(lambda w: np.full(w.shape[0], value, dtype=complex), name=f"constant {value}")


def coordinate_symbol(index=0, conjugate=False):
    if conjugate:
        return Symbol(lambda w: np.conj(w[:, index]), name=f"conj(w_{index + 1})")
    return Symbol(lambda w: w[:, index], name=f"w_{index + 1}")


@dataclass(frozen=True)
class GradientValue:
    """Complex gradient vector; norm = max over unit zeta of |<grad, zeta>|"""
    vector: np.ndarray
    std_error: Optional[np.ndarray] = None
    samples: Optional[int] = None
    method: str = METHODS["CLOSED"]

    @property
    def norm(self):
        return float(np.linalg.norm(self.vector))


def kernel(z, w, p):
    """K_alpha(z, w) = (1 - <z, w>)^(-(n+1+alpha)), principal branch"""
    return (1.0 - inner(z, w)) ** (-p.theta)


def _kernel_gradient_array(z, w, p):
    factor = p.theta * (1.0 - inner(z, w)) ** (-p.theta - 1.0)
    return np.conj(w) * factor[..., None]


def kernel_gradient(z, w, p):
    """grad_z K_alpha(z, w) = (1+n+alpha) conj(w) (1 - <z, w>)^(-(n+2+alpha))"""
    z = as_point(z, p.n)
    w = as_point(w, p.n)
    return GradientValue(vector=_kernel_gradient_array(z, w, p))


def _integrate_with_pole(f, z, p, q, spec):
    """Stratify around z/|z| once z is close to the sphere"""
    radius = float(norm(z))
    if radius > STRATIFY_ABOVE_RADIUS:
        return stratified_singular(f, p, q, spec, pole=pole_of(z), distance=1.0 - radius)
    return mc_integrate(f, p, spec)


def project(g, z, p, spec):
    """P_alpha g(z) = int K_alpha(z, w) g(w) dv_alpha(w)"""
    z = check_ball_point(as_point(z, p.n))
    return _integrate_with_pole(lambda w: kernel(z, w, p) * g(w), z, p, p.theta, spec)


def F_zeta(z, zeta, p, spec):
    """
    F_zeta(z) = (1+n+alpha)(1-|z|^2) int |<w, conj(zeta)>| / |1 - <z, w>|^(n+2+alpha) dv_alpha
    """
    z = check_ball_point(as_point(z, p.n))
    zeta = check_sphere_point(as_point(zeta, p.n))
    scale = p.theta * (1.0 - float(norm(z)) ** 2)

    def integrand(w):
        return scale * np.abs(w @ zeta) / np.abs(1.0 - inner(z, w)) ** (p.theta + 1.0)

    return _integrate_with_pole(integrand, z, p, p.theta + 1.0, spec)


def F_zeta_transformed(z, zeta, p, spec):
    """
    The same F_zeta(z) through the Moebius change of variables:
    (1+n+alpha) int |<phi_z(w), conj(zeta)>| / |1 - <z, w>|^(n+alpha) dv_alpha
    """
    z = check_ball_point(as_point(z, p.n))
    zeta = check_sphere_point(as_point(zeta, p.n))
    phi = Automorphism(z)

    def integrand(w):
        return p.theta * np.abs(phi(w) @ zeta) / np.abs(1.0 - inner(z, w)) ** (p.theta - 1.0)

    return _integrate_with_pole(integrand, z, p, p.theta - 1.0, spec)


def invariant_gradient(g, a, p, spec):
    """
    grad (P_alpha g o phi_a)(0) =
    theta int (conj(w) - conj(a)) (1 - <a, w>)^theta g(phi_a(w)) / |1 - <w, a>|^(2 theta) dv_alpha
    """
    a = check_ball_point(as_point(a, p.n))
    phi = Automorphism(a)

    def integrand(w):
        ip = inner(a, w)
        weight = p.theta * (1.0 - ip) ** p.theta / np.abs(1.0 - ip) ** (2.0 * p.theta)
        return (np.conj(w) - np.conj(a)) * (weight * g(phi(w)))[:, None]

    estimate = mc_integrate(integrand, p, spec)
    return GradientValue(
        vector=estimate.value, std_error=estimate.std_error,
        samples=estimate.samples, method=estimate.method,
    )


def invariant_gradient_fd(g, a, p, spec, step=1e-3):
    """
    Chain-rule oracle for invariant_gradient: central differences of
    P_alpha g(phi_a(+-h e_j)) computed on common samples
    """
    a = check_ball_point(as_point(a, p.n))
    phi = Automorphism(a)
    forward = np.array([phi(step * unit_vector(p.n, j)) for j in range(p.n)])
    backward = np.array([phi(-step * unit_vector(p.n, j)) for j in range(p.n)])

    def integrand(w):
        difference = kernel(forward[None, :, :], w[:, None, :], p) - kernel(backward[None, :, :], w[:, None, :], p)
        return difference * (g(w) / (2.0 * step))[:, None]

    estimate = mc_integrate(integrand, p, spec)
    return GradientValue(
        vector=estimate.value, std_error=estimate.std_error,
        samples=estimate.samples, method=estimate.method,
    )


def extremal_point(k, p):
    if k < 1:
        raise ParameterError(f"extremal sequence index must be >= 1, got {k}")
    return (k / (k + 1.0)) * unit_vector(p.n)


def extremal_symbol(k, p):
    """
    g_k(w) = (w_1/|w_1|) |1 - <z_k, w>|^(n+2+alpha) / (1 - <w, z_k>)^(n+2+alpha),
    z_k = k/(k+1) e_1; g_k = 0 on {w_1 = 0}
    """
    z = extremal_point(k, p)
    power = p.theta + 1.0

    def rule(w):
        w1 = w[:, 0]
        modulus = np.abs(w1)
        phase = np.divide(w1, modulus, out=np.zeros_like(w1), where=modulus > 0)
        factor = 1.0 - inner(z, w)
        return phase * np.abs(factor) ** power / np.conj(factor) ** power

    return Symbol(rule, bounded=True, name=f"g_{k}")


def G_k(k, p, spec):
    """
    G_k = (1+n+alpha)(1-|z_k|^2) int |w_1| / |1 - <z_k, w>|^(n+2+alpha) dv_alpha
    The integrand depends on w_1 only, so w_1 is drawn from its marginal law
    """
    r = k / (k + 1.0)
    scale = p.theta * (1.0 - r * r)
    law = reduce_marginal(p, 1) if spec.reduction else p

    def integrand(w):
        w1 = w[:, 0]
        return scale * np.abs(w1) / np.abs(1.0 - r * w1) ** (p.theta + 1.0)

    if r > STRATIFY_ABOVE_RADIUS:
        return stratified_singular(integrand, law, p.theta + 1.0, spec, distance=1.0 - r)
    return mc_integrate(integrand, law, spec)


def bloch_seminorm_probe(g, r, p, spec):
    """
    (1 - r^2) |grad P_alpha g (r e_1)| with the gradient integrated componentwise
    Returns (probe value, GradientValue of the scaled gradient)
    """
    z = r * unit_vector(p.n)
    check_ball_point(z)

    def integrand(w):
        return _kernel_gradient_array(z, w, p) * g(w)[:, None]

    estimate = _integrate_with_pole(integrand, z, p, p.theta + 1.0, spec)
    scale = 1.0 - r * r
    gradient = GradientValue(
        vector=scale * estimate.value, std_error=scale * estimate.std_error,
        samples=estimate.samples, method=estimate.method,
    )
    return gradient.norm, gradient


def phi_boundary(zeta, p, spec):
    """
    Phi(zeta) = int (conj(w) - conj(zeta)) (1 - <zeta, w>)^theta / |1 - <w, zeta>|^(2 theta) dv_alpha,
    which vanishes on the sphere
    """
    zeta = check_sphere_point(as_point(zeta, p.n))

    def integrand(w):
        ip = inner(zeta, w)
        weight = (1.0 - ip) ** p.theta / np.abs(1.0 - ip) ** (2.0 * p.theta)
        return (np.conj(w) - np.conj(zeta)) * weight[:, None]

    return stratified_singular(integrand, p, p.theta, spec, pole=zeta)
