"""
Sampling and integration over (B, v_alpha)

Randomness comes from numpy's Philox 4x64 counter-based generator. Chunk i of
a run with seed s uses the key s + (i << 64), so every chunk is an independent,
reproducible stream; chunk results are reduced in chunk order.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from ballgeom import Params, as_point, unit_vector
from config import (
    DEFAULTS,
    EXPONENT_GUARD,
    METHODS,
    MIN_SAMPLES,
    RADIUS_FLOOR,
    SHELL_MARGIN,
    STRATIFY_SHELLS,
)
from errors import IntegrationError, ParameterError, PreconditionError

logger = logging.getLogger(__name__)

SEED_LIMIT = 2**64


@dataclass(frozen=True)
class QuadratureSpec:
    """Everything that controls a stochastic computation"""
    seed: int = DEFAULTS["seed"]
    samples: int = DEFAULTS["samples"]
    chunks: int = DEFAULTS["chunks"]
    reduction: bool = True
    stratify_singularity: bool = True
    exponent_guard: float = EXPONENT_GUARD
    shells: int = STRATIFY_SHELLS
    workers: int = DEFAULTS["workers"]

    def __post_init__(self):
        if not 0 <= self.seed < SEED_LIMIT:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.samples < MIN_SAMPLES:
            raise ParameterError(f"at least {MIN_SAMPLES} samples are required, got {self.samples}")
        if self.chunks < 1 or self.samples % self.chunks:
            raise ParameterError(f"chunks ({self.chunks}) must divide samples ({self.samples})")
        if self.shells < 1:
            raise ParameterError("at least one dyadic shell is required")
        if not self.exponent_guard > 0:
            raise ParameterError("exponent guard must be positive")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")

    @property
    def per_chunk(self):
        return self.samples // self.chunks

    def with_samples(self, samples):
        return replace(self, samples=samples)


@dataclass(frozen=True)
class IntegralEstimate:
    """
    Value and standard error of a numeric integral
    value and std_error are arrays of the same shape for vector-valued integrands
    """
    value: object
    std_error: object
    samples: int
    method: str

    def component(self, index):
        return IntegralEstimate(
            value=self.value[index],
            std_error=self.std_error[index],
            samples=self.samples,
            method=self.method,
        )

    def scaled(self, factor):
        return IntegralEstimate(
            value=self.value * factor,
            std_error=self.std_error * abs(factor),
            samples=self.samples,
            method=self.method,
        )


def chunk_generator(seed, chunk):
    """Independent Philox stream for one chunk of a run"""
    return np.random.Generator(np.random.Philox(key=int(seed) + (int(chunk) << 64)))


def sample_sphere(n, rng, size=None):
    """Uniform points of S^(2n-1): normalised 2n-dimensional Gaussians"""
    shape = (1 if size is None else size, 2 * n)
    x = rng.standard_normal(shape)
    x /= np.linalg.norm(x, axis=-1, keepdims=True)
    points = x[:, :n] + 1j * x[:, n:]
    return points[0] if size is None else points


def sample_ball_valpha(p, rng, size=None):
    """
    Points distributed per v_alpha: uniform direction, and
    1 - r^2 ~ Beta(alpha+1, n) drawn by inverse CDF
    """
    count = 1 if size is None else size
    direction = sample_sphere(p.n, rng, count)
    gap = special.betaincinv(p.alpha + 1.0, p.n, rng.random(count))
    gap = np.clip(gap, RADIUS_FLOOR, 1.0)
    points = direction * np.sqrt(1.0 - gap)[:, None]
    return points[0] if size is None else points


def reduce_marginal(p, k):
    """
    Law of the first k coordinates of v_alpha on C^n: v_{alpha+n-k} on C^k
    k = n returns p unchanged
    """
    if not 1 <= k <= p.n:
        raise PreconditionError(f"cannot reduce C^{p.n} to its first {k} coordinates")
    if k == p.n:
        return p
    return Params(k, p.alpha + p.n - k)


def _run_chunks(task, spec):
    """Evaluate task(chunk_index) for every chunk, in chunk order"""
    indices = range(spec.chunks)
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            return list(pool.map(task, indices))
    return [task(i) for i in indices]


def _checked(values, where):
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        bad = int(np.sum(~np.isfinite(values)))
        raise IntegrationError(f"{bad} non-finite integrand values in {where}")
    return values


def _mean_and_error(values):
    count = values.shape[0]
    mean = np.mean(values, axis=0)
    if count < 2:
        return mean, np.zeros(np.shape(mean))
    return mean, np.std(values, axis=0, ddof=1) / math.sqrt(count)


def _evaluate(f, points, rng, aux_dims):
    if aux_dims:
        return f(points, rng.random((points.shape[0], aux_dims)))
    return f(points)


def mc_integrate(f, p, spec, depends_on=None, aux_dims=0):
    """
    Plain Monte Carlo estimate of int_B f dv_alpha

    f maps a (N, n) array of points to N values (or an (N, k) array for
    vector integrands). When depends_on = k < n and reduction is enabled only
    the first k coordinates are sampled, from their exact marginal law.
    """
    law = p
    method = METHODS["MC"]
    if depends_on is not None and spec.reduction and depends_on < p.n:
        law = reduce_marginal(p, depends_on)
        method = METHODS["MC_REDUCED"]

    def chunk(index):
        rng = chunk_generator(spec.seed, index)
        points = sample_ball_valpha(law, rng, spec.per_chunk)
        return _checked(_evaluate(f, points, rng, aux_dims), f"chunk {index}")

    values = np.concatenate(_run_chunks(chunk, spec), axis=0)
    value, error = _mean_and_error(values)
    logger.debug("%s: n=%d alpha=%g samples=%d value=%s", method, law.n, law.alpha, spec.samples, value)
    return IntegralEstimate(value=value, std_error=error, samples=values.shape[0], method=method)


def mc_integrate_sphere(f, n, spec):
    """Plain Monte Carlo estimate of int_S f dsigma"""

    def chunk(index):
        rng = chunk_generator(spec.seed, index)
        return _checked(f(sample_sphere(n, rng, spec.per_chunk)), f"chunk {index}")

    values = np.concatenate(_run_chunks(chunk, spec), axis=0)
    value, error = _mean_and_error(values)
    return IntegralEstimate(value=value, std_error=error, samples=values.shape[0], method=METHODS["MC"])


def shell_edges(shells):
    """(lo, hi) bounds of d = |1 - w_1|: dyadic shells from [1, 2] inwards, then the core"""
    edges = [(2.0 ** -j, 2.0 ** (1 - j)) for j in range(shells)]
    edges.append((0.0, 2.0 ** (1 - shells)))
    return edges


def shell_count(shells, distance=None):
    """
    Number of dyadic shells for a pole at distance `distance` outside the ball
    The shells reach SHELL_MARGIN halvings below that distance, where the
    integrand is bounded and shell contributions must decay
    """
    if distance is None:
        return shells
    if not distance > 0:
        raise PreconditionError(f"pole distance must be positive, got {distance}")
    return max(shells, SHELL_MARGIN + 1 + math.ceil(-math.log2(distance)))


def pole_frame(pole):
    """Unitary matrix whose first column is the unit vector pole"""
    pole = as_point(pole)
    n = pole.shape[0]
    q, _ = np.linalg.qr(np.column_stack([pole, np.eye(n, dtype=complex)]))
    phase = np.vdot(q[:, 0], pole)
    q[:, 0] *= phase
    return q


class StratifiedSingularSampler:
    """
    Draws w in B near the boundary point e_1 for integrands with |1 - w_1|^(-q)

    w_1 = 1 - d exp(i psi) with d in a dyadic shell, d ~ d^(kappa-1),
    kappa = max(n + alpha - q + 1, guard), and |psi| = psi_max - tau with
    tau ~ tau^beta on [0, psi_max], beta = alpha + n - 1, psi_max = arccos(d/2).
    The remaining coordinates are sqrt(1 - |w_1|^2) u with u ~ v_alpha on C^(n-1).
    Weights are target / proposal densities in (d, psi).
    """

    def __init__(self, p, q, guard):
        self.p = p
        self.beta = p.alpha + p.n - 1.0
        self.kappa = max(p.n + p.alpha - q + 1.0, guard)
        self.rest = Params(p.n - 1, p.alpha) if p.n > 1 else None

    def draw(self, rng, lo, hi, size):
        kappa, beta = self.kappa, self.beta
        lo_k, hi_k = lo ** kappa, hi ** kappa
        d = (lo_k + (1.0 - rng.random(size)) * (hi_k - lo_k)) ** (1.0 / kappa)
        psi_max = np.arccos(0.5 * d)
        tau = psi_max * (1.0 - rng.random(size)) ** (1.0 / (beta + 1.0))
        sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        psi = sign * (psi_max - tau)

        w1 = 1.0 - d * np.exp(1j * psi)
        gap = 4.0 * d * np.sin(psi_max - 0.5 * tau) * np.sin(0.5 * tau)

        log_target = math.log((beta + 1.0) / math.pi) + beta * np.log(gap) + np.log(d)
        log_proposal = (
            math.log(kappa) + (kappa - 1.0) * np.log(d) - math.log(hi_k - lo_k)
            + math.log(beta + 1.0) + beta * np.log(tau) - math.log(2.0) - (beta + 1.0) * np.log(psi_max)
        )
        weights = np.exp(log_target - log_proposal)

        if self.rest is None:
            points = w1[:, None]
        else:
            u = sample_ball_valpha(self.rest, rng, size)
            points = np.column_stack([w1, np.sqrt(gap)[:, None] * u])
        return points, weights


def stratified_singular(f, p, q, spec, pole=None, aux_dims=0, distance=None):
    """
    Stratified estimate of int_B f dv_alpha for f with a singularity |1 - <w, pole>|^(-q)
    `distance` is how far the singular point sits outside the ball along pole,
    None when it lies on the sphere

    The ball is cut into dyadic shells in d = |1 - <w, pole>| plus a core; each
    stratum gets the same share of every chunk and the stratum means are added.
    Falls back to plain Monte Carlo when stratification is switched off.
    """
    if not spec.stratify_singularity:
        return mc_integrate(f, p, spec, aux_dims=aux_dims)

    edges = shell_edges(shell_count(spec.shells, distance))
    per_stratum = max(spec.per_chunk // len(edges), 1)
    sampler = StratifiedSingularSampler(p, q, spec.exponent_guard)
    frame = None if pole is None else pole_frame(pole)

    def chunk(index):
        rng = chunk_generator(spec.seed, index)
        out = []
        for lo, hi in edges:
            points, weights = sampler.draw(rng, lo, hi, per_stratum)
            if frame is not None:
                points = points @ frame.T
            values = np.asarray(_evaluate(f, points, rng, aux_dims))
            weights = weights.reshape((-1,) + (1,) * (values.ndim - 1))
            out.append(_checked(values * weights, f"chunk {index}, shell [{lo:.3g}, {hi:.3g}]"))
        return out

    results = _run_chunks(chunk, spec)
    value = 0.0
    variance = 0.0
    contributions = []
    for s in range(len(edges)):
        values = np.concatenate([r[s] for r in results], axis=0)
        mean, error = _mean_and_error(values)
        value = value + mean
        variance = variance + np.abs(error) ** 2
        contributions.append(float(np.sum(np.abs(mean))))

    inner, outer = sum(contributions[-3:]), sum(contributions[-6:-3])
    if len(contributions) >= 6 and inner > outer:
        raise IntegrationError(
            f"shell contributions do not decay towards the singularity "
            f"(innermost {inner:.3e} > next {outer:.3e}); integrand is not integrable"
        )

    samples = per_stratum * len(edges) * spec.chunks
    logger.debug("mc-stratified: n=%d alpha=%g q=%g kappa=%g samples=%d value=%s",
                 p.n, p.alpha, q, sampler.kappa, samples, value)
    return IntegralEstimate(
        value=value, std_error=np.sqrt(variance), samples=samples, method=METHODS["MC_STRATIFIED"]
    )


def pole_of(z):
    """Unit vector z/|z|, or e_1 at the origin"""
    z = as_point(z)
    r = float(np.linalg.norm(z))
    return unit_vector(z.shape[0]) if r == 0.0 else z / r
