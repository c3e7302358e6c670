"""
Suite Manager - runs the verification suites
Coordinates the numerical modules, the tolerance monitor and the audit ledger
"""
import logging
import math
from dataclasses import replace

import numpy as np
from scipy import integrate as quadrature

import appendix
from audit import AuditLog
from ballgeom import (
    Automorphism,
    Params,
    finite_difference_jacobian,
    identity_checks,
    inner,
    pullback_density,
    real_jacobian,
    unit_vector,
)
from bergman import (
    F_zeta,
    F_zeta_transformed,
    G_k,
    bloch_seminorm_probe,
    constant_symbol,
    coordinate_symbol,
    extremal_point,
    extremal_symbol,
    invariant_gradient,
    invariant_gradient_fd,
    kernel,
    kernel_gradient,
    phi_boundary,
    project,
)
from config import (
    BOUNDARY_CONSISTENCY,
    CONJECTURE_SIGMA_GATE,
    EXTREMAL_K_GRID,
    EXTREMAL_LIMIT_K,
    GRADIENT_FD_FLOOR,
    H_AGREEMENT,
    IDENTITY_RESIDUAL,
    JACOBIAN_RELATIVE,
    LIMIT_RELATIVE_GAP,
    LIMIT_SIGMA_GATE,
    SERIES_CLOSED_AGREEMENT,
    SIGMA_GATE,
    SLOPE_TOLERANCE,
    SUITES,
    SURROGATE_RADIUS,
)
from errors import DomainError, ParameterError, PreconditionError
from integrate import chunk_generator, mc_integrate, mc_integrate_sphere, reduce_marginal, sample_ball_valpha
from norms import (
    HALF_PI,
    TRIANGLE_FACTOR,
    J_ct_boundary,
    J_ct_closed,
    J_ct_mc,
    J_ct_series,
    MultiIndex,
    ball_moment,
    ell_endpoints,
    ell_many,
    ell_scan,
    sphere_moment,
)
from tolerance_monitor import ToleranceMonitor

logger = logging.getLogger(__name__)

MOMENT_INDICES = ((1.0, 0.0), (2.0, 1.0), (3.0, 0.0), (0.5, 0.5))
JCT_GRID = tuple((-1.0, t, r) for t in (0.0, 1.0) for r in (0.0, 0.5, 0.9))
JCT_SERIES_TERMS = 2000
IDENTITY_PAIRS = 1000
ELL_CHECK_GRID = 9


def _as_float(x):
    return float(np.real(x)) if np.isrealobj(x) or abs(np.imag(x)) == 0 else complex(x)


class SuiteManager:
    """
    Runs named verification suites for one (n, alpha) and one QuadratureSpec
    Every check is recorded in the audit ledger
    """

    def __init__(self, params, spec, audit_log=None, sigma_gate=SIGMA_GATE,
                 limit_sigma_gate=LIMIT_SIGMA_GATE, limit_gap=LIMIT_RELATIVE_GAP):
        self.params = params
        self.spec = spec
        self.audit_log = audit_log or AuditLog()
        self.monitor = ToleranceMonitor()
        self.sigma_gate = sigma_gate
        self.limit_sigma_gate = limit_sigma_gate
        self.limit_gap = limit_gap
        self._suite = None

    # Recording helpers

    def _record_sigma(self, name, value, sigma, target, gate=None):
        gate = self.sigma_gate if gate is None else gate
        distance = self.monitor.sigma_distance(value, target, sigma)
        passed = self.monitor.check_within_sigma(value, target, sigma, gate)
        return self.audit_log.log_check(
            self._suite, name, _as_float(value), _as_float(target), distance, passed,
            self.monitor.get_check_description("sigma", passed, gate), {"std_error": float(sigma)},
        )

    def _record_upper(self, name, value, sigma, bound, gate=None):
        gate = self.sigma_gate if gate is None else gate
        passed = self.monitor.check_upper_bound(value, bound, sigma, gate)
        distance = (value - bound) / sigma if sigma > 0 else None
        return self.audit_log.log_check(
            self._suite, name, float(value), float(bound), distance, passed,
            self.monitor.get_check_description("upper", passed, gate), {"std_error": float(sigma)},
        )

    def _record_lower(self, name, value, sigma, bound, gate=None):
        gate = self.sigma_gate if gate is None else gate
        passed = self.monitor.check_lower_bound(value, bound, sigma, gate)
        distance = (bound - value) / sigma if sigma > 0 else None
        return self.audit_log.log_check(
            self._suite, name, float(value), float(bound), distance, passed,
            self.monitor.get_check_description("lower", passed, gate), {"std_error": float(sigma)},
        )

    def _record_relative(self, name, lhs, rhs, tolerance, slack=0.0):
        passed = abs(lhs - rhs) <= tolerance * abs(rhs) + slack
        return self.audit_log.log_check(
            self._suite, name, float(lhs), float(rhs), None, passed,
            self.monitor.get_check_description("relative", passed, tolerance), {"slack": float(slack)},
        )

    def _record_absolute(self, name, residual, tolerance):
        passed = residual <= tolerance
        return self.audit_log.log_check(
            self._suite, name, float(residual), 0.0, None, passed,
            self.monitor.get_check_description("absolute", passed, tolerance),
        )

    def _record_limit(self, name, value, sigma, limit):
        passed = self.monitor.check_limit_surrogate(value, limit, sigma, self.limit_gap, self.limit_sigma_gate)
        return self.audit_log.log_check(
            self._suite, name, float(value), float(limit),
            self.monitor.sigma_distance(value, limit, sigma), passed,
            self.monitor.get_check_description("limit", passed, f"{self.limit_gap:g} + {self.limit_sigma_gate:g} sigma"),
            {"std_error": float(sigma), "relative_gap": abs(value - limit) / limit},
        )

    def _record_vector(self, name, estimate, target):
        """Componentwise sigma check of a complex vector estimate"""
        records = []
        for j, (value, sigma) in enumerate(zip(estimate.value, estimate.std_error)):
            records.append(self._record_sigma(f"{name}[{j + 1}]", value, sigma, target[j]))
        return records

    def _points(self, law, count):
        """Seeded test points, from a stream no integral uses"""
        rng = chunk_generator(self.spec.seed, self.spec.chunks + 1)
        return sample_ball_valpha(law, rng, count)

    # Suites

    def run_suite(self, name):
        """
        Run one suite
        Returns (records, error message); inputs a suite cannot use give an error
        """
        handlers = {
            "identities": self.run_identities,
            "jct": self.run_jct,
            "moments": self.run_moments,
            "fzeta": self.run_fzeta,
            "extremal": self.run_extremal,
            "phi": self.run_phi,
            "ell": self.run_ell,
        }
        if name not in handlers:
            return [], f"unknown suite '{name}', choose from {', '.join(SUITES)}"
        self._suite = name
        try:
            handlers[name]()
        except (ParameterError, DomainError, PreconditionError) as e:
            return [], str(e)
        finally:
            self._suite = None
        records = self.audit_log.get_check_logs(filters={"suite": name})
        logger.info("suite %s: %d checks", name, len(records))
        return records, None

    def run_identities(self):
        p = self.params
        n = p.n
        rng_points = self._points(Params(n, 0.0), 2 * IDENTITY_PAIRS)
        bases, points = rng_points[:IDENTITY_PAIRS] * 0.95, rng_points[IDENTITY_PAIRS:]

        worst = max(identity_checks(Automorphism(a), w).worst for a, w in zip(bases, points))
        self._record_absolute("moebius_identities_residual", worst, IDENTITY_RESIDUAL)

        zero = identity_checks(Automorphism(np.zeros(n)), points[0])
        self._record_absolute("moebius_identities_at_a0", zero.worst, 0.0)

        for i in range(3):
            a = Automorphism(bases[i])
            exact = float(real_jacobian(a, points[i]))
            self._record_relative(f"real_jacobian_fd_{i}", finite_difference_jacobian(a, points[i]), exact, JACOBIAN_RELATIVE)

            image = a(points[i])
            relation = (
                (1.0 - np.sum(np.abs(image) ** 2)) ** p.alpha * exact
                / (1.0 - np.sum(np.abs(points[i]) ** 2)) ** p.alpha
            )
            self._record_relative(f"pullback_density_{i}", float(pullback_density(a, points[i], p)), relation, 1e-10)

        z, w = bases[0] * 0.8, points[1]
        gradient = kernel_gradient(z, w, p).vector
        step = 1e-6
        fd = np.array([
            (kernel(z + step * unit_vector(n, j), w, p) - kernel(z - step * unit_vector(n, j), w, p)) / (2.0 * step)
            for j in range(n)
        ])
        self._record_absolute("kernel_gradient_fd_relative",
                              float(np.linalg.norm(fd - gradient) / np.linalg.norm(gradient)), 1e-6)

        normalization = p.c_alpha * 2.0 * n * quadrature.quad(
            lambda u: 0.5, 0.0, 1.0, weight="alg", wvar=(n - 1.0, p.alpha)
        )[0]
        self._record_relative("c_alpha_normalization", normalization, 1.0, 1e-10)

        centre = 0.5 * unit_vector(n)
        reproduced = project(constant_symbol(), centre, p, self.spec)
        self._record_sigma("projection_of_constant", reproduced.value, reproduced.std_error, 1.0)

        g = coordinate_symbol(0)
        a = Automorphism(centre)
        estimate = invariant_gradient(g, centre, p, self.spec)
        exact = a.differential_at_zero()[0]
        for j in range(n):
            self._record_sigma(f"invariant_gradient_w1[{j + 1}]", estimate.vector[j], estimate.std_error[j], exact[j])
        oracle = invariant_gradient_fd(g, centre, p, self.spec)
        for j in range(n):
            sigma = ToleranceMonitor.combined_sigma(estimate.std_error[j], oracle.std_error[j])
            gap = abs(estimate.vector[j] - oracle.vector[j])
            self.audit_log.log_check(
                self._suite, f"invariant_gradient_chain_rule[{j + 1}]", _as_float(estimate.vector[j]),
                _as_float(oracle.vector[j]), self.monitor.sigma_distance(estimate.vector[j], oracle.vector[j], sigma),
                gap <= max(GRADIENT_FD_FLOOR, 5.0 * sigma),
                "max(1e-3, 5 sigma)",
            )
        if n == 1:
            self._record_sigma("invariant_gradient_norm_n1", estimate.norm, float(estimate.std_error[0]),
                               1.0 - abs(centre[0]) ** 2)

        flat = invariant_gradient(constant_symbol(), centre, p, self.spec)
        for j in range(n):
            self._record_sigma(f"invariant_gradient_constant[{j + 1}]", flat.vector[j], flat.std_error[j], 0.0)

        if n >= 2:
            self._check_reduction()

    def _check_reduction(self):
        p = self.params
        k = min(2, p.n - 1)
        tests = {
            "abs_w1_squared": lambda w: np.abs(w[:, 0]) ** 2,
            "abs_w1": lambda w: np.abs(w[:, 0]),
            "inverse_distance_to_e1": lambda w: 1.0 / np.abs(1.0 - w[:, 0]),
            "abs_w1_wk": lambda w: np.abs(w[:, 0]) * np.abs(w[:, k - 1]) ** 2,
            "cos_re_w1": lambda w: np.cos(3.0 * w[:, 0].real) + np.abs(w[:, k - 1]) ** 3,
        }
        full_spec = replace(self.spec, reduction=False)
        law = reduce_marginal(p, k)
        for name, f in tests.items():
            reduced = mc_integrate(f, p, self.spec, depends_on=k)
            full = mc_integrate(f, p, full_spec)
            sigma = ToleranceMonitor.combined_sigma(reduced.std_error, full.std_error)
            self._record_sigma(f"marginal_reduction_{name}_to_{law.n}_{law.alpha:g}", reduced.value, sigma, full.value)

    def run_jct(self):
        p = self.params
        for c, t, r in JCT_GRID:
            label = f"c{c:g}_t{t:g}_r{r:g}"
            closed = J_ct_closed(c, t, r, p)
            series = J_ct_series(c, t, r, p, JCT_SERIES_TERMS)
            self._record_relative(f"series_vs_closed_{label}", series.value, closed,
                                  SERIES_CLOSED_AGREEMENT, slack=series.tail_bound)
            estimate = J_ct_mc(c, t, r * unit_vector(p.n), p, self.spec)
            self._record_sigma(f"mc_vs_closed_{label}", estimate.value, estimate.std_error, closed)

        consistency = p.theta * p.c_alpha * J_ct_boundary(-1.0, p.alpha, p)
        self._record_relative("boundary_value_gives_C", consistency, p.C_const, BOUNDARY_CONSISTENCY)

        near_boundary = J_ct_closed(-0.5, 0.0, math.sqrt(1.0 - 1e-8), p)
        self._record_relative("closed_form_tends_to_boundary_value", near_boundary,
                              J_ct_boundary(-0.5, 0.0, p), 1e-3)

    def _pad(self, entries):
        n = self.params.n
        if n == 1:
            return MultiIndex(entries[:1])
        return MultiIndex(tuple(entries) + (0.0,) * (n - 2))

    def run_moments(self):
        p = self.params
        for entries in MOMENT_INDICES:
            eta = self._pad(entries)
            label = "_".join(f"{e:g}" for e in eta.entries)
            sphere = mc_integrate_sphere(eta.monomial, p.n, self.spec)
            self._record_sigma(f"sphere_moment_{label}", sphere.value, sphere.std_error, sphere_moment(eta))
            ball = mc_integrate(eta.monomial, p, self.spec)
            self._record_sigma(f"ball_moment_{label}", ball.value, ball.std_error, ball_moment(eta, p))

        radius = mc_integrate(lambda w: np.sum(np.abs(w) ** 2, axis=-1), p, self.spec)
        self._record_sigma("mean_squared_radius", radius.value, radius.std_error, p.n / (p.n + p.alpha + 1.0))

    def _zetas(self):
        n = self.params.n
        zetas = {"e1": unit_vector(n)}
        if n >= 2:
            zetas["e2"] = unit_vector(n, 1)
            zetas["e1+e2"] = (unit_vector(n) + unit_vector(n, 1)) / math.sqrt(2.0)
        return zetas

    def run_fzeta(self):
        p = self.params
        bound = p.C_const
        for r in (0.0, 0.3, 0.6, 0.9):
            z = r * unit_vector(p.n)
            for label, zeta in self._zetas().items():
                direct = F_zeta(z, zeta, p, self.spec)
                moved = F_zeta_transformed(z, zeta, p, self.spec)
                tag = f"r{r:g}_zeta_{label}"
                self._record_upper(f"F_below_C_{tag}", direct.value, direct.std_error, bound)
                sigma = ToleranceMonitor.combined_sigma(direct.std_error, moved.std_error)
                self._record_sigma(f"dual_representation_{tag}", direct.value, sigma, moved.value)

        surrogate = F_zeta(SURROGATE_RADIUS * unit_vector(p.n), unit_vector(p.n), p, self.spec)
        record = self._record_upper(f"F_below_C_r{SURROGATE_RADIUS:g}", surrogate.value, surrogate.std_error, bound)
        # F_{e1} reaches C within the surrogate gap at r = 0.99 only on the disc
        if p.n == 1:
            self._record_limit(f"F_limit_r{SURROGATE_RADIUS:g}", surrogate.value, surrogate.std_error, bound)
        else:
            record.details["relative_gap"] = (bound - float(surrogate.value)) / bound

    def run_extremal(self):
        p = self.params
        bound = p.C_const
        for k in EXTREMAL_K_GRID:
            estimate = G_k(k, p, self.spec)
            record = self._record_upper(f"G_{k}_below_C", estimate.value, estimate.std_error, bound)
            record.details["relative_gap"] = (bound - float(estimate.value)) / bound

        limit = G_k(EXTREMAL_LIMIT_K, p, self.spec)
        self._record_limit(f"G_{EXTREMAL_LIMIT_K}_limit", limit.value, limit.std_error, bound)

        points = self._points(p, 2000)
        symbol = extremal_symbol(EXTREMAL_K_GRID[-1], p)
        moduli = np.abs(symbol(points))
        self._record_absolute("g_k_unimodular", float(np.max(np.abs(moduli - 1.0))), 1e-12)

        k = 5
        z = extremal_point(k, p)
        g = extremal_symbol(k, p)
        value = p.theta * np.conj(points[:, 0]) * (1.0 - inner(z, points)) ** (-p.theta - 1.0) * g(points)
        self._record_absolute("G_k_integrand_real_nonnegative",
                              float(np.max(np.abs(value.imag) / (1.0 + np.abs(value)))) + float(max(0.0, -np.min(value.real))),
                              1e-9)

        probe, gradient = bloch_seminorm_probe(g, float(z[0].real), p, self.spec)
        direct = G_k(k, p, self.spec)
        sigma = ToleranceMonitor.combined_sigma(float(np.linalg.norm(gradient.std_error)), direct.std_error)
        self._record_sigma(f"bloch_probe_equals_G_{k}", probe, sigma, direct.value)

    def run_phi(self):
        p = self.params
        zetas = {"e1": unit_vector(p.n)}
        if p.n >= 2:
            zetas["e2"] = unit_vector(p.n, 1)
        for label, zeta in zetas.items():
            estimate = phi_boundary(zeta, p, self.spec)
            self._record_vector(f"Phi_{label}", estimate, np.zeros(p.n))

    def run_ell(self):
        p = self.params
        if p.n < 2:
            raise PreconditionError("ell(t) is defined for n >= 2")
        left, right = ell_endpoints(p)
        self._record_relative("ell_half_pi_series_route", right, HALF_PI * p.C_const, 1e-8)

        ends = ell_many([0.0, HALF_PI], p, self.spec)
        self._record_sigma("ell_0_equals_C", ends.value[0], ends.std_error[0], left)
        self._record_sigma("ell_half_pi_equals_half_pi_C", ends.value[1], ends.std_error[1], right)

        scan = ell_scan(p, ELL_CHECK_GRID, self.spec)
        for row in scan.rows:
            self._record_upper(f"ell_triangle_bound_t{row.t:.4f}", row.estimate, row.std_error, row.upper_bound)
            self._record_lower(f"ell_symmetry_lower_bound_t{row.t:.4f}", row.estimate, row.std_error, row.lower_bound)
        self._record_upper("ell_max_below_triangle_factor_C", scan.max_value, scan.max_std_error,
                           TRIANGLE_FACTOR * p.C_const)
        self._record_lower("ell_max_above_half_pi_C", scan.max_value, scan.max_std_error, right,
                           gate=CONJECTURE_SIGMA_GATE)

    def run_stationarity(self):
        """Appendix endpoint checks (fixed n = 2, alpha = 0)"""
        self._suite = "appendix"
        try:
            for t, target in ((0.0, 2.0), (HALF_PI, math.pi)):
                estimate = appendix.I_of_t(t, self.spec)
                self._record_sigma(f"I_{t:.4f}", estimate.value, estimate.std_error, target)

            # I(t) = ell(t)/3 for (n, alpha) = (2, 0)
            ts = (0.0, 0.25 * math.pi, HALF_PI)
            thirds = appendix.I_of_t_many(ts, self.spec)
            direct = ell_many(ts, Params(2, 0.0), self.spec)
            for i, t in enumerate(ts):
                sigma = ToleranceMonitor.combined_sigma(3.0 * thirds.std_error[i], direct.std_error[i])
                self._record_sigma(f"three_I_equals_ell_t{t:.4f}", 3.0 * thirds.value[i], sigma, direct.value[i])

            report = appendix.stationarity_report(self.spec, sigma_gate=self.sigma_gate)
            for end in ("zero", "half_pi"):
                name = f"extrapolated_slope_{end}"
                value, sigma = report.monte_carlo[name]
                self._record_sigma(f"mc_{name}", value, sigma, 0.0)
                self._record_absolute(f"radial_{name}", abs(report.radial[name]), SLOPE_TOLERANCE)
            deviation = appendix.h_grid_deviation()
            self._record_absolute("h_closed_vs_h_direct", deviation, H_AGREEMENT)
        finally:
            self._suite = None
        return report, deviation
