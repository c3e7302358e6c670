"""
Command-line surface
Parses flags into a RunConfig, dispatches to the command handlers and renders
results as JSON, CSV or a tabulate grid
"""
import argparse
import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from tabulate import tabulate

import appendix
from audit import AuditLog
from ballgeom import Params
from config import (
    COMMANDS,
    CONJECTURE_SIGMA_GATE,
    DEFAULTS,
    EXIT_CODES,
    LIMIT_RELATIVE_GAP,
    LIMIT_SIGMA_GATE,
    METHODS,
    OUTPUT_FORMATS,
    SEED_ENV_VAR,
    SIGMA_GATE,
    SUITES,
)
from errors import ParameterError, PreconditionError
from integrate import QuadratureSpec
from norms import C_const, ell, ell_endpoints, ell_scan, norm_bounds
from suite_manager import SuiteManager
from tolerance_monitor import ToleranceMonitor


@dataclass(frozen=True)
class RunConfig:
    """Validated settings of one invocation"""
    command: str
    n: int = 2
    alpha: float = 0.0
    seed: int = DEFAULTS["seed"]
    samples: int = DEFAULTS["samples"]
    chunks: int = DEFAULTS["chunks"]
    grid_points: int = DEFAULTS["grid_points"]
    format: str = DEFAULTS["format"]
    suite: Optional[str] = None
    t: Optional[float] = None
    out: Optional[str] = None
    workers: int = DEFAULTS["workers"]
    sigma_gate: float = SIGMA_GATE
    limit_sigma_gate: float = LIMIT_SIGMA_GATE
    limit_gap: float = LIMIT_RELATIVE_GAP

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParameterError(f"unknown command '{self.command}'")
        if self.format not in OUTPUT_FORMATS:
            raise ParameterError(f"format must be one of {', '.join(OUTPUT_FORMATS)}")
        if self.command == "verify" and self.suite not in SUITES:
            raise ParameterError(f"verify needs --suite, one of {', '.join(SUITES)}")
        if self.grid_points < 9:
            raise ParameterError("grid points must be >= 9")
        if min(self.sigma_gate, self.limit_sigma_gate, self.limit_gap) <= 0:
            raise ParameterError("tolerance overrides must be positive")
        # invalid (n, alpha) or sampling settings raise here, before any command runs
        _ = (self.params, self.spec)

    @property
    def params(self):
        return Params(self.n, self.alpha)

    @property
    def spec(self):
        return QuadratureSpec(seed=self.seed, samples=self.samples, chunks=self.chunks, workers=self.workers)

    @classmethod
    def from_args(cls, args, environ=None):
        environ = os.environ if environ is None else environ
        seed = args.seed
        if seed is None:
            raw = environ.get(SEED_ENV_VAR)
            try:
                seed = int(raw) if raw else DEFAULTS["seed"]
            except ValueError:
                raise ParameterError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None
        return cls(
            command=args.command,
            n=args.n,
            alpha=args.alpha,
            seed=seed,
            samples=args.samples,
            chunks=args.chunks,
            grid_points=args.grid_points,
            format=args.format,
            suite=getattr(args, "suite", None),
            t=getattr(args, "t", None),
            out=args.out,
            workers=args.workers,
            sigma_gate=args.sigma_gate,
            limit_sigma_gate=args.limit_sigma_gate,
            limit_gap=args.limit_gap,
        )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bergman-norm",
        description="Numerical verification of the Bloch-norm constants of the weighted Bergman projection",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=2, help="complex dimension")
    common.add_argument("--alpha", type=float, default=0.0, help="weight exponent, > -1")
    common.add_argument("--seed", type=int, default=None, help=f"random seed (default ${SEED_ENV_VAR} or {DEFAULTS['seed']})")
    common.add_argument("--samples", type=int, default=DEFAULTS["samples"])
    common.add_argument("--chunks", type=int, default=DEFAULTS["chunks"])
    common.add_argument("--workers", type=int, default=DEFAULTS["workers"], help="threads evaluating chunks")
    common.add_argument("--grid-points", dest="grid_points", type=int, default=DEFAULTS["grid_points"])
    common.add_argument("--format", choices=OUTPUT_FORMATS, default=DEFAULTS["format"])
    common.add_argument("--out", default=None, help="write output to this file instead of stdout")
    common.add_argument("--log-level", dest="log_level", default=DEFAULTS["log_level"])
    common.add_argument("--sigma-gate", dest="sigma_gate", type=float, default=SIGMA_GATE)
    common.add_argument("--limit-sigma-gate", dest="limit_sigma_gate", type=float, default=LIMIT_SIGMA_GATE)
    common.add_argument("--limit-gap", dest="limit_gap", type=float, default=LIMIT_RELATIVE_GAP)

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("constant", parents=[common], help="C_{alpha,n}, derived constants and norm bounds")
    verify = commands.add_parser("verify", parents=[common], help="run a verification suite")
    verify.add_argument("--suite", choices=list(SUITES), required=True)
    commands.add_parser("scan", parents=[common], help="scan ell(t) over [0, pi/2]")
    commands.add_parser("appendix", parents=[common], help="stationarity analysis of I(t) at n=2, alpha=0")
    single = commands.add_parser("ell", parents=[common], help="one ell(t) estimate")
    single.add_argument("--t", type=float, required=True)
    return parser


# Encoding of values

def encode_number(x):
    """JSON-safe number: floats, [re, im] for complex values, null for non-finite"""
    if isinstance(x, (complex, np.complexfloating)):
        if x.imag == 0:
            return encode_number(x.real)
        return [encode_number(x.real), encode_number(x.imag)]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, np.ndarray):
        return [encode_number(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [encode_number(v) for v in x]
    if isinstance(x, dict):
        return {str(k): encode_number(v) for k, v in x.items()}
    return x


def numeric_result(estimate):
    return {
        "value": encode_number(estimate.value),
        "std_error": encode_number(estimate.std_error),
        "samples": int(estimate.samples),
        "method": estimate.method,
    }


def closed_result(value):
    return {"value": encode_number(value), "route": METHODS["CLOSED"]}


@dataclass
class CommandOutput:
    payload: Dict[str, Any]
    headers: List[str]
    rows: List[List[Any]]
    exit_code: int = EXIT_CODES["OK"]
    summary: Dict[str, Any] = field(default_factory=dict)


def render(output, fmt):
    """Text for stdout or --out"""
    if fmt == "json":
        return json.dumps(encode_number(output.payload), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(output.headers)
        writer.writerows(encode_number(output.rows))
        return buffer.getvalue()
    text = tabulate(encode_number(output.rows), headers=output.headers, tablefmt="grid")
    if output.summary:
        summary = [[key, value] for key, value in sorted(encode_number(output.summary).items())]
        text += "\n\n" + tabulate(summary, headers=["summary", "value"], tablefmt="grid")
    return text + "\n"


class ConsoleUI:
    """
    Command handlers of the CLI
    Each handler returns a CommandOutput; the exit code carries the verdict
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self.audit_log = AuditLog()

    def _header(self):
        cfg = self.cfg
        return {
            "command": cfg.command,
            "params": {"n": cfg.n, "alpha": cfg.alpha},
            "spec": {"seed": cfg.seed, "samples": cfg.samples, "chunks": cfg.chunks},
        }

    def _suite_manager(self, params=None):
        cfg = self.cfg
        return SuiteManager(
            params or cfg.params, cfg.spec, self.audit_log,
            sigma_gate=cfg.sigma_gate, limit_sigma_gate=cfg.limit_sigma_gate, limit_gap=cfg.limit_gap,
        )

    def _check_rows(self, records):
        return [
            [r.suite, r.name, r.lhs, r.rhs, r.sigma_distance, r.passed]
            for r in records
        ]

    def _checks_payload(self, records):
        return [
            {
                "name": r.name, "lhs": r.lhs, "rhs": r.rhs,
                "sigma_distance": r.sigma_distance, "pass": r.passed, "gate": r.gate,
            }
            for r in records
        ]

    def handle_constant(self):
        p = self.cfg.params
        bounds = norm_bounds(p)
        results = {
            "C_const": closed_result(C_const(p)),
            "c_alpha": closed_result(p.c_alpha),
            "theta": closed_result(p.theta),
            "theta_prime": closed_result(p.theta_prime),
            "bloch_lower": closed_result(bounds.bloch_lower),
            "bloch_upper": closed_result(bounds.bloch_upper),
            "invariant_lower": closed_result(bounds.invariant_lower),
            "invariant_upper": closed_result(bounds.invariant_upper),
        }
        payload = self._header()
        del payload["spec"]
        payload["results"] = results
        rows = [[name, entry["value"]] for name, entry in results.items()]
        return CommandOutput(payload, ["quantity", "value"], rows)

    def handle_verify(self):
        cfg = self.cfg
        manager = self._suite_manager()
        records, error = manager.run_suite(cfg.suite)
        if error:
            raise ParameterError(error)
        passed = all(r.passed for r in records)
        payload = self._header()
        payload["suite"] = cfg.suite
        payload["checks"] = self._checks_payload(records)
        payload["summary"] = self.audit_log.get_check_statistics()
        payload["passed"] = passed
        code = EXIT_CODES["OK"] if passed else EXIT_CODES["VERIFICATION_FAILURE"]
        return CommandOutput(
            payload, ["suite", "name", "lhs", "rhs", "sigma_distance", "pass"],
            self._check_rows(records), code, {"passed": passed, "checks": len(records)},
        )

    def handle_scan(self):
        cfg = self.cfg
        p = cfg.params
        if p.n < 2:
            raise PreconditionError("scan needs n >= 2")
        scan = ell_scan(p, cfg.grid_points, cfg.spec)
        sigma = scan.max_std_error
        gate = cfg.sigma_gate
        summary = {
            "argmax_t": scan.argmax_t,
            "max": {"value": scan.max_value, "std_error": sigma, "samples": scan.samples, "method": scan.method},
            "ell_zero": closed_result(scan.ell_zero),
            "ell_half_pi": closed_result(scan.ell_half_pi),
            "conjectured_value": closed_result(scan.conjectured_value),
            "triangle_bound": closed_result(scan.triangle_bound),
            "max_below_triangle_bound": ToleranceMonitor.check_upper_bound(scan.max_value, scan.triangle_bound, sigma, gate),
            "max_above_conjectured_value": ToleranceMonitor.check_lower_bound(
                scan.max_value, scan.ell_half_pi, sigma, CONJECTURE_SIGMA_GATE),
            "rows_within_pointwise_bounds": all(
                ToleranceMonitor.check_upper_bound(r.estimate, r.upper_bound, r.std_error, gate)
                and ToleranceMonitor.check_lower_bound(r.estimate, r.lower_bound, r.std_error, gate)
                for r in scan.rows
            ),
            "verdict": scan.verdict,
        }
        rows = [[r.t, r.estimate, r.std_error, r.lower_bound, r.upper_bound] for r in scan.rows]
        payload = self._header()
        payload["rows"] = [
            {"t": r[0], "estimate": r[1], "std_error": r[2], "lower_bound": r[3], "upper_bound": r[4]}
            for r in rows
        ]
        payload["summary"] = summary
        table_summary = {
            "argmax_t": scan.argmax_t, "max": scan.max_value, "max_std_error": sigma,
            "ell_zero": scan.ell_zero, "ell_half_pi": scan.ell_half_pi, "verdict": scan.verdict,
        }
        return CommandOutput(payload, ["t", "estimate", "std_error", "lower_bound", "upper_bound"],
                             rows, EXIT_CODES["OK"], table_summary)

    def handle_ell(self):
        cfg = self.cfg
        p = cfg.params
        estimate = ell(cfg.t, p, cfg.spec)
        left, right = ell_endpoints(p)
        payload = self._header()
        payload["t"] = cfg.t
        payload["ell"] = numeric_result(estimate)
        payload["ell_zero"] = closed_result(left)
        payload["ell_half_pi"] = closed_result(right)
        rows = [[cfg.t, estimate.value, estimate.std_error]]
        return CommandOutput(payload, ["t", "estimate", "std_error"], rows)

    def handle_appendix(self):
        cfg = self.cfg
        spec = cfg.spec
        manager = self._suite_manager(Params(2, 0.0))
        report, deviation = manager.run_stationarity()

        ts = np.linspace(0.0, appendix.HALF_PI, cfg.grid_points)
        grid = appendix.I_of_t_many(ts, spec)
        radial = [appendix.I_of_t_radial(t) for t in ts]
        rows = [
            [float(t), grid.value[i], grid.std_error[i], radial[i].value]
            for i, t in enumerate(ts)
        ]
        check = appendix.h_prime_check()
        records = self.audit_log.get_check_logs(filters={"suite": "appendix"})
        passed = all(r.passed for r in records)

        payload = {"command": "appendix", "params": {"n": 2, "alpha": 0.0},
                   "spec": self._header()["spec"]}
        payload["grid"] = [
            {"t": r[0], "I": {"value": r[1], "std_error": r[2], "samples": grid.samples, "method": grid.method},
             "I_radial": {"value": r[3], "route": METHODS["RADIAL"]}}
            for r in rows
        ]
        payload["checks"] = self._checks_payload(records)
        payload["stationarity"] = {
            "radial": report.radial,
            "monte_carlo": {k: {"value": v, "std_error": e} for k, (v, e) in report.monte_carlo.items()},
            "h_prime_near_endpoints": [
                {"R": R, "offset": eps, "near_zero": low, "near_half_pi": high}
                for R, eps, low, high in report.h_prime_limits
            ],
            "stationary": report.stationary,
            "samples": report.samples,
        }
        payload["h_consistency"] = {"max_abs_deviation": deviation}
        payload["h_prime_check"] = {
            "R": check.R, "t": check.t, "closed": check.closed, "display": check.display,
            "finite_difference": check.finite_difference, "ratio_to_display": check.ratio_to_display,
        }
        payload["passed"] = passed
        code = EXIT_CODES["OK"] if passed else EXIT_CODES["VERIFICATION_FAILURE"]
        summary = {"stationary": report.stationary, "h_max_deviation": deviation,
                   "h_prime_ratio_to_display": check.ratio_to_display, "passed": passed}
        return CommandOutput(payload, ["t", "I", "std_error", "I_radial"], rows, code, summary)

    def run(self):
        """Dispatch the configured command"""
        handlers = {
            "constant": self.handle_constant,
            "verify": self.handle_verify,
            "scan": self.handle_scan,
            "appendix": self.handle_appendix,
            "ell": self.handle_ell,
        }
        return handlers[self.cfg.command]()
