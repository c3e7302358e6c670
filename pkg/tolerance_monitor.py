"""
Tolerance monitor for verification checks
Implements the gates that decide whether a numeric result agrees with its target
"""
import math

from config import LIMIT_RELATIVE_GAP, LIMIT_SIGMA_GATE, ROUNDING_GAP, SIGMA_GATE


class ToleranceMonitor:
    """
    Gate rules shared by all suites:
    - sigma bands for Monte Carlo estimates against exact values
    - one-sided bounds with sigma slack
    - relative tolerance for deterministic routes
    - relative gap plus sigma slack for finite surrogates of limits
    """

    @staticmethod
    def sigma_distance(lhs, rhs, sigma):
        """
        |lhs - rhs| in units of sigma; 0 when both agree to rounding,
        inf for sigma = 0 and a larger gap
        """
        gap = abs(lhs - rhs)
        if gap <= ROUNDING_GAP * max(abs(lhs), abs(rhs)):
            return 0.0
        return gap / sigma if sigma > 0 else math.inf

    @staticmethod
    def combined_sigma(*sigmas):
        return math.sqrt(sum(s * s for s in sigmas))

    @staticmethod
    def check_within_sigma(lhs, rhs, sigma, gate=SIGMA_GATE):
        """Monte Carlo value within gate * sigma of its target"""
        return ToleranceMonitor.sigma_distance(lhs, rhs, sigma) <= gate

    @staticmethod
    def check_upper_bound(value, bound, sigma, gate=SIGMA_GATE):
        """value <= bound + gate * sigma"""
        return value <= bound + gate * sigma

    @staticmethod
    def check_lower_bound(value, bound, sigma, gate=SIGMA_GATE):
        """value >= bound - gate * sigma"""
        return value >= bound - gate * sigma

    @staticmethod
    def check_relative(lhs, rhs, tolerance):
        return abs(lhs - rhs) <= tolerance * max(abs(rhs), 1e-300)

    @staticmethod
    def check_limit_surrogate(value, limit, sigma, gap=LIMIT_RELATIVE_GAP, gate=LIMIT_SIGMA_GATE):
        """A finite surrogate of a limit: relative gap within gap plus gate * sigma"""
        return abs(value - limit) <= gap * abs(limit) + gate * sigma

    @staticmethod
    def get_check_description(kind, passed, gate=None):
        """Short description of the gate used, for the ledger and table output"""
        verdict = "pass" if passed else "FAIL"
        if kind == "sigma":
            return f"{verdict}: within {gate:g} sigma"
        if kind == "upper":
            return f"{verdict}: below bound + {gate:g} sigma"
        if kind == "lower":
            return f"{verdict}: above bound - {gate:g} sigma"
        if kind == "relative":
            return f"{verdict}: relative tolerance {gate:g}"
        if kind == "limit":
            return f"{verdict}: limit surrogate, gap {gate}"
        if kind == "absolute":
            return f"{verdict}: absolute tolerance {gate:g}"
        return f"{verdict}: unknown gate"
