import logging
import math

import pytest

from audit import AuditLog
from tolerance_monitor import ToleranceMonitor


def test_sigma_distance():
    assert ToleranceMonitor.sigma_distance(1.0, 1.0, 0.0) == 0.0
    assert ToleranceMonitor.sigma_distance(1.3, 1.0, 0.1) == pytest.approx(3.0)
    assert ToleranceMonitor.sigma_distance(1.3, 1.0, 0.0) == math.inf
    assert ToleranceMonitor.sigma_distance(1.0 + 1.0j, 1.0, 0.5) == pytest.approx(2.0)


def test_exact_estimate_against_rounded_closed_form():
    # a constant integrand gives std_error 0; the closed form is off by a few ulps
    assert ToleranceMonitor.sigma_distance(1.0, 0.9999999999999991, 0.0) == 0.0
    assert ToleranceMonitor.check_within_sigma(1.0, 0.9999999999999991, 0.0)
    assert ToleranceMonitor.check_within_sigma(6.0, 6.0 * (1.0 + 5e-13), 0.0)
    assert not ToleranceMonitor.check_within_sigma(1.0, 1.0 - 1e-9, 0.0)


def test_combined_sigma():
    assert ToleranceMonitor.combined_sigma(0.3, 0.4) == pytest.approx(0.5)


def test_gates():
    assert ToleranceMonitor.check_within_sigma(1.29, 1.0, 0.1)
    assert not ToleranceMonitor.check_within_sigma(1.31, 1.0, 0.1)
    assert ToleranceMonitor.check_within_sigma(1.31, 1.0, 0.1, gate=4.0)
    assert ToleranceMonitor.check_upper_bound(6.2, 6.0, 0.1)
    assert not ToleranceMonitor.check_upper_bound(6.4, 6.0, 0.1)
    assert ToleranceMonitor.check_lower_bound(5.8, 6.0, 0.1)
    assert not ToleranceMonitor.check_lower_bound(5.6, 6.0, 0.1)
    assert ToleranceMonitor.check_relative(1.0 + 1e-9, 1.0, 1e-8)
    assert not ToleranceMonitor.check_relative(1.0 + 1e-7, 1.0, 1e-8)


def test_limit_surrogate():
    # 5% gap plus 5 sigma
    assert ToleranceMonitor.check_limit_surrogate(5.75, 6.0, 0.0)
    assert not ToleranceMonitor.check_limit_surrogate(5.6, 6.0, 0.0)
    assert ToleranceMonitor.check_limit_surrogate(5.6, 6.0, 0.03)


def test_check_descriptions():
    assert ToleranceMonitor.get_check_description("sigma", True, 3.0) == "pass: within 3 sigma"
    assert ToleranceMonitor.get_check_description("upper", False, 3.0).startswith("FAIL")
    assert "unknown" in ToleranceMonitor.get_check_description("other", True)


def test_audit_log_records_and_filters(caplog):
    log = AuditLog()
    with caplog.at_level(logging.INFO, logger="audit"):
        log.log_check("moments", "b_check", 1.0, 1.0, 0.0, True)
        log.log_check("jct", "a_check", 2.0, 1.0, 10.0, False, gate="within 3 sigma", details={"std_error": 0.1})
        log.log_check("moments", "a_check", 1.0, 1.0, 0.0, True)
    assert [r.levelno for r in caplog.records] == [logging.INFO, logging.WARNING, logging.INFO]

    records = log.get_check_logs()
    assert [(r.suite, r.name) for r in records] == [("jct", "a_check"), ("moments", "a_check"), ("moments", "b_check")]
    assert len(log.get_check_logs(filters={"suite": "moments"})) == 2
    failed = log.get_check_logs(filters={"passed": False})
    assert len(failed) == 1 and failed[0].details == {"std_error": 0.1}
    assert len(log.get_check_logs(limit=1)) == 1
    assert failed[0].as_dict()["gate"] == "within 3 sigma"
    assert not log.all_passed()


def test_audit_statistics():
    log = AuditLog()
    assert log.all_passed()
    log.log_check("ell", "x", 1.0, 1.0, passed=True)
    log.log_check("ell", "y", 1.0, 2.0, passed=False)
    stats = log.get_check_statistics()
    assert stats["total_checks"] == 2
    assert stats["passed_checks"] == 1
    assert stats["failed_checks"] == 1
    assert stats["checks_by_suite"] == {"ell": {"passed": 1, "failed": 1}}
