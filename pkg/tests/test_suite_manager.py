import pytest

from audit import AuditLog
from ballgeom import Params
from suite_manager import SuiteManager

# unit tests gate Monte Carlo checks at 5 sigma
GATE = 5.0


def manager(p, spec, audit_log=None):
    return SuiteManager(p, spec, audit_log, sigma_gate=GATE)


def failures(records):
    return [(r.name, r.lhs, r.rhs, r.gate) for r in records if not r.passed]


@pytest.mark.parametrize("p", [Params(1, 0.0), Params(2, 0.5)])
def test_identities_suite(p, quick_spec):
    records, error = manager(p, quick_spec).run_suite("identities")
    assert error is None
    names = {r.name for r in records}
    assert "moebius_identities_residual" in names
    assert ("invariant_gradient_norm_n1" in names) == (p.n == 1)
    assert any(name.startswith("marginal_reduction") for name in names) == (p.n >= 2)
    assert failures(records) == []


def test_jct_suite(quick_spec):
    records, error = manager(Params(2, 0.0), quick_spec).run_suite("jct")
    assert error is None
    assert len(records) == 14
    assert failures(records) == []


def test_moments_suite(quick_spec):
    records, error = manager(Params(3, 1.0), quick_spec).run_suite("moments")
    assert error is None
    assert len(records) == 9
    assert failures(records) == []


def test_extremal_suite_on_disc(quick_spec):
    records, error = manager(Params(1, 0.0), quick_spec).run_suite("extremal")
    assert error is None
    names = [r.name for r in records]
    assert "G_1000_limit" in names
    assert failures(records) == []
    assert all("relative_gap" in r.details for r in records if r.name.endswith("_below_C"))


def test_ell_suite(quick_spec):
    records, error = manager(Params(2, 0.0), quick_spec).run_suite("ell")
    assert error is None
    names = {r.name for r in records}
    assert {"ell_max_above_half_pi_C", "ell_max_below_triangle_factor_C"} <= names
    assert failures(records) == []


def test_ell_suite_needs_two_dimensions(quick_spec):
    records, error = manager(Params(1, 0.0), quick_spec).run_suite("ell")
    assert records == []
    assert "n >= 2" in error


def test_unknown_suite(quick_spec):
    records, error = manager(Params(2, 0.0), quick_spec).run_suite("nope")
    assert records == []
    assert "unknown suite" in error


def test_suites_share_one_ledger(quick_spec):
    log = AuditLog()
    m = manager(Params(2, 0.0), quick_spec, log)
    m.run_suite("moments")
    m.run_suite("phi")
    stats = log.get_check_statistics()
    assert set(stats["checks_by_suite"]) == {"moments", "phi"}
    assert stats["checks_by_suite"]["phi"]["passed"] + stats["checks_by_suite"]["phi"]["failed"] == 4


def test_stationarity_checks(quick_spec):
    log = AuditLog()
    report, deviation = manager(Params(2, 0.0), quick_spec, log).run_stationarity()
    records = log.get_check_logs(filters={"suite": "appendix"})
    assert len(records) == 10
    assert deviation < 1e-9
    assert failures(records) == []
    assert report.samples > 0


@pytest.mark.parametrize("p", [Params(1, 0.0), Params(2, 0.0), Params(2, 1.0), Params(3, 0.5)])
def test_fzeta_suite(p, quick_spec):
    records, error = manager(p, quick_spec).run_suite("fzeta")
    assert error is None
    zetas = 1 if p.n == 1 else 3
    dual = [r for r in records if r.name.startswith("dual_representation_")]
    assert len(dual) == 4 * zetas
    assert failures(records) == []
    names = {r.name for r in records}
    # the r = 0.99 limit surrogate is gated on the disc only
    assert ("F_limit_r0.99" in names) == (p.n == 1)
    surrogate = next(r for r in records if r.name == "F_below_C_r0.99")
    assert ("relative_gap" in surrogate.details) == (p.n > 1)
