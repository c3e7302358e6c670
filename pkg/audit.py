"""
Audit ledger for verification checks
Every check a suite performs is recorded here and echoed to the log
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckRecord:
    suite: str
    name: str
    lhs: Any
    rhs: Any
    sigma_distance: Optional[float]
    passed: bool
    gate: str = ""
    details: Dict[str, Any] = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


class AuditLog:
    """In-memory ledger of check results for one run"""

    def __init__(self):
        self._records: List[CheckRecord] = []

    def log_check(self, suite, name, lhs, rhs, sigma_distance=None, passed=True, gate="", details=None):
        """
        Record one check and return it
        Failed checks are logged at WARNING, passed ones at INFO
        """
        record = CheckRecord(
            suite=suite, name=name, lhs=lhs, rhs=rhs,
            sigma_distance=sigma_distance, passed=bool(passed), gate=gate,
            details=dict(details or {}),
        )
        self._records.append(record)
        level = logging.INFO if record.passed else logging.WARNING
        logger.log(level, "[%s] %s: lhs=%s rhs=%s sigma=%s %s",
                   suite, name, lhs, rhs, sigma_distance, "pass" if record.passed else "FAIL")
        return record

    def get_check_logs(self, limit=None, filters=None):
        """
        Retrieve recorded checks, ordered by suite then name
        Filters: suite, passed
        """
        filters = filters or {}
        records = self._records
        if filters.get("suite"):
            records = [r for r in records if r.suite == filters["suite"]]
        if filters.get("passed") is not None:
            records = [r for r in records if r.passed == filters["passed"]]
        records = sorted(records, key=lambda r: (r.suite, r.name))
        return records if limit is None else records[:limit]

    def get_check_statistics(self):
        """Totals and per-suite counts"""
        by_suite = {}
        for record in self._records:
            counts = by_suite.setdefault(record.suite, {"passed": 0, "failed": 0})
            counts["passed" if record.passed else "failed"] += 1
        passed = sum(1 for r in self._records if r.passed)
        return {
            "total_checks": len(self._records),
            "passed_checks": passed,
            "failed_checks": len(self._records) - passed,
            "checks_by_suite": dict(sorted(by_suite.items())),
        }

    def all_passed(self):
        return all(r.passed for r in self._records)
