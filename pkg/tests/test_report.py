"""Tests for check reports."""

import json

import pytest

from gradedconn.report import (
    STATUS_ERROR,
    STATUS_FAIL,
    STATUS_INFO,
    STATUS_PASS,
    CheckReport,
    CheckRow,
)


def row(equation, status, residual=0.0, case="L1", point_index=0, **extra):
    return CheckRow(
        suite="semisym",
        equation=equation,
        case=case,
        point_index=point_index,
        point=[0.0, 1.0],
        residual=residual,
        tolerance=1e-8,
        status=status,
        **extra,
    )


@pytest.fixture
def report():
    return CheckReport(
        suite="semisym",
        manifest_name="flat",
        manifest_hash="abc",
        engine_version="0.1.0",
        rows=[
            row("koszul", STATUS_PASS, 1e-15, point_index=1),
            row("koszul", STATUS_FAIL, 0.5, point_index=0),
            row("jacobi", STATUS_ERROR, None, error="singular-eval"),
            row("jacobi", STATUS_INFO, None, case="i1", note="skipped"),
        ],
    )


class TestCheckRow:
    def test_optional_fields_are_dropped(self):
        d = row("koszul", STATUS_PASS).to_dict()
        assert "error" not in d
        assert "note" not in d
        assert d["status"] == "pass"

    def test_error_tag_kept(self):
        d = row("koszul", STATUS_ERROR, None, error="parity").to_dict()
        assert d["error"] == "parity"
        assert d["residual"] is None


class TestCheckReport:
    """Summaries, ordering, exit codes and serialisation."""

    def test_summary(self, report):
        assert report.summary == {"pass": 1, "fail": 1, "error": 1, "info": 1, "total": 4}

    def test_exit_code(self, report):
        assert not report.passed
        assert report.exit_code() == 1
        report.rows = [r for r in report.rows if r.status in (STATUS_PASS, STATUS_INFO)]
        assert report.passed
        assert report.exit_code() == 0

    def test_sort_orders_rows(self, report):
        report.sort()
        keys = [(r.equation, r.case, r.point_index) for r in report.rows]
        assert keys == [
            ("jacobi", "L1", 0),
            ("jacobi", "i1", 0),
            ("koszul", "L1", 0),
            ("koszul", "L1", 1),
        ]

    def test_failing_equations(self, report):
        assert report.failing_equations() == {"koszul": 1, "jacobi": 1}
        assert report.max_residual("koszul") == 0.5
        assert report.max_residual("jacobi") == 0.0

    def test_jsonl(self, report):
        lines = report.to_jsonl().splitlines()
        assert len(lines) == 5
        header = json.loads(lines[0])
        assert header["schema_version"] == "1.0"
        assert header["manifest"] == "flat"
        assert header["summary"]["total"] == 4
        assert json.loads(lines[1])["equation"] == "koszul"

    def test_to_dict_nests_rows(self, report):
        d = report.to_dict()
        assert len(d["rows"]) == 4
        assert d["engine_version"] == "0.1.0"

    def test_empty_report_passes(self):
        empty = CheckReport("lie", "flat", "abc", "0.1.0")
        assert empty.passed
        assert empty.summary["total"] == 0
