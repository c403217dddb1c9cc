"""Validation suite plumbing: fault injection, report determinism."""

import pytest

from patchsim.validation import (
    CheckResult,
    PAPER_VALUES,
    check_pml_reflection,
    cmd_validate,
    format_results,
    reproduction_report,
)


class TestFormatting:
    def test_results_table_deterministic(self):
        results = [
            CheckResult("alpha", True, True, "fine"),
            CheckResult("beta", False, True, "broken"),
            CheckResult("gamma", None, False, "informational"),
        ]
        a = format_results(results)
        b = format_results(results)
        assert a == b
        assert "PASS" in a and "FAIL" in a and "INFO" in a
        assert "1 failed" in a


class TestReport:
    def _summaries(self):
        row = {"f_hz": 4.4e9, "rl_db": -21.0, "bandwidth_10db_hz": None,
               "max_gain_dbi": 7.5, "gain_direction_deg": [0.0, 0.0]}
        return {
            "simple_u": {"resonances": [row], "min_rl_db": -21.0, "max_gain_dbi": 7.5},
            "modified_u": {"resonances": [dict(row, rl_db=-24.0, max_gain_dbi=7.9)],
                           "min_rl_db": -24.0, "max_gain_dbi": 7.9},
        }

    def test_contains_published_values(self):
        text = reproduction_report(self._summaries())
        assert "-38.0" in text
        assert "-43.0" in text
        assert "7.834" in text
        assert "8.99" in text
        assert "2.50 GHz" in text
        assert "informational" in text

    def test_deterministic_bytes(self):
        s = self._summaries()
        assert reproduction_report(s) == reproduction_report(s)

    def test_handles_missing_runs(self):
        text = reproduction_report({})
        assert "(not run)" in text


class TestValidateCommand:
    def test_quick_subset_identical_bytes(self, monkeypatch, tmp_path):
        # validate twice over a cheap deterministic subset: identical reports
        import patchsim.validation as v

        subset = (v.check_cavity_roundtrip, v.check_touchstone_golden,
                  v.check_config_roundtrip, v.check_source_spectrum)
        monkeypatch.setattr(v, "FAST_CHECKS", subset)
        r1, t1 = cmd_validate(quick=True, out_dir=tmp_path / "a", log=lambda *a: None)
        r2, t2 = cmd_validate(quick=True, out_dir=tmp_path / "b", log=lambda *a: None)
        assert t1 == t2
        assert (tmp_path / "a" / "validate_report.txt").read_bytes() == \
               (tmp_path / "b" / "validate_report.txt").read_bytes()
        assert all(r.passed for r in r1)

    def test_exit_semantics_follow_hard_checks(self, monkeypatch):
        import patchsim.validation as v

        def failing():
            return CheckResult("synthetic_failure", False, True, "injected")

        monkeypatch.setattr(v, "FAST_CHECKS", (failing,))
        results, text = cmd_validate(quick=True, log=lambda *a: None)
        assert any(r.passed is False for r in results)
        assert "FAIL" in text


@pytest.mark.slow
class TestFaultInjection:
    def test_thin_absorber_fails_reflection_check(self):
        # the hidden hook: a 1-cell absorber must blow the -40 dB budget
        result = check_pml_reflection(thickness=1)
        assert result.passed is False
        assert result.data["reflection_db"] > -40.0


class TestPaperConstants:
    def test_values_pinned(self):
        assert PAPER_VALUES["simple_u"]["min_rl_db"] == -38.0
        assert PAPER_VALUES["modified_u"]["min_rl_db"] == -43.0
        assert PAPER_VALUES["simple_u"]["max_gain_dbi"] == 7.834
        assert PAPER_VALUES["modified_u"]["max_gain_dbi"] == 8.99
        assert PAPER_VALUES["band_ghz"] == (4.0, 4.5)
