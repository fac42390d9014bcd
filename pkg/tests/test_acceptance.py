"""End-to-end acceptance checks; one PASS/FAIL line per criterion."""
import pytest

from fracspec.reproduce import CHECKS, format_table, run_check


@pytest.mark.parametrize("check_id", list(CHECKS))
def test_acceptance(check_id, capsys):
    result = run_check(check_id)
    with capsys.disabled():
        print("\n" + format_table([result]))
    assert result.passed, result.detail
