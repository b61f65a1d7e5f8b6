import logging

import pytest

from app.core.logging import setup_logging

logger = logging.getLogger("app.tests.logging")


@pytest.mark.parametrize("attempt", [1, 2])
def test_logs_reach_the_current_stderr(capsys, attempt):
    setup_logging("INFO")
    logger.warning("contour shifted, attempt %d", attempt)
    out, err = capsys.readouterr()
    assert f"contour shifted, attempt {attempt}" in err
    assert out == ""


def test_later_calls_only_change_the_level(capsys):
    setup_logging("WARNING")
    setup_logging("ERROR")
    logger.warning("dropped")
    logger.error("kept")
    _, err = capsys.readouterr()
    assert "dropped" not in err
    assert err.count("kept") == 1
