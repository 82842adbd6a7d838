import logging

import pytest

from momentshape.utils.time import RunTimer


def test_run_timer(caplog):
    timer = RunTimer("addition")
    assert timer.wall_time is None

    with caplog.at_level(logging.INFO):
        with timer as entered:
            value = 1 + 2

    assert entered is timer
    assert value == 3
    assert timer.name == "addition"
    assert timer.wall_time >= 0.0
    assert "addition completed" in caplog.text


def test_run_timer_with_synchronization(caplog):
    with caplog.at_level(logging.INFO):
        with RunTimer("study", synchronize=True) as timer:
            pass

    assert timer.wall_time >= 0.0
    assert "study completed" in caplog.text


def test_run_timer_with_error(caplog):
    timer = RunTimer("division")

    with caplog.at_level(logging.INFO):
        with pytest.raises(ZeroDivisionError):
            with timer:
                _ = 1 / 0

    assert timer.wall_time >= 0.0
    assert "division failed" in caplog.text
