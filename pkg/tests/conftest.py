"""Shared fixtures plus the acceptance-report hook.

The acceptance tests register one line per criterion through the
``criterion`` context manager; pytest prints the collected table after
the run so the pass/fail status of every criterion is visible in plain
``pytest -v`` output.
"""

from contextlib import contextmanager

import pytest

from omnipipe import (CALIBRATED_REACH_MM, PipeNetwork, PlannerConfig,
                      RobotGeometry, straight, tee)

_RESULTS: list[tuple[int, str, bool]] = []


@contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except Exception:
        _RESULTS.append((number, description, False))
        raise
    else:
        _RESULTS.append((number, description, True))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, passed in sorted(_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status} - "
                                    f"{description}")


@pytest.fixture
def geom() -> RobotGeometry:
    """Reference robot: 15 mm lugs, 60 mm arms, calibrated max reach."""
    return RobotGeometry(lug_radius_r=15.0, arm_length_l=60.0, a_offset=30.0,
                         reach_min=40.0, reach_max=CALIBRATED_REACH_MM,
                         module_outer_radius=20.0)


@pytest.fixture
def cfg() -> PlannerConfig:
    return PlannerConfig()


@pytest.fixture
def tee_net() -> PipeNetwork:
    return PipeNetwork((straight(160.0, 500.0), tee(160.0),
                        straight(160.0, 300.0)))
