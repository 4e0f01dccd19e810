import numpy as np
import pytest

from uwb_rtls import ArenaConfig, ClockModel, NoiseModel, Trajectory, build_schedule


@pytest.fixture
def default_arena():
    return ArenaConfig()


@pytest.fixture
def quiet_clock():
    return ClockModel(drift_ppm=0.0, sync_offset_s=0.0, sigma_tof_s=0.0)


@pytest.fixture
def zero_noise():
    return NoiseModel(
        mode="range_noise",
        los_mean_m=0.0,
        los_sigma_m=0.0,
        nlos_mean_m=0.0,
        nlos_sigma_m=0.0,
    )


@pytest.fixture
def center_hold():
    """Stationary trajectory at the arena center, 30 s long."""
    return Trajectory(waypoints=((0.0, (0.6096, 0.3048)), (30.0, (0.6096, 0.3048))))


@pytest.fixture
def single_tag_schedule():
    return build_schedule(1, 10.0)


def rigid_transform(points, angle, shift):
    rot = np.array(
        [[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]]
    )
    return points @ rot.T + np.asarray(shift)


def pytest_terminal_summary(terminalreporter):
    # Replay the acceptance pass/fail lines after capture has ended so
    # they always reach the console, `-s` or not.
    try:
        from test_acceptance import REPORTED_LINES
    except ImportError:
        return
    if REPORTED_LINES:
        terminalreporter.section("acceptance criteria")
        for line in REPORTED_LINES:
            terminalreporter.write_line(line)
