import dataclasses

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from crossris.channel import draw_channel_set
from crossris.config import SystemConfig

settings.register_profile("ci", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

# One "criterion N PASS|FAIL: detail" line per acceptance check, echoed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def config():
    return SystemConfig()


@pytest.fixture
def channels(config):
    return draw_channel_set(config, np.random.default_rng(7))


def random_phase(rng, n, relaxed=False):
    phi = np.exp(2j * np.pi * rng.random(n))
    if relaxed:
        phi *= rng.random(n)
    return phi


def symmetric_channels(config, seed=0):
    """A realization where device 2 sees exactly device 1's channels and budget."""
    ch = draw_channel_set(config, np.random.default_rng(seed))
    dup = lambda t: (t[0], t[0].copy())  # noqa: E731
    return dataclasses.replace(
        ch, h_r=dup(ch.h_r), H_0=dup(ch.H_0), g_r=dup(ch.g_r), g_ap=dup(ch.g_ap),
        noise_up=np.full(2, ch.noise_up[0]), noise_down=np.full(2, ch.noise_down[0]),
        power=np.full(2, ch.power[0]), ap_power=np.full(2, ch.ap_power[0]),
        bandwidth=np.full(2, ch.bandwidth[0]))
