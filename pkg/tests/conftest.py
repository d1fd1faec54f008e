import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from towerdyn import MeasureTower, tower_from_profile

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_acceptance = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__.endswith("test_acceptance"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _acceptance.append((doc, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for doc, outcome in _acceptance:
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {doc}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def geometric():
    return tower_from_profile("geometric", 64)


@pytest.fixture
def flat():
    return tower_from_profile("flat", 64)


@pytest.fixture
def harmonic():
    return tower_from_profile("harmonic", 64)


def random_tower(rng, window=64, K=1.0, profiles=("geometric", "flat", "harmonic",
                                                   "random_distorted")) -> MeasureTower:
    """A random validated tower for property checks."""
    kind = profiles[int(rng.integers(len(profiles)))]
    profile = {"kind": kind}
    if kind == "geometric":
        profile["ratio"] = float(rng.uniform(0.05, 0.95))
    cells = int(rng.integers(1, 4))
    p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
    return tower_from_profile(profile, window, cells, K, int(rng.integers(2**31)), p=p)
