import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from dualjet.chart import JetChart, SpatialMetric, TemporalMetric
from dualjet.connections import berwald_connection, random_cartan
from dualjet.symbolic import sin

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def sphere_connection(m=1, temporal=None):
    """Berwald connection of the round 2-sphere; ``temporal`` picks h for m = 2."""
    if m == 1:
        ch = JetChart(1, 2)
        h = TemporalMetric(ch, [[1]])
    else:
        ch = JetChart(2, 2)
        t1 = ch.t(1)
        h22 = {"polar": t1**2, "sphere": sin(t1) ** 2}[temporal or "polar"]
        h = TemporalMetric(ch, [[1, 0], [0, h22]])
    phi = SpatialMetric(ch, [[1, 0], [0, sin(ch.x(1)) ** 2]])
    return berwald_connection(h, phi)


@pytest.fixture(scope="session")
def sphere():
    return sphere_connection()


@pytest.fixture(scope="session")
def sphere2():
    return sphere_connection(2)


@pytest.fixture(scope="session")
def flat():
    ch = JetChart(1, 1)
    return berwald_connection(TemporalMetric(ch, [[1]]), SpatialMetric(ch, [[1]]))


@pytest.fixture(scope="session")
def cartan22():
    return random_cartan(JetChart(2, 2), seed=1)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results, key=lambda k: (int(str(k).split("-")[0]), str(k))):
        entries = results[key]
        ok = all(flag for flag, _ in entries)
        failed = [d for flag, d in entries if not flag]
        if failed:
            detail = f"{len(failed)}/{len(entries)} checks failed: " + "; ".join(failed)
        elif len(entries) <= 4:
            detail = "; ".join(d for _, d in entries)
        else:
            detail = f"all {len(entries)} checks hold"
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'} {detail}")
