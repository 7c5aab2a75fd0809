import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def harmonic():
    from semispec import make_potential
    return make_potential("harmonic")


@pytest.fixture(scope="session")
def quartic():
    from semispec import make_potential
    return make_potential("quartic", 0.1)


@pytest.fixture(scope="session")
def coshwell():
    from semispec import make_potential
    return make_potential("coshwell")


@pytest.fixture(scope="session")
def asym():
    from semispec import make_potential
    return make_potential("asym", 0.3)


# ------------------------------------------------------ acceptance summary

_CRITERIA: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    mark = getattr(report, "_criterion", None)
    if mark is None:
        return
    k, label = mark
    entry = _CRITERIA.setdefault(k, {"label": label, "passed": 0, "failed": 0, "skipped": 0})
    if report.outcome in ("failed", "skipped"):
        entry[report.outcome] += 1
    elif report.when == "call":
        entry["passed"] += 1


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result()._criterion = tuple(mark.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        e = _CRITERIA[k]
        status = "FAIL" if e["failed"] else ("SKIP" if e["skipped"] or not e["passed"] else "PASS")
        terminalreporter.write_line(f"criterion {k}: {status}  {e['label']}")
