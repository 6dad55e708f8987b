import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria report: one PASS/FAIL line each, printed after the run
_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): acceptance criterion number")


@pytest.fixture
def detail(request):
    notes: list[str] = []
    request.node._acceptance_notes = notes
    return notes


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    status = "PASS" if rep.passed else "FAIL"
    notes = "; ".join(getattr(item, "_acceptance_notes", []))
    _ACCEPTANCE[mark.args[0]] = (status, item.name, notes)
    line = f"ACCEPTANCE {mark.args[0]:>2} {status} {item.name}: {notes}"
    print("\n" + line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        status, name, notes = _ACCEPTANCE[n]
        terminalreporter.write_line(f"{n:>2} {status} {name}: {notes}")
