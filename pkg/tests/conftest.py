import pytest
from hypothesis import settings

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    # dense-grid warnings from the line scans are informational here
    config.addinivalue_line("filterwarnings", "ignore:.*closer than two grid steps:RuntimeWarning")
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str, seconds: float, limit: float):
        in_time = seconds < limit
        status = "PASS" if ok and in_time else "FAIL"
        line = f"criterion {number:2d} {status}  {title}: {detail} [{seconds:.1f} s of {limit:g} s]"
        print(line)
        request.config.stash[_ACCEPTANCE].append((number, line))
        assert ok, line
        assert in_time, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
