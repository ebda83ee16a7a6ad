import pytest

from ctxgen.resources import load_graph, load_lexicon, load_resources

FIXTURES = __import__("pathlib").Path(__file__).parent / "fixtures"

_ACCEPTANCE_RESULTS: dict[int, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon()


@pytest.fixture(scope="session")
def graph():
    return load_graph()


@pytest.fixture(scope="session")
def resources():
    return load_resources()


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(num, label): ties a test to one acceptance criterion"
    )


def pytest_runtest_makereport(item, call):
    if call.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    num, label = marker.args
    outcome = "FAIL" if call.excinfo is not None else "PASS"
    # keep the worst outcome if several tests share a criterion
    if _ACCEPTANCE_RESULTS.get(num, ("PASS",))[0] != "FAIL":
        _ACCEPTANCE_RESULTS[num] = (outcome, label)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE_RESULTS):
        outcome, label = _ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"[{outcome}] criterion {num}: {label}")
