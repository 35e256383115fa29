import pytest

from crn_clockwork import OscillatorConfig, build_oscillator, compose_loop, integrate

# criterion number -> (title, outcome) for the acceptance summary
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        ACCEPTANCE[n] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, result = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {result}: {title}")


@pytest.fixture(scope="session")
def std_cfg():
    return OscillatorConfig()


@pytest.fixture(scope="session")
def standard_trace(std_cfg):
    """Worked-example oscillator from (5, 5, 0, 0) over [0, 100]."""
    return integrate(build_oscillator(std_cfg), (5.0, 5.0, 0.0, 0.0), (0.0, 100.0))


@pytest.fixture(scope="session")
def loop_trace(std_cfg):
    """Clock-driven loop with s3 = 1 over five full cycles."""
    return compose_loop(std_cfg).simulate(105.0)
