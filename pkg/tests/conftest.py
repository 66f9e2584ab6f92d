import pytest

from guidepeak import GuideMedium, SourceSpec, WindowSpec

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    _ACCEPTANCE[props["criterion"]] = (report.passed, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:<3}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def medium():
    return GuideMedium(omega_c=9.5e9, n1=0.2e6)


@pytest.fixture(scope="session")
def fig2_source():
    return SourceSpec(9.49e9, WindowSpec(3, 0.8e9, 0.8e9))


@pytest.fixture(scope="session")
def sharp_source():
    return SourceSpec(9.49e9, WindowSpec(1, 0.8e9, 0.8e9))
