import pytest

from wormhole_wavemaps.spectral import make_grid


@pytest.fixture(scope="session")
def grid33():
    return make_grid(33)


@pytest.fixture(scope="session")
def grid65():
    return make_grid(65)


@pytest.fixture(scope="session")
def grid129():
    return make_grid(129)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdict lines collected during the run."""
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines, key=lambda k: (int(k[1:].rstrip("ab")), k)):
        terminalreporter.write_line(lines[key])
