import pytest

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance verdict; the line is printed in the terminal summary."""

    def record(number, title, passed, detail):
        _ACCEPTANCE.append((number, f"{'PASS' if passed else 'FAIL'} criterion {number} "
                                    f"({title}): {detail}"))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
