import pytest

_RESULTS = []


class AcceptanceLog:
    def record(self, label, passed, detail):
        _RESULTS.append((label, bool(passed), detail))
        print(f"{label}: {'PASS' if passed else 'FAIL'} {detail}")
        assert passed, f"{label}: {detail}"


@pytest.fixture
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in sorted(_RESULTS, key=lambda r: int(r[0].split()[1])):
        terminalreporter.write_line(f"{label}: {'PASS' if passed else 'FAIL'}  {detail}")
