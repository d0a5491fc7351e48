import pytest

_LINES: list[str] = []


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion and print it immediately."""

    def _report(number: int, ok: bool, detail: str) -> bool:
        line = f"ACCEPTANCE {number:2d} {'PASS' if ok else 'FAIL'}: {detail}"
        _LINES.append(line)
        capman = request.config.pluginmanager.getplugin("capturemanager")
        with capman.global_and_fixture_disabled():
            print("\n" + line, flush=True)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES):
            terminalreporter.write_line(line)
