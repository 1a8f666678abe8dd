import pytest


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def verdict(request):
    """Record ``criterion N: PASS|FAIL|INFO  detail`` and print it."""
    lines = request.config._acceptance_lines

    def report(label, ok, detail):
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        line = f"criterion {label}: {status}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
