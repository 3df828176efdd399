"""Test configuration: one PASS/FAIL summary line per acceptance criterion."""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if getattr(report, "when", "call") != "call" and status != "error":
                continue
            if "test_acceptance.py" in report.nodeid:
                name = report.nodeid.split("::")[-1]
                results.append((name, status == "passed"))
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, ok in sorted(set(results)):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
