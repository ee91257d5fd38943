"""Shared pytest hooks: print the acceptance scoreboard at the end of a run."""

# criterion number -> (status, title, detail)
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] {number}. {title}: {detail}")
