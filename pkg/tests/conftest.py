from hypothesis import HealthCheck, settings

settings.register_profile(
    "fdiff",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("fdiff")

# acceptance criteria record (number, title, passed) here as they run
ACCEPTANCE: list[tuple[int, str, bool]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title}")
