from hypothesis import settings

# brute-force oracles make single examples slow but not flaky
settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" not in getattr(rep, "nodeid", "") or rep.when not in ("call", "setup"):
                continue
            if outcome != "skipped" and rep.when != "call":
                continue
            name = dict(rep.user_properties).get("criterion", rep.nodeid.split("::")[-1])
            lines.append((rep.nodeid, f"{outcome.upper()[:4]:<4}  {name}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
