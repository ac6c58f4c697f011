import sys


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in list(sys.modules.items())
                if name.endswith("test_acceptance") and hasattr(m, "RESULTS")), None)
    if mod is None or not mod.RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in mod.TITLES.items():
        runs = mod.RESULTS.get(n)
        if not runs:
            tr.write_line(f"criterion {n}: NOT RUN  {title}")
            continue
        failed = [detail for ok, detail in runs if not ok]
        status = "FAIL" if failed else "PASS"
        tr.write_line(f"criterion {n}: {status}  {title} ({len(runs) - len(failed)}/{len(runs)} checks)")
        for detail in failed:
            tr.write_line(f"    {detail}")
    for line in mod.NOTES:
        tr.write_line(f"note: {line}")
