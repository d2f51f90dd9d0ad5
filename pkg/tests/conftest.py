import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    rows = {}
    for reports in terminalreporter.stats.values():
        for rep in reports:
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if not m or getattr(rep, "when", None) not in ("setup", "call"):
                continue
            key = (int(m.group(1)), m.group(2).replace("_", " "))
            ok = rep.passed if rep.when == "call" else rep.passed or rows.get(key, True)
            rows[key] = rows.get(key, True) and ok
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for (num, label), ok in sorted(rows.items()):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {label}")
