def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for result in RESULTS:
        terminalreporter.write_line(result.line)
    passed = sum(r.passed for r in RESULTS)
    terminalreporter.write_line(f"{passed}/{len(RESULTS)} criteria passed")
