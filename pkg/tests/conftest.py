import test_acceptance


def pytest_terminal_summary(terminalreporter):
    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(test_acceptance.RESULTS):
        terminalreporter.write_line(test_acceptance.RESULTS[number])
