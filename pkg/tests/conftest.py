def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: the numbered acceptance criteria (slow)")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
