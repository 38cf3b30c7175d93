import pytest

from chensieve.arith import build_factor_table


@pytest.fixture(scope="session")
def t_small():
    return build_factor_table(200_010)


@pytest.fixture(scope="session")
def t_big():
    # reaches 7N/4 + 4 for N = 10^6
    return build_factor_table(1_750_010)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
