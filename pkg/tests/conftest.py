import pytest

from ismkit.engine import run_ism
from ismkit.factors import paper_catalog
from ismkit.ssim import paper_ssim


@pytest.fixture(scope="session")
def catalog():
    return paper_catalog()


@pytest.fixture(scope="session")
def ssim():
    return paper_ssim()


@pytest.fixture(scope="session")
def report(ssim):
    return run_ism(ssim)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
