import pytest

from rmtzeta.ensembles import Group, SymmetryClass, sample_angle_batch
from rmtzeta.statistics import unfold_batch
from rmtzeta.zeta import find_zeros


@pytest.fixture(scope="session")
def u40_batch():
    return sample_angle_batch(SymmetryClass(Group.UNITARY, 40), seed=7, count=2000)


@pytest.fixture(scope="session")
def usp40_batch():
    return sample_angle_batch(SymmetryClass(Group.USP, 40), seed=11, count=2000)


@pytest.fixture(scope="session")
def so40_batch():
    return sample_angle_batch(SymmetryClass(Group.SO_EVEN, 40), seed=13, count=2000)


@pytest.fixture(scope="session")
def u40_unfolded(u40_batch):
    return unfold_batch(u40_batch)


@pytest.fixture(scope="session")
def usp40_unfolded(usp40_batch):
    return unfold_batch(usp40_batch)


@pytest.fixture(scope="session")
def so40_unfolded(so40_batch):
    return unfold_batch(so40_batch)


@pytest.fixture(scope="session")
def zeros_500():
    return find_zeros(500.0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items()
                if name.split(".")[-1] == "test_acceptance"), None)
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip("."))):
        terminalreporter.write_line(line)
