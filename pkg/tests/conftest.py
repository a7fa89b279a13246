import pytest

from syncpulse.spectral import SpectralDensity

ACCEPTANCE_LINES = []


@pytest.fixture
def gaussian():
    return SpectralDensity.gaussian()


@pytest.fixture
def semi_elliptic():
    return SpectralDensity.semi_elliptic()


@pytest.fixture
def lorentzian():
    return SpectralDensity.lorentzian()


@pytest.fixture(params=["gaussian", "semi_elliptic", "lorentzian"])
def family(request):
    return getattr(SpectralDensity, request.param)()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
