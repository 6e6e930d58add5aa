import numpy as np
import pytest

from higs import GaussianOracle, MixtureOracle


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def gaussian():
    return GaussianOracle([0.0], 1.0)


@pytest.fixture
def mixture():
    # benchmark mixture used by the low-NFE acceptance check
    return MixtureOracle([0.3, 0.7], [-2.0, 1.0], [0.5, 0.5])


class IdentityDenoiser:
    """D(z, t) = z, i.e. zero drift."""

    shape = (3,)

    def __call__(self, z, t, y=None):
        return np.array(z, copy=True)


@pytest.fixture
def identity():
    return IdentityDenoiser()


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_REPORT_KEY, [])

    def _report(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} [{criterion}] {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return _report


_REPORT_KEY = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_REPORT_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
