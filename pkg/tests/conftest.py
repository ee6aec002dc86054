import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from psg_pdos.equilibrium import Region
from psg_pdos.fixtures import region_fixture
from psg_pdos.model import canonical_pdos

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

REGIONS = (Region.STATUS_QUO, Region.ACTIVE_DETERRENCE, Region.RESISTANT_ATTACKER,
           Region.VULNERABLE_ATTACKER)

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def canonical():
    return canonical_pdos()


@pytest.fixture(params=REGIONS, ids=lambda r: r.value)
def fixture_region(request):
    return request.param, region_fixture(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one line per acceptance criterion; printed in the terminal summary."""
    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
