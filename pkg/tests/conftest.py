import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rcgap.environment import Environment, LogNormal, Uniform, make_iid

settings.register_profile(
    "rcgap", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("rcgap")

HERE = Path(__file__).parent


@pytest.fixture(scope="session")
def acceptance_config():
    return json.loads((HERE / "acceptance_config.json").read_text())


# Both laws have mean-one resistances; the lognormal one is fairly rough
# (sigma = 1) so that localised modes show up at N <= 64.
RANDOM_LAWS = (Uniform(0.5, 1.5), LogNormal(-0.5, 1.0))


def random_environments(count, n_max=64, n_min=2):
    """Deterministic mixed batch: law alternates, N cycles through [n_min, n_max]."""
    envs = []
    for seed in range(count):
        n = n_min + (seed * 37) % (n_max - n_min + 1)
        envs.append(make_iid(n, RANDOM_LAWS[seed % 2], seed))
    return envs


def env_from_conductances(values):
    values = np.asarray(values, dtype=float)
    return Environment(n=values.size + 1, conductances=values)


# criterion number -> list of (ok, detail); printed after the run
ACCEPTANCE_RESULTS = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE_RESULTS.setdefault(number, []).append((bool(ok), detail))
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        parts = ACCEPTANCE_RESULTS[number]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        details = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {number}: {status}  {details}")
