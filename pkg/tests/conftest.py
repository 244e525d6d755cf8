import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from momentum_lab.bench import make_tmm_oracle, standard_tmm_spec, run_experiment  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def tmm_oracle():
    return make_tmm_oracle(standard_tmm_spec())


@pytest.fixture(scope="session")
def tmm_experiment(tmm_oracle):
    return run_experiment(["gd", "hb", "tm", "c2m"], tmm_oracle, iters=100_000)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
