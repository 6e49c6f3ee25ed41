import numpy as np
import pytest

from relaywise.model import LinkBudget, RelayGroup, SourceNode

ACCEPTANCE_LINES: list[str] = []


def random_group(seed: int, max_users: int = 4, budget: float | None = None) -> RelayGroup:
    """1..max_users users, SNRs uniform in 0-20 dB, budget log-uniform in [0.1, 100]."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_users + 1))
    snr = 10 ** (rng.uniform(0, 20, size=(n, 3)) / 10)
    users = [SourceNode(k + 1, LinkBudget(*row)) for k, row in enumerate(snr.tolist())]
    if budget is None:
        budget = float(10 ** rng.uniform(-1, 2))
    return RelayGroup(f"g{seed}", budget, users)


@pytest.fixture
def ref_link():
    return LinkBudget(1.0, 3.0, 1.0)


@pytest.fixture
def two_user_group():
    users = [SourceNode(1, LinkBudget(0.0, 3.0, 1.0)), SourceNode(2, LinkBudget(1.0, 7.0, 1.0))]
    return RelayGroup("R", 4.0, users)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
