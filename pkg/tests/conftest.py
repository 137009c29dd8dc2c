import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def orbit_count(perm) -> int:
    """Number of cycles of a permutation given as an index array (graph traversal)."""
    perm = list(perm)
    seen = [False] * len(perm)
    cycles = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        cycles += 1
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
    return cycles


def matrix_to_perm(P) -> list[int]:
    P = np.asarray(P)
    return [int(np.flatnonzero(P[i])[0]) for i in range(P.shape[0])]


def random_contraction(rng, n, lam):
    W = rng.standard_normal((n, n))
    return W * (lam / np.linalg.norm(W, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].lstrip("C"))):
            terminalreporter.write_line(line)
