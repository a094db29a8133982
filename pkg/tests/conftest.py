import numpy as np
import pytest

ACCEPTANCE_LINES = []


def record_criterion(number, name, ok, detail=""):
    line = f"CRITERION {number} [{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unitary(rng, n):
    """Eigenvectors of a random Hermitian matrix, columns rephased randomly."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    _, v = np.linalg.eigh(g + g.conj().T)
    return v * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
