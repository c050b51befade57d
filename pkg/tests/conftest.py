import numpy as np
import pytest

from gsbvp.boundary import BoundarySetup

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_acceptance():
    """Record one PASS/FAIL line for the terminal summary."""

    def rec(number, title, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] criterion {number:>2}: {title} {detail}".rstrip())
        print(ACCEPTANCE_LINES[-1])
        return ok

    return rec


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


def random_valid_setup(rng: np.random.Generator, m: int, dim_v: int, n_dirichlet: int, scale: float = 0.3):
    """Random oblique-sector anti-Hermitian gamma matrices, pi on the last components, random basis."""
    k = dim_v - n_dirichlet
    gam = []
    for _ in range(m - 1):
        a = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
        g = np.zeros((dim_v, dim_v), dtype=complex)
        g[:k, :k] = scale * (a - a.conj().T) / 2
        gam.append(g)
    pi = np.zeros((dim_v, dim_v), dtype=complex)
    pi[k:, k:] = np.eye(n_dirichlet)
    q, _ = np.linalg.qr(rng.normal(size=(dim_v, dim_v)) + 1j * rng.normal(size=(dim_v, dim_v)))
    return BoundarySetup(m, dim_v, q @ pi @ q.conj().T, [q @ g @ q.conj().T for g in gam], label="random")
