import numpy as np
import pytest

from entbreak import DensityMatrix

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line[1])


def record_acceptance(number, name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {name}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    assert ok, line


# ----------------------------------------------------------------------
# random objects, generated with numpy only (no package code)
# ----------------------------------------------------------------------


def haar_unitary(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_hermitian(rng, d, scale=1.0):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * 0.5 * (g + g.conj().T)


def random_state(rng, dim_a=2, dim_b=2, rank=None):
    return DensityMatrix(dim_a, dim_b, random_density(rng, dim_a * dim_b, rank))


def pt_oracle(m, dim_a, dim_b):
    """Partial transpose on B by explicit index loops."""
    out = np.zeros_like(m)
    for i in range(dim_a):
        for j in range(dim_b):
            for k in range(dim_a):
                for l in range(dim_b):
                    out[i * dim_b + j, k * dim_b + l] = m[i * dim_b + l, k * dim_b + j]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
