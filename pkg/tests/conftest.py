import numpy as np
import pytest


def random_hermitian_pd(rng, n, floor=0.1):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = z @ z.conj().T / n + floor * np.eye(n)
    return 0.5 * (h + h.conj().T)


def random_complex(rng, rows, cols):
    return (rng.standard_normal((rows, cols))
            + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
