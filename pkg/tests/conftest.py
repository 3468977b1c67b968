import numpy as np
import pytest

from grover_qaoa.charfn import Spectrum


def random_spectrum(rng: np.random.Generator, n: int) -> Spectrum:
    """Arbitrary spectrum with a non-zero mean and some repeated values."""
    values = rng.normal(0.3, 1.2, size=2**n)
    values[: 2 ** (n - 1) : 3] = values[1]
    return Spectrum(n, values)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
