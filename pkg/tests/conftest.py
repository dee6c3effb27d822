import numpy as np
import pytest

from rydqubo.models import IsingModel, QuboModel


def random_qubo(rng: np.random.Generator, n: int) -> QuboModel:
    linear = tuple(rng.normal(size=n))
    quad = {(i, j): float(rng.normal())
            for i in range(n) for j in range(i + 1, n)
            if rng.random() < 0.7}
    return QuboModel(n, linear, quad, float(rng.normal()))


def random_antiferro_ising(rng: np.random.Generator, n: int) -> IsingModel:
    h = tuple(rng.normal(size=n))
    j = {(i, j): float(rng.uniform(0.0, 2.0))
         for i in range(n) for j in range(i + 1, n)
         if rng.random() < 0.7}
    return IsingModel(n, h, j, float(rng.normal()))


@pytest.fixture
def rng():
    return np.random.default_rng(7)
