import pytest

from chaoscert.corpus import example32_map, example32_matrix, example32_partition
from chaoscert.symbolic import PeriodicStream


@pytest.fixture(scope="session")
def matrix():
    return example32_matrix()


@pytest.fixture(scope="session")
def fmap():
    return example32_map()


@pytest.fixture(scope="session")
def partition():
    return example32_partition()


@pytest.fixture(scope="session")
def alpha():
    return PeriodicStream((1, 2))
