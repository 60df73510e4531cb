import random

import pytest

from mediankit import fixtures as fx


@pytest.fixture
def rng():
    return random.Random(987123)


@pytest.fixture
def square():
    return fx.square()


@pytest.fixture
def path3():
    return fx.path3()


@pytest.fixture
def tripod():
    return fx.tripod()


@pytest.fixture
def grid():
    return fx.grid()
