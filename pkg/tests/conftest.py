import itertools
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from sharedinfo import JointDistribution, datafiles  # noqa: E402


@pytest.fixture
def xor():
    return datafiles.load_dist("xor")


@pytest.fixture
def leftmono():
    return datafiles.load_dist("left-mono")


@pytest.fixture
def conflicting():
    return datafiles.load_dist("sec7")


@pytest.fixture
def copy_dist():
    return datafiles.load_dist("copy")


@pytest.fixture
def independent_triple():
    return JointDistribution.uniform(["X1", "X2", "X3"], itertools.product(range(2), repeat=3))
