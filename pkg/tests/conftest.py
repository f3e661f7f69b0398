import numpy as np
import pytest

from wilson_cg.fieldio import generate
from wilson_cg.fields import random_fermion
from wilson_cg.lattice import LatticeDims


@pytest.fixture
def rng():
    return np.random.default_rng(20190301)


@pytest.fixture
def dims16():
    return LatticeDims(2, 2)


@pytest.fixture
def gauge16(dims16):
    return generate("random", dims16, seed=11)


@pytest.fixture
def dims512():
    return LatticeDims(4, 8)


@pytest.fixture
def gauge512(dims512):
    return generate("random", dims512, seed=3)


@pytest.fixture
def psi512(dims512, rng):
    return random_fermion(dims512, rng)


def random_spinor(rng, shape=()):
    s = tuple(shape) + (4, 3)
    return rng.standard_normal(s) + 1j * rng.standard_normal(s)


def random_vector(rng, shape=()):
    s = tuple(shape) + (3,)
    return rng.standard_normal(s) + 1j * rng.standard_normal(s)
